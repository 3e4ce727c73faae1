"""Generator, discriminators, spectrum baseline, deep-feature interpolation."""

import numpy as np
import pytest
import torch

from artic import audio
from artic.errors import ConfigurationError, ShapeError
from artic.models.cbl import CblConfig, CblModel, toy_cbl_config
from artic.models.deepfeat import StubDeepFeatureClient, deep_feature_interpolate
from artic.models.discriminators import (
    MultiPeriodDiscriminator,
    MultiScaleDiscriminator,
    toy_discriminator_config,
)
from artic.models.generator import (
    GeneratorConfig,
    HifiCarGenerator,
    count_params,
    full_generator_config,
    synthesize_utterance,
    toy_generator_config,
)
from conftest import tiny_generator, tiny_generator_config


class TestGeneratorConfig:
    def test_upsample_product_must_match_hop(self):
        with pytest.raises(ConfigurationError):
            GeneratorConfig(input_dim=4, initial_channels=8, upsample_factors=(8, 6, 4))

    def test_round_trip(self):
        cfg = tiny_generator_config()
        back = GeneratorConfig.from_dict(cfg.to_dict())
        assert back.to_dict() == cfg.to_dict()

    def test_full_scale_parameter_count(self):
        torch.manual_seed(0)
        model = HifiCarGenerator(full_generator_config())
        n = count_params(model)
        assert n == 14_511_138
        assert 1.0e7 < n < 2.0e7  # the published scale, order 1.5e7

    def test_negative_ar_context_rejected(self):
        with pytest.raises(ConfigurationError):
            tiny_generator_config(ar_context=-1)


class TestLengthContract:
    @pytest.mark.parametrize("t", [1, 2, 3, 5, 8, 13, 21, 34, 50])
    def test_forward_emits_240_samples_per_frame(self, t):
        model = tiny_generator()
        x = torch.randn(2, 6, t)
        with torch.no_grad():
            y = model(x)
        assert y.shape == (2, 1, t * audio.HOP)

    def test_generate_full_sweep_1_to_50(self):
        model = tiny_generator()
        rng = np.random.default_rng(0)
        for t in range(1, 51):
            feats = rng.standard_normal((t, 6)).astype(np.float32)
            out = model.generate(feats, chunk_frames=4)
            assert out.shape == (t * audio.HOP,)
            assert out.dtype == np.float32

    def test_output_bounded_by_tanh(self):
        model = tiny_generator()
        out = model.generate(np.random.default_rng(1).standard_normal((6, 6)).astype(np.float32))
        assert np.all(np.abs(out) <= 1.0)


class TestAutoregression:
    def test_ar_context_zero_equals_plain_forward(self):
        model = tiny_generator(seed=3, ar_context=0)
        feats = np.random.default_rng(2).standard_normal((7, 6)).astype(np.float32)
        gen = model.generate(feats)
        with torch.no_grad():
            fwd = model(torch.as_tensor(feats).t().unsqueeze(0)).squeeze().numpy()
        np.testing.assert_array_equal(gen, fwd)

    def test_chunked_generation_is_causal(self):
        # with chunk size 4, frames 0-7 are finished before frame 9 is read
        model = tiny_generator(seed=4)
        rng = np.random.default_rng(5)
        feats = rng.standard_normal((12, 6)).astype(np.float32)
        base = model.generate(feats, chunk_frames=4)
        poked = feats.copy()
        poked[9] += 10.0
        out = model.generate(poked, chunk_frames=4)
        np.testing.assert_array_equal(out[: 8 * audio.HOP], base[: 8 * audio.HOP])
        assert not np.array_equal(out[8 * audio.HOP :], base[8 * audio.HOP :])

    def test_history_changes_output(self):
        model = tiny_generator(seed=6)
        x = torch.randn(1, 6, 4)
        with torch.no_grad():
            silent = model(x)
            loud = model(x, history=torch.full((1, 240), 0.5))
        assert not torch.equal(silent, loud)

    def test_wrong_history_width_rejected(self):
        model = tiny_generator()
        with pytest.raises(ShapeError):
            model(torch.randn(1, 6, 3), history=torch.randn(1, 100))

    def test_history_rejected_when_not_autoregressive(self):
        model = tiny_generator(ar_context=0)
        with pytest.raises(ShapeError):
            model(torch.randn(1, 6, 3), history=torch.randn(1, 240))

    def test_teacher_forced_and_free_running_differ(self):
        # conditioning on ground truth vs on own output diverges after the
        # first chunk on any model whose history branch is active
        model = tiny_generator(seed=7)
        rng = np.random.default_rng(8)
        feats = rng.standard_normal((8, 6)).astype(np.float32)
        truth = rng.uniform(-0.5, 0.5, 8 * audio.HOP).astype(np.float32)

        free = model.generate(feats, chunk_frames=4)
        ctx = model.config.ar_context
        with torch.no_grad():
            x = torch.as_tensor(feats).t().unsqueeze(0)
            h = torch.as_tensor(truth[4 * audio.HOP - ctx : 4 * audio.HOP]).unsqueeze(0)
            teacher_tail = model(x[:, :, 4:], history=h).squeeze().numpy()
        assert not np.array_equal(free[4 * audio.HOP :], teacher_tail)

    def test_zero_weights_give_zero_output(self):
        # degenerate check: with weight norm off, zeroed parameters must
        # produce exactly tanh(0) = 0 everywhere and stay finite
        model = tiny_generator(use_weight_norm=False)
        with torch.no_grad():
            for p in model.parameters():
                p.zero_()
        out = model.generate(np.ones((5, 6), np.float32), chunk_frames=2)
        assert out.shape == (5 * audio.HOP,)
        np.testing.assert_array_equal(out, np.zeros_like(out))


class TestGradientHealth:
    def test_backprop_matches_finite_differences(self):
        # central differences on 5 randomly chosen scalar parameters,
        # full float64 to keep the quotient trustworthy
        torch.manual_seed(11)
        model = HifiCarGenerator(tiny_generator_config()).double()
        rng = np.random.default_rng(12)
        feats = torch.as_tensor(rng.standard_normal((1, 6, 5)))
        probe = torch.as_tensor(rng.standard_normal((1, 1, 5 * audio.HOP)))

        def loss_fn():
            return (model(feats) * probe).sum()

        loss = loss_fn()
        loss.backward()

        params = [p for p in model.parameters() if p.requires_grad and p.numel() > 0]
        picks = []
        for k in range(5):
            p = params[int(rng.integers(len(params)))]
            flat = int(rng.integers(p.numel()))
            picks.append((p, flat))

        h = 1e-6
        for p, flat in picks:
            with torch.no_grad():
                orig = p.view(-1)[flat].item()
                p.view(-1)[flat] = orig + h
                up = loss_fn().item()
                p.view(-1)[flat] = orig - h
                down = loss_fn().item()
                p.view(-1)[flat] = orig
            numeric = (up - down) / (2 * h)
            analytic = p.grad.view(-1)[flat].item()
            denom = max(abs(numeric), abs(analytic), 1e-8)
            assert abs(numeric - analytic) / denom < 1e-2, (numeric, analytic)


class TestSynthesizeUtterance:
    def test_wraps_waveform_with_provenance(self):
        from artic.features import ArticulatoryTrajectory, default_feature_map

        model = tiny_generator()
        traj = ArticulatoryTrajectory(
            "u", np.zeros((3, 6), np.float32), feature_index_map=default_feature_map(6)
        )
        wav = synthesize_utterance(model, traj, chunk_frames=2)
        assert wav.provenance == "synthesized"
        assert wav.sample_rate == audio.SAMPLE_RATE
        assert len(wav.samples) == 3 * audio.HOP


class TestCountParams:
    def test_linear_example(self):
        layer = torch.nn.Linear(230, 256)
        assert count_params(layer) == 230 * 256 + 256 == 59_136

    def test_frozen_params_excluded(self):
        layer = torch.nn.Linear(10, 4)
        layer.bias.requires_grad_(False)
        assert count_params(layer) == 40


class TestDiscriminators:
    def test_multi_period_logits_and_fmaps(self):
        cfg = toy_discriminator_config()
        mpd = MultiPeriodDiscriminator(cfg)
        y = torch.randn(2, 1, 960)
        logits, fmaps = mpd(y)
        assert len(logits) == len(cfg.periods)
        assert len(fmaps) == len(cfg.periods)
        for fm in fmaps:
            assert len(fm) >= 2

    def test_multi_scale_handles_odd_lengths(self):
        msd = MultiScaleDiscriminator(toy_discriminator_config())
        logits, fmaps = msd(torch.randn(1, 1, 961))
        assert len(logits) == toy_discriminator_config().num_scales
        for lg in logits:
            assert torch.isfinite(lg).all()

    def test_period_shorter_than_input_pads(self):
        mpd = MultiPeriodDiscriminator(toy_discriminator_config())
        logits, _ = mpd(torch.randn(1, 1, 7))  # shorter than every period grid
        assert all(torch.isfinite(lg).all() for lg in logits)


class TestCbl:
    @pytest.mark.parametrize("t", [1, 2, 7, 16, 50])
    def test_mel_frame_count_matches_input(self, t):
        torch.manual_seed(0)
        model = CblModel(toy_cbl_config(input_dim=6))
        with torch.no_grad():
            out = model(torch.randn(2, 6, t))
        assert out.shape == (2, 80, t)

    def test_zeroed_head_emits_zeros(self):
        torch.manual_seed(0)
        model = CblModel(toy_cbl_config(input_dim=6))
        with torch.no_grad():
            model.proj.weight.zero_()
            model.proj.bias.zero_()
            out = model(torch.randn(1, 6, 9))
        np.testing.assert_array_equal(out.numpy(), 0.0)

    def test_even_kernel_rejected(self):
        with pytest.raises(ConfigurationError):
            CblConfig(input_dim=6, conv_channels=8, kernel_size=4, lstm_hidden=8)


class TestDeepFeatureInterpolation:
    def test_identity_at_equal_rates(self, rng):
        x = rng.standard_normal((9, 5)).astype(np.float32)
        out = deep_feature_interpolate(x, source_rate=50.0, target_rate=50.0)
        np.testing.assert_allclose(out, x, atol=1e-7)

    def test_constant_input_stays_constant(self):
        x = np.full((4, 3), 2.5, np.float32)
        out = deep_feature_interpolate(x, source_rate=41.5, target_rate=83.0)
        np.testing.assert_allclose(out, 2.5, atol=1e-6)

    def test_two_frame_ramp_doubles_smoothly(self):
        # one 41.5 Hz interval spans two 83 Hz intervals: [0, 1] -> [0, .5, 1]
        x = np.array([[0.0], [1.0]], np.float32)
        out = deep_feature_interpolate(x, source_rate=41.5, target_rate=83.0)
        np.testing.assert_allclose(out[:, 0], [0.0, 0.5, 1.0], atol=1e-6)

    def test_endpoints_always_preserved(self, rng):
        x = rng.standard_normal((7, 4)).astype(np.float32)
        out = deep_feature_interpolate(x, source_rate=41.5, target_rate=83.0)
        np.testing.assert_allclose(out[0], x[0], atol=1e-6)
        np.testing.assert_allclose(out[-1], x[-1], atol=1e-6)

    def test_output_frame_count(self):
        x = np.zeros((10, 2), np.float32)
        out = deep_feature_interpolate(x, source_rate=41.5, target_rate=83.0)
        assert out.shape == (int(np.rint(9 * 83.0 / 41.5)) + 1, 2)

    def test_single_frame_rejected(self):
        with pytest.raises(ShapeError):
            deep_feature_interpolate(np.zeros((1, 4), np.float32), 41.5, 83.0)

    def test_stub_client_rate_and_shape(self):
        wav = audio.Waveform(np.zeros(4800, np.float32), audio.SAMPLE_RATE)
        client = StubDeepFeatureClient(dim=64, seed=0)
        feats, rate = client.extract(wav)
        assert rate == pytest.approx(41.5)
        assert feats.shape[1] == 64
        # every 2nd mel frame of ceil(4800/240) = 20 -> 10 rows
        assert feats.shape[0] == 10
