from .cbl import CblConfig, CblModel, full_cbl_config, toy_cbl_config
from .checkpoint import (
    InitReport,
    init_from_pretrained,
    load_checkpoint,
    save_checkpoint,
    save_model,
)
from .deepfeat import (
    DeepFeatureClient,
    StubDeepFeatureClient,
    SubprocessDeepFeatureClient,
    deep_feature_interpolate,
)
from .discriminators import (
    DiscriminatorConfig,
    MultiPeriodDiscriminator,
    MultiScaleDiscriminator,
    toy_discriminator_config,
)
from .generator import (
    GeneratorConfig,
    HifiCarGenerator,
    count_params,
    full_generator_config,
    synthesize_utterance,
    toy_generator_config,
)
from .training import (
    LossLog,
    TorchMel,
    TrainConfig,
    TrainState,
    load_generator,
    make_train_state,
    save_train_checkpoint,
    train_cbl,
    train_gan,
)

__all__ = [
    "CblConfig",
    "CblModel",
    "full_cbl_config",
    "toy_cbl_config",
    "InitReport",
    "init_from_pretrained",
    "load_checkpoint",
    "save_checkpoint",
    "save_model",
    "DeepFeatureClient",
    "StubDeepFeatureClient",
    "SubprocessDeepFeatureClient",
    "deep_feature_interpolate",
    "DiscriminatorConfig",
    "MultiPeriodDiscriminator",
    "MultiScaleDiscriminator",
    "toy_discriminator_config",
    "GeneratorConfig",
    "HifiCarGenerator",
    "count_params",
    "full_generator_config",
    "synthesize_utterance",
    "toy_generator_config",
    "LossLog",
    "TorchMel",
    "TrainConfig",
    "TrainState",
    "load_generator",
    "make_train_state",
    "save_train_checkpoint",
    "train_cbl",
    "train_gan",
]
