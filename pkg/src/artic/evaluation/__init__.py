from .asr import (
    AsrClient,
    HttpAsrClient,
    StubAsrClient,
    SubprocessAsrClient,
    make_asr_client,
    transcribe,
)
from .cer import cer, edit_distance, normalize_text
from .mcd import (
    MCD_ALPHA,
    MCD_ORDER,
    MCD_SCALE,
    CerResult,
    McdResult,
    dtw_path,
    freqt,
    mcd,
    mcd_from_cepstra,
    mel_cepstra,
    summarize,
)
from .timing import TimingReport, TimingResult, benchmark, benchmark_inference

__all__ = [
    "AsrClient",
    "HttpAsrClient",
    "StubAsrClient",
    "SubprocessAsrClient",
    "make_asr_client",
    "transcribe",
    "cer",
    "edit_distance",
    "normalize_text",
    "MCD_ALPHA",
    "MCD_ORDER",
    "MCD_SCALE",
    "CerResult",
    "McdResult",
    "dtw_path",
    "freqt",
    "mcd",
    "mcd_from_cepstra",
    "mel_cepstra",
    "summarize",
    "TimingReport",
    "TimingResult",
    "benchmark",
    "benchmark_inference",
]
