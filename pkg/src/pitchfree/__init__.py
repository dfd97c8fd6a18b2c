"""Pitch-free whispered speech conversion by harmonic-plus-noise decomposition."""

from .errors import (
    DuplicateRecord,
    EmptyInput,
    InvalidConfig,
    InvalidInput,
    IoError,
    ManifestError,
    PitchfreeError,
    TooFewSpeakers,
)
from .hn_model import (
    HnDecomposition,
    SynthesisParams,
    cumulative_phase,
    decompose,
    estimate_params,
    ltv_fir_filter,
    sawtooth_excitation,
    synthesize_noise,
)
from .metrics import MetricsReport, mcd, render_spectrogram, rms_profile
from .pitch import F0Track, PitchedSegment, detect_f0, voiced_segments, vtr
from .signal_core import (
    FrameConfig,
    MelSpectrogram,
    Spectrogram,
    Waveform,
    apply_window,
    istft,
    mel_spectrogram,
    overlap_add,
    stft,
)
from .whisperize import WhisperizeConfig, to_whisper_lpc, whisper_effect, whisperize

__version__ = "0.1.0"
