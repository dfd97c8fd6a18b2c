"""Frame-level primitives: windows, STFT/ISTFT, mel projection and overlap-add.

Every framed operation in the package uses the same grid: the signal is padded
by ``frame_length // 2`` on both sides so that frame ``i`` is centred on sample
``i * hop_length``.  A signal of ``n`` samples therefore has
``1 + n // hop_length`` frames.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import EmptyInput, InvalidConfig, InvalidInput

WINDOWS = ("hann", "rectangular")

#: magnitudes are clamped here before taking logs
LOG_FLOOR = 1e-10


@dataclass(frozen=True, eq=False)
class Waveform:
    """Mono sample buffer.

    Samples are stored as a read-only float64 array.  They are nominally in
    [-1, 1] but this is not enforced (a raw sawtooth excitation peaks near
    1.85); writers clip on export.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        x = np.array(self.samples, dtype=np.float64, copy=True).reshape(-1)
        if not np.all(np.isfinite(x)):
            raise InvalidInput("waveform contains NaN or Inf")
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise InvalidInput(f"sample_rate must be a positive integer, got {self.sample_rate}")
        x.flags.writeable = False
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    def with_samples(self, samples) -> "Waveform":
        return Waveform(samples, self.sample_rate)

    def __eq__(self, other):
        if not isinstance(other, Waveform):
            return NotImplemented
        return self.sample_rate == other.sample_rate and np.array_equal(self.samples, other.samples)

    __hash__ = None


@dataclass(frozen=True)
class FrameConfig:
    frame_length: int = 1280
    hop_length: int = 320
    window: str = "hann"

    def __post_init__(self):
        if self.frame_length <= 0 or self.hop_length <= 0:
            raise InvalidConfig("frame_length and hop_length must be positive")
        if self.hop_length > self.frame_length:
            raise InvalidConfig(
                f"hop_length ({self.hop_length}) exceeds frame_length ({self.frame_length})"
            )
        if self.window not in WINDOWS:
            raise InvalidConfig(f"unknown window {self.window!r}; expected one of {WINDOWS}")

    @property
    def n_bins(self) -> int:
        return self.frame_length // 2 + 1

    @property
    def pad(self) -> int:
        return self.frame_length // 2

    def n_frames(self, n_samples: int) -> int:
        return 1 + n_samples // self.hop_length

    def frame_centers(self, n_frames: int) -> np.ndarray:
        return np.arange(n_frames) * self.hop_length


@dataclass(frozen=True, eq=False)
class Spectrogram:
    bins: np.ndarray  # (frames, frame_length // 2 + 1), complex
    config: FrameConfig
    sample_rate: int
    n_samples: int | None = None

    @property
    def n_frames(self) -> int:
        return self.bins.shape[0]

    @property
    def frequencies(self) -> np.ndarray:
        return np.fft.rfftfreq(self.config.frame_length, d=1.0 / self.sample_rate)

    @property
    def times(self) -> np.ndarray:
        return self.config.frame_centers(self.n_frames) / self.sample_rate


@dataclass(frozen=True, eq=False)
class MelSpectrogram:
    values: np.ndarray  # (frames, n_mels), natural-log magnitude
    n_mels: int
    config: FrameConfig
    sample_rate: int = 0


def get_window(window: str, n: int) -> np.ndarray:
    """Periodic hann (``0.5 - 0.5 cos(2 pi k / n)``) or an all-ones window."""
    if window == "hann":
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)
    if window == "rectangular":
        return np.ones(n)
    raise InvalidConfig(f"unknown window {window!r}")


def apply_window(frame, window: str = "hann") -> np.ndarray:
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 1 or frame.size == 0:
        raise InvalidInput("apply_window expects a non-empty 1-D frame")
    return frame * get_window(window, frame.size)


def frame_signal(x, cfg: FrameConfig, pad_mode: str = "reflect") -> np.ndarray:
    """Centre-padded, un-windowed frames of ``x``, shape ``(n_frames, frame_length)``.

    ``pad_mode`` is ``"reflect"`` (analysis) or ``"constant"`` (zeros; used by
    the filtering and synthesis paths).  Reflection of very short signals
    degrades to edge replication.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    p = cfg.pad
    if pad_mode == "reflect" and n < 2:
        pad_mode = "edge"
    xp = np.pad(x, p, mode=pad_mode)
    n_frames = cfg.n_frames(n)
    view = sliding_window_view(xp, cfg.frame_length)[:: cfg.hop_length]
    return np.array(view[:n_frames])


def window_envelope(window: np.ndarray, hop: int, n_frames: int) -> np.ndarray:
    """Sum of ``window`` placed at every hop offset (length of the OLA output)."""
    return overlap_add(np.broadcast_to(window, (n_frames, window.size)), hop)


def is_cola(window: str, frame_length: int, hop: int, tol: float = 1e-10) -> bool:
    w = get_window(window, frame_length)
    # the envelope is hop-periodic; inspect one period in steady state
    reps = -(-frame_length // hop) + 1
    env = window_envelope(w, hop, 2 * reps + 1)
    mid = env[reps * hop: (reps + 1) * hop]
    return float(np.ptp(mid)) <= tol * float(np.max(np.abs(mid)))


def overlap_add(frames, hop: int) -> np.ndarray:
    """Sum equal-length frames at multiples of ``hop``.

    Output length is ``(n_frames - 1) * hop + frame_length``.
    """
    if hop <= 0:
        raise InvalidInput("hop must be positive")
    if isinstance(frames, np.ndarray):
        arr = frames
        if arr.ndim != 2:
            raise InvalidInput("frames must be a 2-D array or a sequence of 1-D frames")
    else:
        frames = [np.asarray(f, dtype=np.float64) for f in frames]
        if not frames:
            return np.zeros(0)
        lengths = {f.shape for f in frames}
        if len(lengths) != 1 or frames[0].ndim != 1:
            raise InvalidInput(f"ragged frame lengths: {sorted(f.shape[0] for f in frames)}")
        arr = np.stack(frames)
    n_frames, flen = arr.shape
    if n_frames == 0:
        return np.zeros(0)
    out = np.zeros((n_frames - 1) * hop + flen, dtype=np.result_type(arr.dtype, np.float64))
    for i in range(n_frames):
        out[i * hop: i * hop + flen] += arr[i]
    return out


def stft(w: Waveform, cfg: FrameConfig = FrameConfig()) -> Spectrogram:
    """Windowed, centre-padded, unnormalised short-time Fourier transform."""
    if len(w) == 0:
        raise EmptyInput("stft of an empty waveform")
    frames = frame_signal(w.samples, cfg, "reflect") * get_window(cfg.window, cfg.frame_length)
    bins = np.fft.rfft(frames, axis=-1)
    return Spectrogram(bins, cfg, w.sample_rate, len(w))


def istft(s: Spectrogram, length: int | None = None) -> Waveform:
    """Inverse of :func:`stft` for window/hop pairs satisfying constant overlap-add."""
    cfg = s.config
    if s.bins.ndim != 2 or s.bins.shape[1] != cfg.n_bins:
        raise InvalidInput(f"expected (frames, {cfg.n_bins}) bins, got {s.bins.shape}")
    if not is_cola(cfg.window, cfg.frame_length, cfg.hop_length):
        raise InvalidConfig(
            f"{cfg.window} window with frame {cfg.frame_length} / hop {cfg.hop_length} is not COLA"
        )
    if length is None:
        length = s.n_samples if s.n_samples is not None else (s.n_frames - 1) * cfg.hop_length
    frames = np.fft.irfft(s.bins, n=cfg.frame_length, axis=-1)
    y = overlap_add(frames, cfg.hop_length)
    env = window_envelope(get_window(cfg.window, cfg.frame_length), cfg.hop_length, s.n_frames)
    nz = env > 1e-10
    y[nz] /= env[nz]
    y[~nz] = 0.0
    y = y[cfg.pad: cfg.pad + length]
    if y.shape[0] < length:
        y = np.pad(y, (0, length - y.shape[0]))
    return Waveform(y, s.sample_rate)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_band_edges(n_mels: int, sample_rate: int) -> np.ndarray:
    """``n_mels + 2`` frequencies (Hz), equally spaced in mel from 0 to Nyquist."""
    return mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate / 2.0), n_mels + 2))


def mel_filterbank(n_mels: int, frame_length: int, sample_rate: int) -> np.ndarray:
    """Area-normalised triangular filters, shape ``(n_mels, frame_length // 2 + 1)``.

    Band ``m`` rises linearly from ``edges[m]`` to ``edges[m + 1]`` and falls to
    ``edges[m + 2]``; it is scaled by ``2 / (edges[m + 2] - edges[m])``.
    """
    n_bins = frame_length // 2 + 1
    if n_mels < 1:
        raise InvalidConfig("n_mels must be >= 1")
    if n_mels > n_bins:
        raise InvalidConfig(f"n_mels ({n_mels}) exceeds the number of frequency bins ({n_bins})")
    freqs = np.fft.rfftfreq(frame_length, d=1.0 / sample_rate)
    edges = mel_band_edges(n_mels, sample_rate)
    lo, mid, hi = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (freqs - lo) / (mid - lo)
    falling = (hi - freqs) / (hi - mid)
    fb = np.maximum(0.0, np.minimum(rising, falling))
    fb *= 2.0 / (hi - lo)
    return fb


def mel_spectrogram(w: Waveform, cfg: FrameConfig = FrameConfig(), n_mels: int = 80) -> MelSpectrogram:
    """Natural-log mel-band magnitudes, clamped at :data:`LOG_FLOOR`."""
    if len(w) == 0:
        raise EmptyInput("mel_spectrogram of an empty waveform")
    fb = mel_filterbank(n_mels, cfg.frame_length, w.sample_rate)
    mag = np.abs(stft(w, cfg).bins)
    mel = mag @ fb.T
    return MelSpectrogram(np.log(np.maximum(mel, LOG_FLOOR)), n_mels, cfg, w.sample_rate)
