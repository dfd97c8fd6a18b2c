"""Pitch-aware segment replacement and two classical whisper converters."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import butter, lfilter, sosfilt

from . import pitch
from .errors import EmptyInput, InvalidConfig
from .hn_model import decompose, synthesize_noise
from .lpc import autocorrelation, levinson_durbin
from .signal_core import FrameConfig, Waveform, apply_window, frame_signal, get_window, overlap_add, window_envelope

NOISE_SOURCES = ("resynth", "residual")


@dataclass(frozen=True)
class WhisperizeConfig:
    """Knobs for :func:`whisperize`.

    ``noise_source`` selects what replaces a pitched segment: ``"resynth"``
    renders the estimated noise filter on fresh noise, ``"residual"`` uses the
    decomposition residual directly.
    """

    frame: FrameConfig = field(default_factory=FrameConfig)
    f0_min: float = pitch.F0_MIN
    f0_max: float = pitch.F0_MAX
    voicing_threshold: float = pitch.VOICING_THRESHOLD
    min_voiced_frames: int = pitch.MIN_VOICED_FRAMES
    merge_gap_frames: int = pitch.MERGE_GAP_FRAMES
    crossfade_ms: float = 10.0
    noise_gain_match: bool = True
    noise_source: str = "resynth"
    seed: int = 0

    def __post_init__(self):
        if self.crossfade_ms < 0:
            raise InvalidConfig("crossfade_ms must be >= 0")
        if self.min_voiced_frames < 1 or self.merge_gap_frames < 0:
            raise InvalidConfig("min_voiced_frames must be >= 1 and merge_gap_frames >= 0")
        if self.noise_source not in NOISE_SOURCES:
            raise InvalidConfig(f"noise_source must be one of {NOISE_SOURCES}")

    def shortest_segment(self) -> int:
        """Length in samples of the shortest segment that can be replaced."""
        return (self.min_voiced_frames - 1) * self.frame.hop_length + self.frame.frame_length

    def crossfade_samples(self, sample_rate: int) -> int:
        n = int(round(self.crossfade_ms * sample_rate / 1000.0))
        if n > self.shortest_segment() // 2:
            raise InvalidConfig(
                f"crossfade of {n} samples exceeds half the shortest segment ({self.shortest_segment()} samples)"
            )
        return n


@dataclass
class WhisperizeResult:
    waveform: Waveform
    segments: list = field(default_factory=list)


def _rms(x) -> float:
    return float(np.sqrt(np.mean(np.square(x)))) if len(x) else 0.0


def _segment_mask(n: int, ramp: int, fade_in: bool, fade_out: bool) -> np.ndarray:
    """Gain of the replacement signal: sine ramps at the faded ends, 1 elsewhere."""
    mask = np.ones(n)
    if ramp <= 0:
        return mask
    # sqrt of the rising half of a hann window is a quarter-period sine;
    # the original fades with the matching cosine
    rise = np.sqrt(apply_window(np.ones(2 * ramp), "hann")[:ramp])
    if fade_in:
        mask[:ramp] = rise
    if fade_out:
        mask[n - ramp:] = rise[::-1]
    return mask


def whisperize_detailed(w: Waveform, cfg: WhisperizeConfig = WhisperizeConfig()) -> WhisperizeResult:
    if len(w) == 0:
        raise EmptyInput("whisperize of an empty waveform")
    sr = w.sample_rate
    ramp = cfg.crossfade_samples(sr)
    track = pitch.detect_f0(w, cfg.frame, cfg.f0_min, cfg.f0_max, cfg.voicing_threshold)
    segments = pitch.voiced_segments(track, cfg.min_voiced_frames, cfg.merge_gap_frames)
    if not segments:
        return WhisperizeResult(w, [])

    src = w.samples
    kept = src.copy()
    replaced = np.zeros_like(src)
    for idx, seg in enumerate(segments):
        a, b = seg.start_sample, seg.end_sample
        piece = w.with_samples(src[a:b])
        seg_track = pitch.detect_f0(piece, cfg.frame, cfg.f0_min, cfg.f0_max, cfg.voicing_threshold)
        dec = decompose(piece, seg_track, cfg.frame)
        if cfg.noise_source == "resynth":
            p = dec.params
            noise = synthesize_noise(
                p.noise_taps, cfg.frame, _sub_seed(cfg.seed, idx), len(piece), p.delay, sr
            ).samples
        else:
            noise = dec.noise.samples.copy()
        if cfg.noise_gain_match:
            target, actual = _rms(piece.samples), _rms(noise)
            if actual > 0:
                noise = noise * (target / actual)
        r = min(ramp, (b - a) // 2)
        gain = _segment_mask(b - a, r, fade_in=a > 0, fade_out=b < len(w))
        replaced[a:b] += noise * gain
        kept[a:b] *= np.sqrt(np.clip(1.0 - gain**2, 0.0, 1.0))
    out = kept + replaced
    return WhisperizeResult(w.with_samples(out), segments)


def whisperize(w: Waveform, cfg: WhisperizeConfig = WhisperizeConfig()) -> Waveform:
    """Replace every pitched segment of ``w`` by its noise component.

    Pitched segments are found with :func:`pitch.detect_f0` and
    :func:`pitch.voiced_segments`.  Each one is decomposed, its harmonic part
    is dropped, and the noise part (RMS-matched to the segment when
    ``noise_gain_match``) is equal-power crossfaded over the original.
    Samples outside the segments are untouched; without any segment the input
    is returned as is.
    """
    return whisperize_detailed(w, cfg).waveform


def _sub_seed(seed: int, index: int) -> list[int]:
    return [int(seed), int(index)]


def whisper_effect(w: Waveform, cutoff_hz: float = 800.0, noise_gain: float = 0.02, seed: int = 0) -> Waveform:
    """4th-order Butterworth high-pass plus seeded Gaussian white noise."""
    nyq = w.sample_rate / 2.0
    if not 0 < cutoff_hz < nyq:
        raise InvalidConfig(f"cutoff_hz must be in (0, {nyq}), got {cutoff_hz}")
    sos = butter(4, cutoff_hz, btype="highpass", fs=w.sample_rate, output="sos")
    y = sosfilt(sos, w.samples)
    if noise_gain:
        y = y + noise_gain * np.random.default_rng(seed).standard_normal(len(w))
    return w.with_samples(y)


def to_whisper_lpc(
    w: Waveform,
    order: int = 24,
    cfg: FrameConfig = FrameConfig(),
    seed: int = 0,
    preemphasis: float = 0.97,
    preroll: int = 512,
) -> Waveform:
    """Noise-excited LPC resynthesis.

    Per frame: hann-windowed autocorrelation LPC of the pre-emphasised input,
    white Gaussian excitation scaled to the frame's prediction-error power,
    all-pole filtering (with ``preroll`` warm-up samples discarded), then
    windowed overlap-add and de-emphasis.  Silent or unstable frames are
    silent.
    """
    if order < 2:
        raise InvalidConfig("LPC order must be >= 2")
    if cfg.frame_length <= 2 * order:
        raise InvalidConfig("frame_length must exceed twice the LPC order")
    n = len(w)
    if n == 0:
        return w
    x = lfilter([1.0, -preemphasis], [1.0], w.samples) if preemphasis else w.samples
    win = get_window(cfg.window, cfg.frame_length)
    frames = frame_signal(x, cfg, "constant") * win
    wsum = np.sum(win**2)
    out = np.zeros_like(frames)
    for i, frame in enumerate(frames):
        res = levinson_durbin(autocorrelation(frame, order), order)
        if res is None:
            continue
        a, err, _ = res
        if err <= 0:
            continue
        e = np.random.default_rng([seed, i]).standard_normal(cfg.frame_length + preroll)
        y = lfilter([1.0], a, e * np.sqrt(err / wsum))[preroll:]
        out[i] = y * win
    y = overlap_add(out, cfg.hop_length)
    env = np.sqrt(window_envelope(win**2, cfg.hop_length, len(frames)))
    nz = env > 1e-10
    y[nz] /= env[nz]
    y[~nz] = 0.0
    y = y[cfg.pad: cfg.pad + n]
    if preemphasis:
        y = lfilter([1.0], [1.0, -preemphasis], y)
    return w.with_samples(y)
