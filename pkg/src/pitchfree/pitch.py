"""F0 tracking, voiced-segment extraction and the voiced time ratio."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, InvalidConfig
from .signal_core import FrameConfig, Waveform, frame_signal

F0_MIN = 60.0
F0_MAX = 500.0
VOICING_THRESHOLD = 0.15
MIN_VOICED_FRAMES = 3
MERGE_GAP_FRAMES = 2


@dataclass(frozen=True, eq=False)
class F0Track:
    f0_hz: np.ndarray
    voiced: np.ndarray
    periodicity: np.ndarray
    config: FrameConfig
    sample_rate: int
    n_samples: int

    def __len__(self):
        return self.f0_hz.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.config.frame_centers(len(self)) / self.sample_rate

    @classmethod
    def from_f0(cls, f0_hz, cfg: FrameConfig, sample_rate: int, n_samples: int) -> "F0Track":
        """Build a track from known per-frame F0 values (0 = unvoiced)."""
        f0 = np.asarray(f0_hz, dtype=np.float64)
        voiced = f0 > 0
        return cls(np.where(voiced, f0, 0.0), voiced, voiced.astype(np.float64), cfg, sample_rate, n_samples)


@dataclass(frozen=True)
class PitchedSegment:
    start_sample: int
    end_sample: int  # exclusive
    mean_f0: float
    start_frame: int = 0
    end_frame: int = 0  # exclusive

    def __len__(self):
        return self.end_sample - self.start_sample


def cmnd(frames: np.ndarray, max_lag: int) -> np.ndarray:
    """Cumulative-mean-normalised difference for lags ``0..max_lag`` of each frame.

    The integration window is ``frame_length - max_lag`` samples.  Rows that
    are identically zero come back as all ones.
    """
    n_frames, flen = frames.shape
    win = flen - max_lag
    nfft = 1 << int(np.ceil(np.log2(flen + win)))
    head = np.fft.rfft(frames[:, :win], nfft)
    full = np.fft.rfft(frames, nfft)
    r = np.fft.irfft(np.conj(head) * full, nfft)[:, : max_lag + 1]

    sq = np.concatenate([np.zeros((n_frames, 1)), np.cumsum(frames**2, axis=1)], axis=1)
    lags = np.arange(max_lag + 1)
    energy0 = sq[:, win][:, None]
    energy_lag = sq[:, lags + win] - sq[:, lags]
    d = np.maximum(energy0 + energy_lag - 2.0 * r, 0.0)

    out = np.ones_like(d)
    running = np.cumsum(d[:, 1:], axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[:, 1:] = np.where(running > 0, d[:, 1:] * lags[1:] / running, 1.0)
    return out


def detect_f0(
    w: Waveform,
    cfg: FrameConfig = FrameConfig(),
    f0_min: float = F0_MIN,
    f0_max: float = F0_MAX,
    threshold: float = VOICING_THRESHOLD,
) -> F0Track:
    """YIN-style F0 estimate on the shared frame grid.

    A frame is voiced when the normalised difference dips below ``threshold``
    somewhere in the lag range of ``[f0_min, f0_max]``; the lag is the first
    such local minimum, refined by parabolic interpolation.
    """
    if len(w) == 0:
        raise EmptyInput("detect_f0 of an empty waveform")
    sr = w.sample_rate
    if sr < 2 * f0_max:
        raise InvalidConfig(f"sample rate {sr} Hz is too low for f0_max={f0_max} Hz")
    if not 0 < f0_min < f0_max:
        raise InvalidConfig("need 0 < f0_min < f0_max")
    min_lag = max(2, int(np.floor(sr / f0_max)))
    max_lag = int(np.ceil(sr / f0_min))
    if cfg.frame_length <= 2 * max_lag:
        raise InvalidConfig(
            f"frame_length {cfg.frame_length} too short for f0_min={f0_min} Hz at {sr} Hz"
        )

    frames = frame_signal(w.samples, cfg, "reflect")
    n_frames = frames.shape[0]
    silent = ~np.any(frames, axis=1)
    d = cmnd(frames, max_lag + 1)

    f0 = np.zeros(n_frames)
    voiced = np.zeros(n_frames, dtype=bool)
    periodicity = np.zeros(n_frames)
    for i in range(n_frames):
        if silent[i]:
            continue
        row = d[i]
        band = row[min_lag: max_lag + 1]
        below = np.flatnonzero(band < threshold)
        if below.size == 0:
            periodicity[i] = np.clip(1.0 - band.min(), 0.0, 1.0)
            continue
        tau = min_lag + below[0]
        while tau + 1 <= max_lag and row[tau + 1] < row[tau]:
            tau += 1
        periodicity[i] = np.clip(1.0 - row[tau], 0.0, 1.0)
        a, b, c = row[tau - 1], row[tau], row[tau + 1]
        denom = a - 2.0 * b + c
        shift = 0.5 * (a - c) / denom if denom > 0 else 0.0
        freq = sr / (tau + float(np.clip(shift, -0.5, 0.5)))
        if f0_min <= freq <= f0_max:
            f0[i] = freq
            voiced[i] = True
    return F0Track(f0, voiced, periodicity, cfg, sr, len(w))


def voiced_segments(
    t: F0Track,
    min_voiced_frames: int = MIN_VOICED_FRAMES,
    merge_gap_frames: int = MERGE_GAP_FRAMES,
) -> list[PitchedSegment]:
    """Runs of voiced frames as sample ranges.

    Runs separated by at most ``merge_gap_frames`` unvoiced frames are merged
    first; merged runs spanning fewer than ``min_voiced_frames`` frames are
    dropped.  A run covering frames ``a..b`` maps to samples
    ``[a*hop - frame/2, b*hop + frame/2)`` clipped to the signal.
    """
    v = np.asarray(t.voiced, dtype=bool)
    if not v.any():
        return []
    edges = np.diff(np.concatenate([[0], v.astype(np.int8), [0]]))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)  # exclusive

    runs = [[starts[0], ends[0]]]
    for s, e in zip(starts[1:], ends[1:]):
        if s - runs[-1][1] <= merge_gap_frames:
            runs[-1][1] = e
        else:
            runs.append([s, e])

    hop, half = t.config.hop_length, t.config.frame_length // 2
    segments = []
    for s, e in runs:
        if e - s < min_voiced_frames:
            continue
        start = max(0, s * hop - half)
        if segments:
            start = max(start, segments[-1].end_sample)
        end = min(t.n_samples, (e - 1) * hop + half)
        if end <= start:
            continue
        sel = v[s:e]
        segments.append(PitchedSegment(int(start), int(end), float(t.f0_hz[s:e][sel].mean()), int(s), int(e)))
    return segments


def vtr(t: F0Track) -> float:
    """Fraction of frames classified voiced."""
    if len(t) == 0:
        raise EmptyInput("vtr of an empty track")
    return float(np.count_nonzero(t.voiced)) / len(t)


def write_f0_track(t: F0Track, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame_index", "time_seconds", "f0_hz", "voiced", "periodicity"])
        for i, (time, f0, v, p) in enumerate(zip(t.times, t.f0_hz, t.voiced, t.periodicity)):
            writer.writerow([i, f"{time:.6f}", f"{f0:.4f}", int(v), f"{p:.6f}"])
