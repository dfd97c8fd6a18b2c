"""Objective, non-neural evaluation: MCD, RMS level profiles, spectrogram images."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, fields

import numpy as np
from scipy.fft import dct

from .errors import EmptyInput, InvalidInput, IoError
from .signal_core import FrameConfig, Waveform, mel_spectrogram, stft

MCD_N_MELS = 80
MCD_N_CEPS = 13
MCD_CONST = 10.0 * math.sqrt(2.0) / math.log(10.0)
DBFS_FLOOR = -100.0


def mel_cepstrum(w: Waveform, cfg: FrameConfig = FrameConfig(), n_ceps: int = MCD_N_CEPS, n_mels: int = MCD_N_MELS) -> np.ndarray:
    """Coefficients 1..n_ceps (c0 dropped) of the orthonormal DCT-II of the log-mel frames."""
    logmel = mel_spectrogram(w, cfg, n_mels).values
    return dct(logmel, type=2, norm="ortho", axis=1)[:, 1: n_ceps + 1]


def dtw(cost: np.ndarray):
    """Dynamic time warping over a local cost matrix.

    Steps (1,0), (0,1), (1,1), all with unit weight.  Returns the total path
    cost and the path as a list of ``(i, j)`` pairs from ``(0, 0)`` to the end.
    """
    n, m = cost.shape
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        row = cost[i - 1]
        prev = acc[i - 1]
        cur = acc[i]
        # the vertical/diagonal candidates are known up front; the horizontal
        # one depends on the cell just filled
        best = np.minimum(prev[1:], prev[:-1]) + row
        for j in range(1, m + 1):
            cur[j] = min(best[j - 1], cur[j - 1] + row[j - 1])
    path = []
    i, j = n, m
    while i > 0 and j > 0:
        path.append((i - 1, j - 1))
        steps = (acc[i - 1, j - 1], acc[i - 1, j], acc[i, j - 1])
        k = int(np.argmin(steps))
        if k == 0:
            i, j = i - 1, j - 1
        elif k == 1:
            i -= 1
        else:
            j -= 1
    path.reverse()
    return float(acc[n, m]), path


def mcd(reference: Waveform, hypothesis: Waveform, cfg: FrameConfig = FrameConfig()) -> float:
    """Mel cepstral distortion in dB after DTW alignment.

    ``(10 sqrt(2) / ln 10) * mean_{(i,j) in path} ||c_ref[i] - c_hyp[j]||``
    with 13 coefficients (c0 excluded) from 80-band log-mel frames.
    """
    if len(reference) == 0 or len(hypothesis) == 0:
        raise EmptyInput("mcd needs two non-empty waveforms")
    if reference.sample_rate != hypothesis.sample_rate:
        raise InvalidInput(
            f"sample rates differ: {reference.sample_rate} vs {hypothesis.sample_rate}"
        )
    a = mel_cepstrum(reference, cfg)
    b = mel_cepstrum(hypothesis, cfg)
    cost = np.sqrt(np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=-1))
    _, path = dtw(cost)
    ii, jj = np.array(path).T
    return MCD_CONST * float(np.mean(cost[ii, jj]))


def rms_profile(w: Waveform, window_ms: float = 50.0, hop_ms: float | None = None) -> np.ndarray:
    """Sliding RMS level in dBFS (full scale = 1.0), floored at -100 dBFS.

    Returns an ``(n, 2)`` array of ``(time_s, rms_dbfs)`` with times at window
    centres.  Windows lie entirely inside the signal; the hop defaults to half
    the window.  A signal shorter than one window yields a single value.
    """
    if window_ms <= 0:
        raise InvalidInput("window_ms must be positive")
    sr = w.sample_rate
    size = max(1, int(round(window_ms * sr / 1000.0)))
    hop = max(1, int(round((hop_ms if hop_ms is not None else window_ms / 2) * sr / 1000.0)))
    x = w.samples
    if len(x) == 0:
        return np.zeros((0, 2))
    if len(x) <= size:
        starts = np.array([0])
        size = len(x)
    else:
        starts = np.arange(0, len(x) - size + 1, hop)
    csum = np.concatenate([[0.0], np.cumsum(x * x)])
    power = np.maximum(csum[starts + size] - csum[starts], 0.0) / size
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(power)
    db = np.maximum(db, DBFS_FLOOR)
    times = (starts + size / 2.0) / sr
    return np.column_stack([times, db])


def spectrogram_image(w: Waveform, cfg: FrameConfig = FrameConfig(), dynamic_range_db: float = 80.0) -> np.ndarray:
    """8-bit image of the log-magnitude spectrogram; low frequencies on the bottom row."""
    mag = np.abs(stft(w, cfg).bins).T  # (bins, frames)
    db = 20.0 * np.log10(np.maximum(mag, 1e-10))
    top = db.max()
    scaled = (np.clip(db, top - dynamic_range_db, top) - (top - dynamic_range_db)) / dynamic_range_db
    if np.ptp(db) == 0:
        scaled = np.zeros_like(db)
    return np.flipud(np.round(scaled * 255.0).astype(np.uint8))


def render_spectrogram(w: Waveform, cfg: FrameConfig = FrameConfig(), path=None, dynamic_range_db: float = 80.0) -> np.ndarray:
    """Write :func:`spectrogram_image` as PNG or PGM (chosen by extension)."""
    from PIL import Image

    img = spectrogram_image(w, cfg, dynamic_range_db)
    if path is not None:
        fmt = "PPM" if str(path).lower().endswith((".pgm", ".pnm")) else None
        try:
            Image.fromarray(img, mode="L").save(path, format=fmt)
        except (OSError, ValueError) as exc:
            raise IoError(f"cannot write spectrogram to {path}: {exc}") from exc
    return img


# --- reports ---------------------------------------------------------------

PASS_THROUGH = ("dnsmos", "utmos", "cer_wer", "spksim")


@dataclass
class UtteranceMetrics:
    utterance_id: str
    split: str = ""
    duration_s: float = 0.0
    vtr: float | None = None
    mcd_db: float | None = None
    rms_dbfs_mean: float | None = None
    dnsmos: float | None = None
    utmos: float | None = None
    cer_wer: float | None = None
    spksim: float | None = None

    def __post_init__(self):
        if self.vtr is not None and not 0.0 <= self.vtr <= 1.0:
            raise InvalidInput(f"vtr out of range: {self.vtr}")
        if self.mcd_db is not None and self.mcd_db < 0:
            raise InvalidInput(f"negative MCD: {self.mcd_db}")


CSV_HEADER = tuple(f.name for f in fields(UtteranceMetrics))
_NUMERIC = CSV_HEADER[2:]


@dataclass
class MetricsReport:
    records: list[UtteranceMetrics] = field(default_factory=list)

    def add(self, rec: UtteranceMetrics) -> None:
        self.records.append(rec)

    def aggregate(self, duration_weighted: bool = False) -> dict[str, dict[str, float]]:
        """Per-split mean of every numeric column (missing values skipped).

        Records with an empty split are grouped under ``"all"`` only; the
        ``"all"`` group always covers every record.
        """
        groups: dict[str, list[UtteranceMetrics]] = {"all": list(self.records)}
        for r in self.records:
            if r.split:
                groups.setdefault(r.split, []).append(r)
        out = {}
        for name, recs in groups.items():
            row = {"count": float(len(recs))}
            for col in _NUMERIC:
                if col == "duration_s":
                    row[col] = float(np.mean([r.duration_s for r in recs])) if recs else 0.0
                    continue
                vals = [(getattr(r, col), r.duration_s) for r in recs if getattr(r, col) is not None]
                if not vals:
                    row[col] = float("nan")
                elif duration_weighted:
                    v, wts = np.array(vals).T
                    row[col] = float(np.sum(v * wts) / np.sum(wts)) if np.sum(wts) > 0 else float("nan")
                else:
                    row[col] = float(np.mean([v for v, _ in vals]))
            out[name] = row
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for r in self.records:
                writer.writerow([_fmt(getattr(r, c)) for c in CSV_HEADER])

    @classmethod
    def read_csv(cls, path) -> "MetricsReport":
        report = cls()
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                kwargs = {"utterance_id": row["utterance_id"], "split": row.get("split", "")}
                for c in _NUMERIC:
                    val = row.get(c, "")
                    kwargs[c] = float(val) if val not in ("", None) else None
                kwargs["duration_s"] = kwargs["duration_s"] or 0.0
                report.add(UtteranceMetrics(**kwargs))
        return report

    def import_columns(self, path) -> None:
        """Fill pass-through columns (neural metrics computed elsewhere) from a CSV keyed by ``utterance_id``."""
        with open(path, newline="") as fh:
            rows = {row["utterance_id"]: row for row in csv.DictReader(fh)}
        for r in self.records:
            row = rows.get(r.utterance_id)
            if row is None:
                continue
            for c in PASS_THROUGH:
                if row.get(c) not in (None, ""):
                    setattr(r, c, float(row[c]))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)
