"""Harmonic-plus-noise decomposition and subtractive synthesis.

The harmonic branch is a band-limited sawtooth ``sum_k sin(phi_k) / k`` shaped
per frame by an FIR filter; the noise branch is per-frame uniform noise shaped
by a second FIR filter.  Filters are estimated deterministically from the
signal (see :func:`estimate_params`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve1d
from scipy.signal import fftconvolve

from .errors import InvalidInput
from .pitch import F0Track
from .signal_core import FrameConfig, Waveform, frame_signal, get_window, overlap_add, window_envelope

NYQUIST_MARGIN_HZ = 100.0
MAX_HARMONICS = 128
N_TAPS = 256
LIFTER_ORDER = 40
NOISE_VARIANCE = 1.0 / 3.0  # uniform on [-1, 1]



@dataclass(frozen=True, eq=False)
class SynthesisParams:
    """Per-frame synthesis controls.

    ``delay`` is the index of the zero-phase centre of every tap vector; the
    filtering code advances the output by this many samples.
    """

    f0_per_frame: np.ndarray
    harmonic_taps: np.ndarray  # (frames, L_h)
    noise_taps: np.ndarray  # (frames, L_n)
    config: FrameConfig
    sample_rate: int
    delay: int = N_TAPS // 2

    def __post_init__(self):
        n = len(self.f0_per_frame)
        if self.harmonic_taps.shape[0] != n or self.noise_taps.shape[0] != n:
            raise InvalidInput("f0, harmonic taps and noise taps must have equal frame counts")
        if not (np.all(np.isfinite(self.harmonic_taps)) and np.all(np.isfinite(self.noise_taps))):
            raise InvalidInput("non-finite filter taps")

    @property
    def n_frames(self) -> int:
        return len(self.f0_per_frame)


@dataclass(frozen=True, eq=False)
class HnDecomposition:
    harmonic: Waveform
    noise: Waveform
    source: Waveform
    params: SynthesisParams | None = None


def cumulative_phase(f0_per_sample, k: int = 1, sample_rate: int = 24000, initial_phase: float = 0.0) -> np.ndarray:
    """Unwrapped phase of harmonic ``k``: ``phi[i] = phi0 + 2 pi k sum_{n<i} f0[n] / sr``.

    The running sum is accumulated in extended precision so that harmonics of a
    long constant tone stay phase-exact to ~1e-11 rad.
    """
    if k < 1:
        raise InvalidInput("harmonic index k must be >= 1")
    cycles = _cycles(f0_per_sample, sample_rate)
    return (2.0 * np.pi * (k * cycles)).astype(np.float64) + initial_phase


def _cycles(f0_per_sample, sample_rate) -> np.ndarray:
    f0 = np.asarray(f0_per_sample, dtype=np.longdouble)
    if np.any(f0 < 0):
        raise InvalidInput("f0 values must be >= 0")
    out = np.zeros(f0.shape[0], dtype=np.longdouble)
    if f0.shape[0] > 1:
        out[1:] = np.cumsum(f0[:-1] / np.longdouble(sample_rate))
    return out


def sawtooth_excitation(
    f0_per_sample,
    sample_rate: int,
    max_harmonics: int | None = None,
    initial_phase_seed: int | None = None,
) -> Waveform:
    """Band-limited sawtooth ``sum_k sin(phi_k[i]) / k``.

    At each sample, harmonic ``k`` is included only while
    ``k * f0 < sr/2 - NYQUIST_MARGIN_HZ`` and ``k <= max_harmonics`` (default
    :data:`MAX_HARMONICS`).  Samples with ``f0 == 0`` are silent.
    """
    f0 = np.asarray(f0_per_sample, dtype=np.float64)
    if not np.all(np.isfinite(f0)):
        raise InvalidInput("f0 must be finite")
    cap = MAX_HARMONICS if max_harmonics is None else int(max_harmonics)
    out = np.zeros(f0.shape[0])
    voiced = f0 > 0
    if not voiced.any() or cap < 1:
        return Waveform(out, sample_rate)

    limit = sample_rate / 2.0 - NYQUIST_MARGIN_HZ
    k_max = min(cap, int(np.floor(limit / f0[voiced].min())))
    cycles = _cycles(f0, sample_rate)
    phase0 = np.zeros(k_max + 1)
    if initial_phase_seed is not None:
        phase0[1:] = np.random.default_rng(initial_phase_seed).uniform(0.0, 2.0 * np.pi, k_max)
    for k in range(1, k_max + 1):
        active = voiced & (k * f0 < limit)
        if not active.any():
            break
        frac = np.mod(k * cycles[active], 1).astype(np.float64)
        out[active] += np.sin(2.0 * np.pi * frac + phase0[k]) / k
    return Waveform(out, sample_rate)


def upsample_f0(f0_per_frame, cfg: FrameConfig, n_samples: int) -> np.ndarray:
    """Linear interpolation between frame centres, held beyond the end frames."""
    f0 = np.asarray(f0_per_frame, dtype=np.float64)
    centers = cfg.frame_centers(f0.shape[0])
    return np.interp(np.arange(n_samples), centers, f0)


def _check_taps(taps, n_frames: int, what: str) -> np.ndarray:
    taps = np.asarray(taps, dtype=np.float64)
    if taps.ndim == 1:
        taps = np.broadcast_to(taps, (n_frames, taps.shape[0]))
    if taps.ndim != 2 or taps.shape[0] != n_frames:
        raise InvalidInput(f"{what}: expected {n_frames} tap vectors, got shape {taps.shape}")
    return taps


def ltv_fir_filter(excitation: Waveform, taps_per_frame, cfg: FrameConfig = FrameConfig(), delay: int = 0) -> Waveform:
    """Linear time-varying FIR filtering by windowed overlap-add.

    Each frame of the zero-padded excitation is windowed, convolved with its
    own tap vector, cut back to ``frame_length`` samples starting at ``delay``,
    windowed again and overlap-added; dividing by the summed squared window
    makes identity taps (a unit impulse at ``delay``) reproduce the input.
    """
    n = len(excitation)
    n_frames = cfg.n_frames(n)
    taps = _check_taps(taps_per_frame, n_frames, "ltv_fir_filter")
    win = get_window(cfg.window, cfg.frame_length)
    frames = frame_signal(excitation.samples, cfg, "constant") * win
    if taps.shape[1] == 0 or not np.any(taps):
        return Waveform(np.zeros(n), excitation.sample_rate)
    full = fftconvolve(frames, taps, mode="full", axes=1)
    out_frames = full[:, delay: delay + cfg.frame_length]
    if out_frames.shape[1] < cfg.frame_length:
        out_frames = np.pad(out_frames, ((0, 0), (0, cfg.frame_length - out_frames.shape[1])))
    y = overlap_add(out_frames * win, cfg.hop_length)
    env = window_envelope(win**2, cfg.hop_length, n_frames)
    nz = env > 1e-10
    y[nz] /= env[nz]
    y[~nz] = 0.0
    return Waveform(y[cfg.pad: cfg.pad + n], excitation.sample_rate)


def frame_noise(seed: int, frame_index: int, length: int) -> np.ndarray:
    """Uniform [-1, 1) noise for one frame; depends only on ``(seed, frame_index)``."""
    return np.random.default_rng([seed, frame_index]).uniform(-1.0, 1.0, length)


def synthesize_noise(
    noise_taps,
    cfg: FrameConfig = FrameConfig(),
    seed: int = 0,
    n_samples: int | None = None,
    delay: int = 0,
    sample_rate: int = 24000,
) -> Waveform:
    """Filtered-noise branch.

    Frame ``i`` draws fresh uniform noise (see :func:`frame_noise`), convolves
    it with ``noise_taps[i]``, keeps ``frame_length`` samples from ``delay``,
    applies the synthesis window and is overlap-added.  Frames are
    independent, so the sum is normalised by the square root of the summed
    squared window, which keeps the output variance equal to the filtered
    noise variance.
    """
    taps = np.asarray(noise_taps, dtype=np.float64)
    if taps.ndim != 2:
        raise InvalidInput("noise_taps must be a (frames, taps) array")
    n_frames = taps.shape[0]
    if n_samples is None:
        n_samples = (n_frames - 1) * cfg.hop_length
    if cfg.n_frames(n_samples) != n_frames:
        raise InvalidInput(f"{n_frames} tap vectors do not match {n_samples} samples")
    flen = cfg.frame_length
    win = get_window(cfg.window, flen)
    out_frames = np.zeros((n_frames, flen))
    for i in range(n_frames):
        if not np.any(taps[i]):
            continue
        zeta = frame_noise(seed, i, flen)
        y = fftconvolve(zeta, taps[i])[delay: delay + flen]
        out_frames[i, : y.shape[0]] = y
    y = overlap_add(out_frames * win, cfg.hop_length)
    env = np.sqrt(window_envelope(win**2, cfg.hop_length, n_frames))
    nz = env > 1e-10
    y[nz] /= env[nz]
    y[~nz] = 0.0
    return Waveform(y[cfg.pad: cfg.pad + n_samples], sample_rate)


def lifter(log_mag: np.ndarray, order: int) -> np.ndarray:
    """Cepstral smoothing along the last axis: keep quefrencies ``|q| <= order``."""
    n_bins = log_mag.shape[-1]
    nfft = 2 * (n_bins - 1)
    ceps = np.fft.irfft(log_mag, nfft, axis=-1)
    if order + 1 < nfft - order:
        ceps[..., order + 1: nfft - order] = 0.0
    return np.fft.rfft(ceps, axis=-1).real


def design_fir(magnitude: np.ndarray, n_taps: int = N_TAPS) -> np.ndarray:
    """Linear-phase FIR by frequency sampling.

    ``magnitude`` holds desired gains on a uniform grid from 0 to Nyquist
    (any length); rows are resampled to the ``n_taps`` grid.  The taps are
    symmetric about index ``n_taps // 2`` (tap 0 is always zero) and tapered
    by a hann window.
    """
    magnitude = np.atleast_2d(magnitude)
    src = np.linspace(0.0, 1.0, magnitude.shape[-1])
    dst = np.linspace(0.0, 1.0, n_taps // 2 + 1)
    grid = np.stack([np.interp(dst, src, row) for row in magnitude])
    h = np.fft.irfft(grid, n_taps, axis=-1)
    h = np.roll(h, n_taps // 2, axis=-1)
    return h * get_window("hann", n_taps)


def _harmonic_log_ratio(x_spec, e_spec, f0, freqs, k_max):
    """Log of |source| / |excitation| at the harmonic bins, interpolated over all bins."""
    bin_hz = freqs[1]
    hk = np.arange(1, k_max + 1) * f0
    bins = np.rint(hk / bin_hz).astype(int)
    bins = bins[(bins > 0) & (bins < freqs.shape[0])]
    if bins.size == 0:
        return None
    e = np.abs(e_spec[bins])
    ok = e > 1e-8 * max(e.max(), 1e-300)
    bins = bins[ok]
    if bins.size == 0:
        return None
    ratio = np.log(np.maximum(np.abs(x_spec[bins]), 1e-10) / np.abs(e_spec[bins]))
    return np.interp(np.arange(freqs.shape[0]), bins, ratio)


def _smoothed_power(spec: np.ndarray, lifter_order: int) -> np.ndarray:
    """Power spectrum averaged over about one lifter resolution cell.

    A residual that still holds harmonics is a line spectrum whose log has
    deep valleys between the lines; averaging power first keeps the envelope
    at the residual's actual level.
    """
    n_fft = 2 * (spec.shape[-1] - 1)
    width = max(3, n_fft // max(lifter_order, 1))
    kernel = np.hanning(width + 2)[1:-1]
    return convolve1d(np.abs(spec) ** 2, kernel / kernel.sum(), axis=-1, mode="reflect")


def _estimate(w: Waveform, t: F0Track, cfg: FrameConfig, n_taps: int, lifter_order: int):
    n = len(w)
    sr = w.sample_rate
    n_frames = cfg.n_frames(n)
    if len(t) != n_frames or t.sample_rate != sr or t.config.hop_length != cfg.hop_length:
        raise InvalidInput(
            f"F0 track ({len(t)} frames @ {t.sample_rate} Hz) is not aligned with "
            f"{n} samples @ {sr} Hz under hop {cfg.hop_length}"
        )
    f0 = np.where(t.voiced, t.f0_hz, 0.0)
    win = get_window(cfg.window, cfg.frame_length)
    freqs = np.fft.rfftfreq(cfg.frame_length, 1.0 / sr)

    exc = sawtooth_excitation(upsample_f0(f0, cfg, n), sr)
    x_spec = np.fft.rfft(frame_signal(w.samples, cfg, "constant") * win, axis=-1)
    e_spec = np.fft.rfft(frame_signal(exc.samples, cfg, "constant") * win, axis=-1)

    limit = sr / 2.0 - NYQUIST_MARGIN_HZ
    h_taps = np.zeros((n_frames, n_taps))
    for i in np.flatnonzero(f0 > 0):
        k_max = min(MAX_HARMONICS, int(limit // f0[i]))
        curve = _harmonic_log_ratio(x_spec[i], e_spec[i], f0[i], freqs, k_max)
        if curve is None:
            continue
        h_taps[i] = design_fir(np.exp(lifter(curve, lifter_order)), n_taps)[0]
    delay = n_taps // 2
    harmonic = ltv_fir_filter(exc, h_taps, cfg, delay)

    residual = w.samples - harmonic.samples
    r_spec = np.fft.rfft(frame_signal(residual, cfg, "constant") * win, axis=-1)
    log_env = lifter(0.5 * np.log(np.maximum(_smoothed_power(r_spec, lifter_order), 1e-20)), lifter_order)
    psd = np.exp(2.0 * log_env) / np.sum(win**2)
    n_taps_arr = design_fir(np.sqrt(psd / NOISE_VARIANCE), n_taps)
    silent = ~np.any(np.abs(r_spec) > 1e-10, axis=1)
    n_taps_arr[silent] = 0.0

    params = SynthesisParams(f0, h_taps, n_taps_arr, cfg, sr, delay)
    return params, harmonic


def estimate_params(
    w: Waveform,
    t: F0Track,
    cfg: FrameConfig = FrameConfig(),
    n_taps: int = N_TAPS,
    lifter_order: int = LIFTER_ORDER,
) -> SynthesisParams:
    """Deterministic per-frame estimate of F0, harmonic taps and noise taps.

    Harmonic taps: at each harmonic bin the source magnitude is divided by the
    sawtooth magnitude (same window, same F0), the log ratio is interpolated
    across bins, cepstrally smoothed and realised as a zero-phase FIR.
    Noise taps: the power spectrum of the residual (source minus the filtered
    sawtooth) is averaged across neighbouring bins, cepstrally smoothed in the
    log domain and scaled for unit-range uniform noise.
    """
    return _estimate(w, t, cfg, n_taps, lifter_order)[0]


def decompose(
    w: Waveform,
    t: F0Track,
    cfg: FrameConfig = FrameConfig(),
    n_taps: int = N_TAPS,
    lifter_order: int = LIFTER_ORDER,
) -> HnDecomposition:
    """Split ``w`` into the filtered-sawtooth part and the residual ``w - harmonic``."""
    params, harmonic = _estimate(w, t, cfg, n_taps, lifter_order)
    noise = w.with_samples(w.samples - harmonic.samples)
    return HnDecomposition(harmonic, noise, w, params)


def resynthesize(params: SynthesisParams, n_samples: int, seed: int = 0) -> tuple[Waveform, Waveform]:
    """Render both branches from ``params``; returns ``(harmonic, noise)``."""
    cfg = params.config
    exc = sawtooth_excitation(upsample_f0(params.f0_per_frame, cfg, n_samples), params.sample_rate)
    harmonic = ltv_fir_filter(exc, params.harmonic_taps, cfg, params.delay)
    noise = synthesize_noise(params.noise_taps, cfg, seed, n_samples, params.delay, params.sample_rate)
    return harmonic, noise


def write_params(params: SynthesisParams, path) -> None:
    """Debug dump: a ``#`` header line, then one frame per line (f0, harmonic taps, noise taps)."""
    cfg = params.config
    with open(path, "w") as fh:
        fh.write(
            f"# pitchfree-params v1 frame_length={cfg.frame_length} hop_length={cfg.hop_length} "
            f"window={cfg.window} sample_rate={params.sample_rate} delay={params.delay} "
            f"taps_h={params.harmonic_taps.shape[1]} taps_n={params.noise_taps.shape[1]}\n"
        )
        for f0, h, nz in zip(params.f0_per_frame, params.harmonic_taps, params.noise_taps):
            fh.write(" ".join(repr(float(v)) for v in (f0, *h, *nz)) + "\n")


def read_params(path) -> SynthesisParams:
    with open(path) as fh:
        header = fh.readline().split()
        meta = dict(item.split("=", 1) for item in header[3:])
        rows = [np.array(line.split(), dtype=np.float64) for line in fh if line.strip()]
    lh, ln = int(meta["taps_h"]), int(meta["taps_n"])
    data = np.stack(rows) if rows else np.zeros((0, 1 + lh + ln))
    cfg = FrameConfig(int(meta["frame_length"]), int(meta["hop_length"]), meta["window"])
    return SynthesisParams(
        data[:, 0], data[:, 1: 1 + lh], data[:, 1 + lh:], cfg, int(meta["sample_rate"]), int(meta["delay"])
    )
