"""Autocorrelation-method linear prediction."""

from __future__ import annotations

import numpy as np

from .signal_core import get_window


def autocorrelation(x, max_lag: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    spec = np.fft.rfft(x, nfft)
    r = np.fft.irfft(spec * np.conj(spec), nfft)[: max_lag + 1]
    if r.shape[0] < max_lag + 1:
        r = np.pad(r, (0, max_lag + 1 - r.shape[0]))
    return r


def levinson_durbin(r, order: int):
    """Solve the normal equations for ``A(z) = 1 + a1 z^-1 + ... + ap z^-p``.

    Returns ``(a, err, k)`` with ``a[0] == 1``, the final prediction error
    power and the reflection coefficients, or ``None`` when ``r[0]`` is zero
    or the recursion becomes unstable (``|k| >= 1``).
    """
    r = np.asarray(r, dtype=np.float64)
    if r[0] <= 0:
        return None
    a = np.zeros(order + 1)
    a[0] = 1.0
    k = np.zeros(order)
    err = r[0]
    for i in range(1, order + 1):
        acc = r[i] + np.dot(a[1:i], r[i - 1:0:-1])
        ki = -acc / err
        if not np.isfinite(ki) or abs(ki) >= 1.0:
            return None
        a[1:i] = a[1:i] + ki * a[i - 1:0:-1]
        a[i] = ki
        k[i - 1] = ki
        err *= 1.0 - ki * ki
    return a, err, k


def lpc(x, order: int, window: str = "hann"):
    """LPC polynomial and per-sample residual variance of ``x``.

    ``x`` is windowed before the autocorrelation; the returned gain is the
    prediction error divided by the window energy, i.e. a variance in the
    units of the unwindowed signal.
    """
    x = np.asarray(x, dtype=np.float64)
    win = get_window(window, x.shape[0])
    res = levinson_durbin(autocorrelation(x * win, order), order)
    if res is None:
        return None
    a, err, _ = res
    return a, err / np.sum(win**2)


def lpc_envelope(a, gain: float, n_freqs: int = 513) -> np.ndarray:
    """Magnitude ``sqrt(gain) / |A(e^jw)|`` on ``n_freqs`` points from 0 to Nyquist."""
    nfft = 2 * (n_freqs - 1)
    return np.sqrt(gain) / np.abs(np.fft.rfft(a, nfft))
