"""Deterministic synthetic signals used by the tests and demos."""

from __future__ import annotations

import numpy as np
from scipy.signal import lfilter

from .hn_model import sawtooth_excitation
from .signal_core import Waveform

# (frequency Hz, bandwidth Hz) of an /a/-like vowel
VOWEL_A = ((730.0, 90.0), (1090.0, 110.0), (2440.0, 170.0), (3400.0, 250.0))


def sine(freq: float, duration: float = 1.0, sr: int = 24000, amplitude: float = 0.5, phase: float = 0.0) -> Waveform:
    n = np.arange(int(round(duration * sr)))
    return Waveform(amplitude * np.sin(2 * np.pi * freq * n / sr + phase), sr)


def white_noise(duration: float = 1.0, sr: int = 24000, amplitude: float = 0.1, seed: int = 0) -> Waveform:
    rng = np.random.default_rng(seed)
    return Waveform(amplitude * rng.standard_normal(int(round(duration * sr))), sr)


def chirp(f_start: float, f_end: float, duration: float = 1.0, sr: int = 24000, amplitude: float = 0.5) -> Waveform:
    """Linear chirp from ``f_start`` to ``f_end``."""
    t = np.arange(int(round(duration * sr))) / sr
    phase = 2 * np.pi * (f_start * t + 0.5 * (f_end - f_start) / duration * t**2)
    return Waveform(amplitude * np.sin(phase), sr)


def harmonic_tone(f0: float, duration: float = 1.0, sr: int = 24000, amplitude: float = 0.5) -> Waveform:
    """Constant-F0 band-limited sawtooth, scaled so its peak is ``amplitude``."""
    x = sawtooth_excitation(np.full(int(round(duration * sr)), float(f0)), sr).samples
    return Waveform(amplitude * x / np.max(np.abs(x)), sr)


def formant_filter(x, sr: int, formants=VOWEL_A):
    """Cascade of two-pole resonators, each with unity gain at DC."""
    y = np.asarray(x, dtype=np.float64)
    for freq, bw in formants:
        r = np.exp(-np.pi * bw / sr)
        a = [1.0, -2.0 * r * np.cos(2 * np.pi * freq / sr), r * r]
        y = lfilter([sum(a)], a, y)
    return y


def vowel(f0: float = 150.0, duration: float = 1.0, sr: int = 24000, amplitude: float = 0.5, formants=VOWEL_A) -> Waveform:
    """Sawtooth source through a formant cascade."""
    src = sawtooth_excitation(np.full(int(round(duration * sr)), float(f0)), sr).samples
    y = formant_filter(src, sr, formants)
    return Waveform(amplitude * y / np.max(np.abs(y)), sr)


def square(freq: float, duration: float = 1.0, sr: int = 24000) -> Waveform:
    """Full-scale +/-1 square wave."""
    n = np.arange(int(round(duration * sr)))
    return Waveform(np.where(np.sin(2 * np.pi * freq * (n + 0.5) / sr) >= 0, 1.0, -1.0), sr)
