"""WAV decoding/encoding, downmixing and rational-ratio resampling."""

from __future__ import annotations

import math
import struct
import warnings

import numpy as np
from scipy.io import wavfile
from scipy.signal import firwin, resample_poly

from .errors import InvalidInput, IoError
from .signal_core import Waveform

ENCODINGS = ("pcm16", "f32")
TAPS_PER_PHASE = 64
KAISER_BETA = 12.0


def read_wav(path) -> Waveform:
    """Decode a PCM 16/24/32-bit or float WAV to a mono float waveform in [-1, 1]."""
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", wavfile.WavFileWarning)
            sr, data = wavfile.read(path)
    except FileNotFoundError:
        raise
    except (ValueError, OSError, EOFError, IndexError, TypeError, struct.error) as exc:
        raise IoError(f"cannot decode {path}: {exc}") from exc
    if data.dtype == np.int16:
        x = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        # 24-bit files are returned left-aligned in int32
        x = data.astype(np.float64) / 2147483648.0
    elif data.dtype == np.uint8:
        x = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype in (np.float32, np.float64):
        x = data.astype(np.float64)
    else:
        raise IoError(f"unsupported sample type {data.dtype} in {path}")
    if x.ndim == 2:
        x = x.mean(axis=1)
    if x.size and not np.all(np.isfinite(x)):
        raise IoError(f"non-finite samples in {path}")
    return Waveform(x, int(sr))


def write_wav(w: Waveform, path, encoding: str = "pcm16") -> None:
    if encoding not in ENCODINGS:
        raise InvalidInput(f"encoding must be one of {ENCODINGS}")
    x = np.clip(w.samples, -1.0, 1.0)
    if encoding == "pcm16":
        data = np.clip(np.round(x * 32768.0), -32768, 32767).astype(np.int16)
    else:
        data = x.astype(np.float32)
    try:
        wavfile.write(path, w.sample_rate, data)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def resample(w: Waveform, rate: int) -> Waveform:
    """Polyphase windowed-sinc resampling (64 taps per phase, Kaiser beta 12)."""
    if rate <= 0:
        raise InvalidInput("target rate must be positive")
    if rate == w.sample_rate or len(w) == 0:
        return Waveform(w.samples, rate)
    g = math.gcd(rate, w.sample_rate)
    up, down = rate // g, w.sample_rate // g
    max_rate = max(up, down)
    half_len = TAPS_PER_PHASE // 2 * max_rate
    h = firwin(2 * half_len + 1, 1.0 / max_rate, window=("kaiser", KAISER_BETA))
    y = resample_poly(w.samples, up, down, window=h)
    return Waveform(y, rate)
