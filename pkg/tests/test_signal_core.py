import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pitchfree import testsignals as ts
from pitchfree.errors import EmptyInput, InvalidConfig, InvalidInput
from pitchfree.signal_core import (
    LOG_FLOOR,
    FrameConfig,
    Spectrogram,
    Waveform,
    apply_window,
    istft,
    mel_band_edges,
    mel_spectrogram,
    overlap_add,
    stft,
)

from .conftest import SR, interior, rel_l2


def test_frame_config_defaults():
    cfg = FrameConfig()
    assert (cfg.frame_length, cfg.hop_length, cfg.window) == (1280, 320, "hann")


@pytest.mark.parametrize("frame,hop", [(256, 512), (256, 0), (0, 1)])
def test_frame_config_rejects_bad_hop(frame, hop):
    with pytest.raises(InvalidConfig):
        FrameConfig(frame, hop)


def test_waveform_rejects_nan():
    with pytest.raises(InvalidInput):
        Waveform([0.0, np.nan], SR)


def test_waveform_is_immutable():
    w = Waveform(np.zeros(4), SR)
    with pytest.raises(ValueError):
        w.samples[0] = 1.0


def test_stft_empty():
    with pytest.raises(EmptyInput):
        stft(Waveform([], SR))


def test_stft_impulse_flat_spectrum():
    x = np.zeros(1280)
    x[640] = 1.0
    cfg = FrameConfig(1280, 320, "rectangular")
    spec = stft(Waveform(x, SR), cfg)
    # frame 2 is centred on sample 640
    np.testing.assert_allclose(np.abs(spec.bins[2]), 1.0, atol=1e-12)
    assert spec.bins.shape[1] == 641


def test_stft_integer_bin_sine():
    spec = stft(ts.sine(1875.0, 1.0, SR))
    mags = np.abs(spec.bins[2:-2])
    assert np.all(np.argmax(mags, axis=1) == 100)


@pytest.mark.parametrize("n", [1, 319, 320, 321, 24000, 24001])
@pytest.mark.parametrize("frame,hop", [(1280, 320), (512, 128), (400, 160)])
def test_stft_frame_count(n, frame, hop):
    cfg = FrameConfig(frame, hop)
    padded = n + 2 * (frame // 2)
    # brute force: every hop-aligned start whose frame fits the padded signal
    expected = sum(1 for start in range(0, padded) if start % hop == 0 and start + frame <= padded)
    x = np.random.default_rng(n).standard_normal(n)
    assert stft(Waveform(x, SR), cfg).n_frames == expected


@pytest.mark.parametrize("hop", [320, 640])
def test_istft_roundtrip(hop, rng):
    x = rng.uniform(-1, 1, 12000)
    cfg = FrameConfig(1280, hop)
    y = istft(stft(Waveform(x, SR), cfg))
    assert len(y) == len(x)
    assert rel_l2(interior(y.samples, 1280), interior(x, 1280)) < 1e-6
    # dividing by the exact window envelope also recovers the edges
    assert rel_l2(y.samples, x) < 1e-6


def test_istft_zero_spectrogram():
    cfg = FrameConfig()
    spec = Spectrogram(np.zeros((20, cfg.n_bins), complex), cfg, SR)
    y = istft(spec)
    assert np.all(y.samples == 0.0)


def test_istft_rejects_non_cola():
    cfg = FrameConfig(1280, 400)
    spec = stft(Waveform(np.ones(4000), SR), cfg)
    with pytest.raises(InvalidConfig):
        istft(spec)


def test_mel_silence_is_floor():
    mel = mel_spectrogram(Waveform(np.zeros(4800), SR))
    assert np.all(mel.values == math.log(LOG_FLOOR))


def test_mel_log_homogeneity(rng):
    x = rng.uniform(-0.3, 0.3, 8000)
    a = mel_spectrogram(Waveform(x, SR)).values
    b = mel_spectrogram(Waveform(2 * x, SR)).values
    above = a > math.log(LOG_FLOOR) + 1
    assert above.all()
    np.testing.assert_allclose(b - a, math.log(2.0), atol=1e-9)


def test_mel_sine_peaks_at_nearest_band():
    # band centres from the HTK mel formula, computed without the library
    top = 2595.0 * math.log10(1 + 12000 / 700.0)
    centres = [700.0 * (10 ** (top * (m + 1) / 81 / 2595.0) - 1) for m in range(80)]
    np.testing.assert_allclose(mel_band_edges(80, SR)[1:-1], centres, rtol=1e-12)
    for target in (20, 45, 61):
        f = centres[target]
        mel = mel_spectrogram(ts.sine(f, 0.5, SR)).values
        nearest = int(np.argmin([abs(c - f) for c in centres]))
        assert nearest == target
        assert np.all(np.argmax(mel[2:-2], axis=1) == nearest)


def test_mel_too_many_bands():
    with pytest.raises(InvalidConfig):
        mel_spectrogram(Waveform(np.ones(1000), SR), FrameConfig(64, 16), n_mels=40)


def test_overlap_add_single_frame():
    f = np.arange(7.0)
    np.testing.assert_array_equal(overlap_add([f], 3), f)


def test_overlap_add_disjoint():
    out = overlap_add([np.ones(5), np.ones(5)], 5)
    np.testing.assert_array_equal(out, np.ones(10))


def test_overlap_add_hann_cola_half_overlap():
    n, hop, c = 512, 256, 0.37
    frames = [apply_window(np.full(n, c)) for _ in range(12)]
    out = overlap_add(frames, hop)
    assert len(out) == 11 * hop + n
    # periodic hann satisfies w[k] + w[k + n/2] = 1 exactly
    np.testing.assert_allclose(out[n: -n], c, atol=1e-9)


def test_overlap_add_ragged():
    with pytest.raises(InvalidInput):
        overlap_add([np.ones(4), np.ones(5)], 2)


def test_apply_window_rectangular_identity(rng):
    f = rng.standard_normal(33)
    np.testing.assert_array_equal(apply_window(f, "rectangular"), f)


def test_apply_window_hann_curve():
    n = 16
    expected = [0.5 - 0.5 * math.cos(2 * math.pi * k / n) for k in range(n)]
    np.testing.assert_allclose(apply_window(np.ones(n), "hann"), expected, atol=1e-15)


def test_apply_window_hann_endpoints():
    n = 1280
    w = apply_window(np.ones(n), "hann")
    assert w[0] == 0.0
    # periodic convention: only the first endpoint is an exact zero
    assert w[-1] == pytest.approx(0.5 - 0.5 * math.cos(2 * math.pi * (n - 1) / n), abs=1e-15)
    assert w[-1] < 1e-5


signals = st.integers(min_value=0, max_value=2**31 - 1)


@settings(max_examples=20, deadline=None)
@given(seed=signals, hop_div=st.sampled_from([2, 4]))
def test_cola_property(seed, hop_div):
    x = np.random.default_rng(seed).standard_normal(6000)
    cfg = FrameConfig(512, 512 // hop_div)
    y = istft(stft(Waveform(x, SR), cfg))
    assert rel_l2(interior(y.samples, 512), interior(x, 512)) < 1e-6


@settings(max_examples=20, deadline=None)
@given(seed=signals, a=st.floats(-3, 3), b=st.floats(-3, 3))
def test_stft_linearity(seed, a, b):
    r = np.random.default_rng(seed)
    cfg = FrameConfig(256, 64)
    x, y = r.standard_normal(1024), r.standard_normal(1024)
    lhs = stft(Waveform(a * x + b * y, SR), cfg).bins
    rhs = a * stft(Waveform(x, SR), cfg).bins + b * stft(Waveform(y, SR), cfg).bins
    np.testing.assert_allclose(lhs, rhs, atol=1e-9)


@settings(max_examples=20, deadline=None)
@given(seed=signals)
def test_parseval_per_frame(seed):
    from pitchfree.signal_core import frame_signal, get_window

    x = np.random.default_rng(seed).standard_normal(3000)
    cfg = FrameConfig(512, 128)
    spec = stft(Waveform(x, SR), cfg).bins
    frames = frame_signal(x, cfg) * get_window("hann", 512)
    time_energy = np.sum(frames**2, axis=1)
    p = np.abs(spec) ** 2
    spec_energy = (p[:, 0] + p[:, -1] + 2 * p[:, 1:-1].sum(axis=1)) / 512
    np.testing.assert_allclose(spec_energy, time_energy, rtol=1e-6)


def test_stft_deterministic(rng):
    w = Waveform(rng.standard_normal(5000), SR)
    assert np.array_equal(stft(w).bins, stft(w).bins)
