import numpy as np
import pytest
from scipy.linalg import solve_toeplitz
from scipy.signal import lfilter

from pitchfree import testsignals as ts
from pitchfree.errors import EmptyInput, InvalidConfig
from pitchfree.lpc import autocorrelation, levinson_durbin, lpc, lpc_envelope
from pitchfree.metrics import rms_profile
from pitchfree.pitch import detect_f0, vtr
from pitchfree.signal_core import FrameConfig, Waveform
from pitchfree.whisperize import (
    WhisperizeConfig,
    to_whisper_lpc,
    whisper_effect,
    whisperize,
    whisperize_detailed,
)

from .conftest import SR


def shaped_noise(duration=1.0, seed=0):
    x = np.random.default_rng(seed).standard_normal(int(duration * SR)) * 0.1
    return Waveform(lfilter([1.0], [1.0, -1.3, 0.6], x), SR)


def half_and_half():
    voiced = ts.vowel(150.0, 0.6, SR, amplitude=0.4).samples
    noise = ts.white_noise(0.6, SR, 0.05, seed=4).samples
    return Waveform(np.concatenate([voiced, noise]), SR)


# --- whisperize --------------------------------------------------------------


def test_white_noise_identity():
    w = ts.white_noise(1.0, SR, 0.1, seed=1)
    out = whisperize(w)
    assert out == w


def test_shaped_noise_identity():
    w = shaped_noise(seed=5)
    assert np.array_equal(whisperize(w).samples, w.samples)


def test_tone_becomes_pitch_free():
    w = ts.sine(220.0, 1.0, SR)
    assert vtr(detect_f0(w)) > 0.9
    out = whisperize(w)
    assert vtr(detect_f0(out)) < 0.05


@pytest.mark.parametrize("f0", [100.0, 170.0, 260.0])
def test_vowel_becomes_pitch_free(f0):
    out = whisperize(ts.vowel(f0, 0.8, SR))
    assert vtr(detect_f0(out)) < 0.05


def test_half_voiced_half_noise():
    w = half_and_half()
    res = whisperize_detailed(w)
    assert res.segments
    touched = np.zeros(len(w), bool)
    for s in res.segments:
        touched[s.start_sample: s.end_sample] = True
    # the noise half lies outside every replaced segment, bit for bit
    assert not touched[int(0.7 * SR):].any()
    np.testing.assert_array_equal(res.waveform.samples[~touched], w.samples[~touched])
    # the voiced half is replaced
    assert touched[int(0.05 * SR): int(0.55 * SR)].all()
    first = detect_f0(Waveform(res.waveform.samples[: int(0.6 * SR)], SR))
    assert vtr(first) < 0.1


def test_energy_sanity():
    w = ts.vowel(140.0, 1.0, SR, amplitude=0.3)
    res = whisperize_detailed(w)
    for s in res.segments:
        src = w.samples[s.start_sample: s.end_sample]
        out = res.waveform.samples[s.start_sample: s.end_sample]
        ratio_db = 20 * np.log10(np.sqrt(np.mean(out**2)) / np.sqrt(np.mean(src**2)))
        assert abs(ratio_db) <= 3.0


def test_replacement_level_is_even_across_segment():
    w = ts.vowel(150.0, 1.0, SR)
    src = rms_profile(w)[:, 1]
    out = rms_profile(whisperize(w))[:, 1]
    # the noise must not pile up at the segment edges
    assert np.max(np.abs(out - src)) < 6.0


def test_gain_match_flag_changes_level():
    w = ts.vowel(140.0, 0.6, SR, amplitude=0.3)
    a = whisperize(w, WhisperizeConfig(noise_gain_match=True))
    b = whisperize(w, WhisperizeConfig(noise_gain_match=False))
    assert not np.array_equal(a.samples, b.samples)


def test_residual_noise_source_runs():
    w = ts.vowel(140.0, 0.6, SR)
    out = whisperize(w, WhisperizeConfig(noise_source="residual"))
    assert len(out) == len(w)


def test_idempotence():
    w = ts.vowel(150.0, 1.0, SR)
    once = whisperize(w)
    second = whisperize_detailed(once)
    assert second.segments == []
    assert second.waveform == once


def test_length_and_determinism():
    w = ts.vowel(200.0, 0.7, SR)
    for conv in (whisperize, lambda x: whisper_effect(x, seed=3), lambda x: to_whisper_lpc(x, seed=3)):
        a, b = conv(w), conv(w)
        assert len(a) == len(w)
        assert np.array_equal(a.samples, b.samples)


def test_seed_changes_output():
    w = ts.vowel(200.0, 0.7, SR)
    a = whisperize(w, WhisperizeConfig(seed=1))
    b = whisperize(w, WhisperizeConfig(seed=2))
    assert not np.array_equal(a.samples, b.samples)


def test_whisperize_empty():
    with pytest.raises(EmptyInput):
        whisperize(Waveform([], SR))


def test_crossfade_too_long():
    with pytest.raises(InvalidConfig):
        whisperize(ts.vowel(150.0, 0.5, SR), WhisperizeConfig(crossfade_ms=60.0))
    with pytest.raises(InvalidConfig):
        WhisperizeConfig(crossfade_ms=-1.0)


# --- whisper_effect ---------------------------------------------------------------


def test_whisper_effect_passes_all_at_low_cutoff():
    w = ts.sine(1000.0, 1.0, SR)
    out = whisper_effect(w, cutoff_hz=1.0, noise_gain=0.0)
    tail = slice(SR // 4, None)
    err = np.linalg.norm(out.samples[tail] - w.samples[tail]) / np.linalg.norm(w.samples[tail])
    assert err < 1e-2


def test_whisper_effect_stopband():
    w = ts.sine(100.0, 1.0, SR)
    out = whisper_effect(w, cutoff_hz=1000.0, noise_gain=0.0)
    tail = slice(SR // 10, None)
    ratio = np.sum(out.samples[tail] ** 2) / np.sum(w.samples[tail] ** 2)
    assert 10 * np.log10(ratio) <= -40


def test_whisper_effect_cutoff_range():
    w = ts.sine(100.0, 0.1, SR)
    for bad in (0.0, -5.0, SR / 2, SR):
        with pytest.raises(InvalidConfig):
            whisper_effect(w, cutoff_hz=bad)


def test_whisper_effect_seeded():
    w = ts.sine(300.0, 0.3, SR)
    assert np.array_equal(whisper_effect(w, seed=8).samples, whisper_effect(w, seed=8).samples)
    assert not np.array_equal(whisper_effect(w, seed=8).samples, whisper_effect(w, seed=9).samples)


# --- LPC -------------------------------------------------------------------------


def test_levinson_matches_toeplitz_solve(rng):
    x = lfilter([1.0], [1.0, -0.9, 0.4], rng.standard_normal(4000))
    r = autocorrelation(x, 10)
    a, err, k = levinson_durbin(r, 10)
    ref = solve_toeplitz(r[:10], -r[1:11])
    np.testing.assert_allclose(a[1:], ref, rtol=1e-8, atol=1e-10)
    assert err == pytest.approx(r[0] + np.dot(a[1:], r[1:11]))
    assert np.all(np.abs(k) < 1)


def test_levinson_degenerate():
    assert levinson_durbin(np.zeros(5), 4) is None


def test_lpc_known_filter_envelope():
    true_a = np.poly([0.9 * np.exp(1j * w) for w in (0.3, 1.1, 2.0)] +
                     [0.9 * np.exp(-1j * w) for w in (0.3, 1.1, 2.0)]).real
    true_a = np.r_[true_a, np.zeros(6)]  # analysed at order 12
    e = np.random.default_rng(21).standard_normal(4 * SR)
    x = lfilter([1.0], true_a[:7], e)
    a, gain = lpc(x, 12)
    est = 20 * np.log10(lpc_envelope(a, gain))
    ref = 20 * np.log10(lpc_envelope(true_a, 1.0))
    freqs = np.linspace(0, SR / 2, 513)
    band = (freqs >= 100) & (freqs <= 0.9 * SR / 2)
    assert np.max(np.abs(est[band] - ref[band])) < 2.0


def test_lpc_silence():
    out = to_whisper_lpc(Waveform(np.zeros(SR // 2), SR))
    assert np.all(out.samples == 0.0)


def test_lpc_vowel_unvoiced():
    out = to_whisper_lpc(ts.vowel(150.0, 1.0, SR))
    assert vtr(detect_f0(out)) < 0.1


def test_lpc_config_checks():
    w = ts.sine(100.0, 0.1, SR)
    with pytest.raises(InvalidConfig):
        to_whisper_lpc(w, order=1)
    with pytest.raises(InvalidConfig):
        to_whisper_lpc(w, order=24, cfg=FrameConfig(40, 10))

