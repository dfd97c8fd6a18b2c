"""
Harmonic plus noise decomposition
=================================

Split a noisy vowel into a filtered-sawtooth part and a residual, then
resynthesise both branches from the estimated filters.
"""

import numpy as np

from pitchfree import testsignals as ts
from pitchfree.hn_model import decompose, resynthesize
from pitchfree.pitch import detect_f0
from pitchfree.signal_core import Waveform

vowel = ts.vowel(f0=120.0, duration=1.0, amplitude=0.4)
breath = ts.white_noise(duration=1.0, amplitude=0.02, seed=1)
w = Waveform(vowel.samples + breath.samples, vowel.sample_rate)

track = detect_f0(w)
dec = decompose(w, track)


def energy(x):
    return float(np.sum(x**2))


# the noise branch is the exact residual, so H + N reproduces the input
print("max |S - (H + N)|:", np.max(np.abs(w.samples - dec.harmonic.samples - dec.noise.samples)))
print("harmonic share of energy:", energy(dec.harmonic.samples) / energy(w.samples))

# per-frame filters: 256 taps for each branch
p = dec.params
print("frames:", p.n_frames, "harmonic taps:", p.harmonic_taps.shape[1], "noise taps:", p.noise_taps.shape[1])

# render both branches from the parameters alone
harmonic, noise = resynthesize(p, len(w), seed=0)
print("resynthesised noise RMS:", np.sqrt(np.mean(noise.samples**2)))
