"""
Pitch tracking and voiced time ratio
====================================

Track F0 on a vowel followed by noise and list the voiced segments.
"""

import numpy as np

from pitchfree import testsignals as ts
from pitchfree.pitch import detect_f0, voiced_segments, vtr
from pitchfree.signal_core import Waveform

voiced = ts.vowel(f0=140.0, duration=0.6)
noise = ts.white_noise(duration=0.6, amplitude=0.05)
w = Waveform(np.concatenate([voiced.samples, noise.samples]), voiced.sample_rate)

track = detect_f0(w)
print("voiced time ratio:", round(vtr(track), 3))
print("median F0 of voiced frames:", np.median(track.f0_hz[track.voiced]))

# runs of voiced frames, merged across short gaps and widened to sample ranges
for seg in voiced_segments(track):
    print(f"segment {seg.start_sample / w.sample_rate:.3f}-{seg.end_sample / w.sample_rate:.3f} s, "
          f"mean F0 {seg.mean_f0:.1f} Hz")
