"""
Objective metrics
=================

MCD between converted and source audio, RMS level profiles and a
spectrogram image.
"""

import tempfile
from pathlib import Path

from pitchfree import testsignals as ts
from pitchfree.metrics import mcd, render_spectrogram, rms_profile
from pitchfree.whisperize import whisperize

src = ts.vowel(f0=150.0, duration=1.0)
conv = whisperize(src)

print("MCD(src, src):", mcd(src, src))
print("MCD(src, converted): %.2f dB" % mcd(src, conv))

# 50 ms windows, dBFS with full scale = 1.0
for name, w in (("source", src), ("converted", conv)):
    prof = rms_profile(w, window_ms=50.0)
    print(f"{name} mean level {prof[:, 1].mean():.1f} dBFS")

path = Path(tempfile.mkdtemp()) / "converted.png"
img = render_spectrogram(conv, path=path)
print("spectrogram", img.shape, "->", path)
