"""
Framing, STFT and mel features
==============================

Analyse a chirp, resynthesise it and look at its mel spectrogram.
"""

import numpy as np

from pitchfree import testsignals as ts
from pitchfree.signal_core import FrameConfig, istft, mel_spectrogram, stft

# 1280-sample frames with a 320-sample hop at 24 kHz
cfg = FrameConfig()
w = ts.chirp(100.0, 4000.0, duration=1.0)
spec = stft(w, cfg)
print("frames x bins:", spec.bins.shape)

# hann at a quarter-frame hop overlap-adds to a constant, so istft inverts stft
back = istft(spec)
print("max reconstruction error:", np.max(np.abs(back.samples - w.samples)))

# the ridge of the chirp climbs through the mel bands
mel = mel_spectrogram(w, cfg)
print("loudest mel band every 10 frames:", np.argmax(mel.values, axis=1)[::10])
