"""
Batch processing from the command line
======================================

The same steps as the other demos, driven through ``pitchfree.cli.main``
(equivalent to the ``pitchfree`` console script).
"""

import tempfile
from pathlib import Path

from pitchfree import testsignals as ts
from pitchfree.audio_io import write_wav
from pitchfree.cli import main

work = Path(tempfile.mkdtemp())
(work / "in").mkdir()
write_wav(ts.vowel(f0=130.0, duration=0.8, sr=48000), work / "in" / "vowel.wav")
write_wav(ts.white_noise(duration=0.8, sr=16000), work / "in" / "breath.wav")

# inputs are resampled to 24 kHz; each file gets a seed derived from its path
status = main(["convert", "--in", str(work / "in"), "--out", str(work / "out"), "--seed", "1", "--workers", "2"])
print("convert exit status:", status)
print((work / "out" / "convert.log").read_text())

status = main(["analyze", "--in", str(work / "out"), "--out", str(work / "report"), "--spectrogram", "--rms"])
print("analyze exit status:", status)
print((work / "report" / "metrics.csv").read_text())
