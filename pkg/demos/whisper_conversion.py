"""
Whisper conversion
==================

Compare pitch-aware segment replacement with the two classical baselines.
"""

import tempfile
from pathlib import Path

from pitchfree import testsignals as ts
from pitchfree.audio_io import write_wav
from pitchfree.pitch import detect_f0, vtr
from pitchfree.whisperize import to_whisper_lpc, whisper_effect, whisperize_detailed

speech = ts.vowel(f0=180.0, duration=1.0)
print("input VTR:", vtr(detect_f0(speech)))

# pitched segments are replaced by their noise component; everything else is untouched
res = whisperize_detailed(speech)
print("replaced segments:", [(s.start_sample, s.end_sample) for s in res.segments])

converters = {
    "pitch_free": res.waveform,
    "whisper_effect": whisper_effect(speech, cutoff_hz=800.0, noise_gain=0.02, seed=0),
    "lpc": to_whisper_lpc(speech, order=24, seed=0),
}
out = Path(tempfile.mkdtemp())
for name, w in converters.items():
    # a high-pass filter keeps the harmonics, so whisper_effect stays voiced
    print(f"{name:15s} VTR {vtr(detect_f0(w)):.3f}")
    write_wav(w, out / f"{name}.wav")
print("wrote", out)
