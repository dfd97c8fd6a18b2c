"""
Corpus manifests
================

Build a small manifest, split it by speaker, pair whispers with normal
speech and print the statistics table.
"""

import tempfile
from pathlib import Path

from pitchfree.corpus import (
    UtteranceRecord,
    assign_splits,
    corpus_stats,
    load_manifest,
    pair_styles,
    save_manifest,
)

records = []
for spk in range(10):
    for utt in range(4):
        for style in ("whisper", "normal"):
            records.append(UtteranceRecord(
                id=f"{style[0]}{spk:02d}_{utt}", speaker_id=f"spk{spk:02d}", language="en", style=style,
                audio_path=f"spk{spk:02d}/{style}/{utt}.wav", duration_s=3.0 + 0.5 * utt,
                license="BY-NC", source_dataset="demo", pair_id=f"{utt}", gender="MF"[spk % 2],
            ))

path = Path(tempfile.mkdtemp()) / "demo.jsonl"
save_manifest(records, path)
records = load_manifest(path)

# 60/20/20 by speaker; every utterance inherits its speaker's split
records = assign_splits(records, seed=0)
pairs = pair_styles(records)
print("whispers:", len(pairs), "paired:", sum(n is not None for _, n in pairs))

table = corpus_stats(records)
for row in table.rows():
    print(row)
