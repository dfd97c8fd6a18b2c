import numpy as np
import pytest

from pitchfree.corpus import UtteranceRecord
from pitchfree.signal_core import FrameConfig

SR = 24000


@pytest.fixture
def cfg():
    return FrameConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def interior(x, margin):
    return x[margin: len(x) - margin]


def rel_l2(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def rec(id, speaker="s1", style="whisper", dataset="ds", duration=1.0, **kw):
    kw.setdefault("language", "en")
    return UtteranceRecord(id=id, speaker_id=speaker, style=style, audio_path=f"{id}.wav",
                           duration_s=duration, license="BY-NC", source_dataset=dataset, **kw)


def en_train_fixture():
    # 20694 files totalling 106632 s (29.62 h); 78 male and 87 female speakers
    n, total = 20694, 106632
    base, extra = divmod(total, n)
    records = []
    for i in range(n):
        spk = i % 165
        records.append(rec(f"u{i}", speaker=f"spk{spk}", duration=float(base + (1 if i < extra else 0)),
                           gender="M" if spk < 78 else "F", split="train"))
    return records


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
