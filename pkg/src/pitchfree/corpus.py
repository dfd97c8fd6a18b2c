"""Corpus manifests: loading, speaker-disjoint splits, style pairing and statistics.

Manifest format (UTF-8, one JSON object per line)::

    {"format": "pitchfree-manifest", "version": 1}
    {"id": "u001", "speaker_id": "spk01", "language": "en", "style": "whisper", ...}

The header line is written by :func:`save_manifest` and optional on read.
Record keys are the :class:`UtteranceRecord` fields; ``transcript``,
``pair_id``, ``gender`` and ``split`` may be omitted.  Blank lines are ignored.
"""

from __future__ import annotations

import csv
import json
import math
from collections import defaultdict
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .errors import DuplicateRecord, ManifestError, TooFewSpeakers

MANIFEST_FORMAT = "pitchfree-manifest"
MANIFEST_VERSION = 1
STYLES = ("whisper", "normal")
SPLITS = ("train", "valid", "test")
DEFAULT_RATIOS = (0.6, 0.2, 0.2)


@dataclass(frozen=True)
class UtteranceRecord:
    id: str
    speaker_id: str
    language: str  # "en", "zh" or any other tag
    style: str
    audio_path: str
    duration_s: float
    license: str
    source_dataset: str
    transcript: str | None = None
    pair_id: str | None = None
    gender: str | None = None
    split: str | None = None

    def __post_init__(self):
        for name in ("id", "speaker_id", "language", "source_dataset"):
            if not isinstance(getattr(self, name), str) or not getattr(self, name):
                raise ValueError(f"{name} must be a non-empty string")
        if self.style not in STYLES:
            raise ValueError(f"style must be one of {STYLES}, got {self.style!r}")
        if isinstance(self.duration_s, bool) or not isinstance(self.duration_s, (int, float)):
            raise ValueError("duration_s must be a number")
        if not (math.isfinite(self.duration_s) and self.duration_s > 0):
            raise ValueError(f"duration_s must be positive, got {self.duration_s}")
        if self.split is not None and self.split not in SPLITS:
            raise ValueError(f"split must be one of {SPLITS}, got {self.split!r}")

    @property
    def key(self) -> tuple[str, str]:
        return (self.source_dataset, self.id)

    def to_json(self) -> str:
        d = {k: v for k, v in asdict(self).items() if not (v is None and k in _OPTIONAL)}
        return json.dumps(d, ensure_ascii=False, sort_keys=False)


_FIELDS = {f.name for f in fields(UtteranceRecord)}
_OPTIONAL = {"transcript", "pair_id", "gender", "split"}


def _parse_record(obj, lineno: int) -> UtteranceRecord:
    if not isinstance(obj, dict):
        raise ManifestError(lineno, "record is not a JSON object")
    missing = sorted(_FIELDS - _OPTIONAL - obj.keys())
    if missing:
        raise ManifestError(lineno, f"missing field(s): {', '.join(missing)}")
    unknown = sorted(obj.keys() - _FIELDS)
    if unknown:
        raise ManifestError(lineno, f"unknown field(s): {', '.join(unknown)}")
    try:
        return UtteranceRecord(**obj)
    except (TypeError, ValueError) as exc:
        raise ManifestError(lineno, str(exc)) from None


def parse_manifest(lines) -> list[UtteranceRecord]:
    records: list[UtteranceRecord] = []
    seen: dict[tuple[str, str], int] = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ManifestError(lineno, f"invalid JSON: {exc.msg}") from None
        if isinstance(obj, dict) and "format" in obj and not records and not seen:
            if obj.get("format") != MANIFEST_FORMAT:
                raise ManifestError(lineno, f"unknown manifest format {obj.get('format')!r}")
            if obj.get("version") != MANIFEST_VERSION:
                raise ManifestError(lineno, f"unsupported manifest version {obj.get('version')!r}")
            continue
        rec = _parse_record(obj, lineno)
        if rec.key in seen:
            raise DuplicateRecord(lineno, rec.key, seen[rec.key])
        seen[rec.key] = lineno
        records.append(rec)
    return records


def load_manifest(path) -> list[UtteranceRecord]:
    with open(path, encoding="utf-8") as fh:
        return parse_manifest(fh)


def save_manifest(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps({"format": MANIFEST_FORMAT, "version": MANIFEST_VERSION}) + "\n")
        for rec in records:
            fh.write(rec.to_json() + "\n")


# --- splitting --------------------------------------------------------------


@dataclass(frozen=True)
class SplitAssignment:
    mapping: dict[str, str]
    seed: int
    ratios: tuple[float, float, float] = DEFAULT_RATIOS

    def speakers(self, split: str) -> list[str]:
        return sorted(s for s, v in self.mapping.items() if v == split)

    def counts(self) -> dict[str, int]:
        return {s: sum(1 for v in self.mapping.values() if v == s) for s in SPLITS}

    def __getitem__(self, speaker_id: str) -> str:
        return self.mapping[speaker_id]


def split_sizes(n_speakers: int, ratios=DEFAULT_RATIOS) -> tuple[int, int, int]:
    """Floor the valid and test sizes; the remainder goes to train."""
    n_valid = math.floor(n_speakers * ratios[1] + 1e-9)
    n_test = math.floor(n_speakers * ratios[2] + 1e-9)
    return n_speakers - n_valid - n_test, n_valid, n_test


def split_by_speaker(records, seed: int = 0, ratios=DEFAULT_RATIOS) -> SplitAssignment:
    """Seeded speaker-disjoint train/valid/test assignment.

    Speakers are sorted, permuted with ``numpy.random.default_rng(seed)`` and
    cut into consecutive blocks of sizes :func:`split_sizes`.  The result
    depends only on the set of speaker ids and the seed.
    """
    speakers = sorted({r.speaker_id for r in records})
    if len(speakers) < 5:
        raise TooFewSpeakers(f"need at least 5 speakers to split, got {len(speakers)}")
    n_train, n_valid, _ = split_sizes(len(speakers), ratios)
    order = np.random.default_rng(seed).permutation(len(speakers))
    mapping = {}
    for rank, idx in enumerate(order):
        if rank < n_train:
            mapping[speakers[idx]] = "train"
        elif rank < n_train + n_valid:
            mapping[speakers[idx]] = "valid"
        else:
            mapping[speakers[idx]] = "test"
    return SplitAssignment(mapping, seed, tuple(ratios))


def assign_splits(records, seed: int = 0, ratios=DEFAULT_RATIOS) -> list[UtteranceRecord]:
    """Fill the ``split`` field dataset by dataset.

    A dataset whose records all carry a split keeps them verbatim (upstream
    official splits); any other dataset is split by speaker, ignoring
    partial split values.
    """
    by_dataset = defaultdict(list)
    for r in records:
        by_dataset[r.source_dataset].append(r)
    assignments = {}
    for name, recs in by_dataset.items():
        if all(r.split is not None for r in recs):
            continue
        assignments[name] = split_by_speaker(recs, seed, ratios)
    out = []
    for r in records:
        a = assignments.get(r.source_dataset)
        out.append(r if a is None else replace(r, split=a[r.speaker_id]))
    return out


# --- pairing ----------------------------------------------------------------


def pair_styles(records) -> list[tuple[UtteranceRecord, UtteranceRecord | None]]:
    """Match each whisper record to a normal rendition of the same content.

    Two records match when they share ``source_dataset``, ``speaker_id`` and
    content key (``pair_id`` when set, else ``id``).  The first normal record
    in manifest order wins.  Whispers without a partner are kept with
    ``None``.
    """
    normals = {}
    for r in records:
        if r.style == "normal":
            normals.setdefault(_content_key(r), r)
    return [(r, normals.get(_content_key(r))) for r in records if r.style == "whisper"]


def _content_key(r: UtteranceRecord):
    return (r.source_dataset, r.speaker_id, r.pair_id if r.pair_id is not None else r.id)


# --- statistics -------------------------------------------------------------


@dataclass
class GroupStats:
    language: str
    split: str
    file_count: int = 0
    total_seconds: float = 0.0
    speakers_by_gender: dict[str, int] | None = None

    @property
    def hours(self) -> float:
        return self.total_seconds / 3600.0

    @property
    def avg_seconds(self) -> float:
        return self.total_seconds / self.file_count if self.file_count else 0.0

    @property
    def speaker_count(self) -> int:
        return sum((self.speakers_by_gender or {}).values())

    def speaker_label(self) -> str:
        """``"78M 87F"`` style when genders are declared, else the plain count."""
        g = self.speakers_by_gender or {}
        if not g:
            return "0"
        if set(g) == {"?"}:
            return str(g["?"])
        order = sorted(g, key=lambda k: ({"M": 0, "F": 1}.get(k, 2), k))
        return " ".join(f"{g[k]}{k}" for k in order)


STATS_HEADER = ("language", "split", "File Count", "Size (h)", "Avg (s)", "Speaker Count")


@dataclass
class StatsTable:
    groups: list[GroupStats]
    total: GroupStats

    def get(self, language: str, split: str) -> GroupStats:
        for g in self.groups:
            if g.language == language and g.split == split:
                return g
        raise KeyError((language, split))

    def rows(self):
        for g in self.groups:
            yield (g.language, g.split, g.file_count, f"{g.hours:.2f}", f"{g.avg_seconds:.2f}", g.speaker_label())

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(STATS_HEADER)
            writer.writerows(self.rows())


def _group(records, language: str, split: str) -> GroupStats:
    speakers = {}
    for r in records:
        speakers.setdefault(r.speaker_id, (r.gender or "?").upper())
    by_gender: dict[str, int] = {}
    for g in speakers.values():
        by_gender[g] = by_gender.get(g, 0) + 1
    return GroupStats(language, split, len(records), math.fsum(r.duration_s for r in records), by_gender)


def corpus_stats(records) -> StatsTable:
    """File count, hours, mean duration and speakers per (language, split).

    Records without a split are grouped under ``"all"``.
    """
    records = list(records)
    buckets = defaultdict(list)
    for r in records:
        buckets[(r.language, r.split or "all")].append(r)
    split_rank = {s: i for i, s in enumerate(SPLITS)}
    keys = sorted(buckets, key=lambda k: (k[0], split_rank.get(k[1], len(SPLITS)), k[1]))
    groups = [_group(buckets[k], *k) for k in keys]
    return StatsTable(groups, _group(records, "all", "all"))
