import csv
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pitchfree.corpus import (
    STATS_HEADER,
    assign_splits,
    corpus_stats,
    load_manifest,
    pair_styles,
    parse_manifest,
    save_manifest,
    split_by_speaker,
    split_sizes,
)
from pitchfree.errors import DuplicateRecord, ManifestError, TooFewSpeakers

from .conftest import en_train_fixture, rec


def speakers_fixture(n, per_speaker=2):
    return [rec(f"u{s}_{i}", speaker=f"spk{s:03d}") for s in range(n) for i in range(per_speaker)]


# --- manifest I/O -------------------------------------------------------------


def test_empty_manifest(tmp_path):
    p = tmp_path / "m.jsonl"
    p.write_text("")
    assert load_manifest(p) == []


def test_roundtrip_bit_identical(tmp_path):
    r = rec("a1", transcript="hello, wörld", gender="F", pair_id="p1")
    p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    save_manifest([r], p1)
    loaded = load_manifest(p1)
    assert loaded == [r]
    save_manifest(loaded, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_headerless_manifest_accepted():
    line = rec("a").to_json()
    assert parse_manifest([line]) == [rec("a")]


def test_duplicate_names_second_line(tmp_path):
    p = tmp_path / "m.jsonl"
    save_manifest([rec("a"), rec("b"), rec("a", speaker="s2")], p)
    with pytest.raises(DuplicateRecord) as info:
        load_manifest(p)
    # header is line 1, records start on line 2
    assert info.value.line == 4
    assert info.value.first_line == 2
    assert info.value.key == ("ds", "a")


def test_same_id_in_other_dataset_is_fine():
    lines = [rec("a").to_json(), rec("a", dataset="other").to_json()]
    assert len(parse_manifest(lines)) == 2


@pytest.mark.parametrize("bad,reason", [
    ("{not json", "invalid JSON"),
    ('{"id": "x"}', "missing field"),
    ("[1, 2]", "not a JSON object"),
])
def test_malformed_lines(bad, reason):
    with pytest.raises(ManifestError) as info:
        parse_manifest([rec("a").to_json(), bad])
    assert info.value.line == 2
    assert reason in info.value.reason


def test_bad_values_rejected():
    good = rec("a").to_json()
    with pytest.raises(ManifestError):
        parse_manifest([good.replace('"duration_s": 1.0', '"duration_s": 0')])
    with pytest.raises(ManifestError):
        parse_manifest([good.replace('"whisper"', '"shout"')])
    with pytest.raises(ManifestError):
        parse_manifest([good.replace('"id": "a"', '"id": "a", "colour": 1')])


# --- splits ------------------------------------------------------------------


def test_split_10_speakers():
    for seed in (0, 1, 99):
        a = split_by_speaker(speakers_fixture(10), seed)
        assert a.counts() == {"train": 6, "valid": 2, "test": 2}


def test_split_77_speakers():
    # floor(77 * 0.2) = 15 for valid and test, remainder 47 to train
    assert split_sizes(77) == (47, 15, 15)
    a = split_by_speaker(speakers_fixture(77), seed=3)
    assert a.counts() == {"train": 47, "valid": 15, "test": 15}


def test_split_deterministic():
    recs = speakers_fixture(20)
    assert split_by_speaker(recs, 7).mapping == split_by_speaker(list(reversed(recs)), 7).mapping


def test_split_too_few():
    with pytest.raises(TooFewSpeakers):
        split_by_speaker(speakers_fixture(4), 0)


def test_split_records_inherit():
    recs = speakers_fixture(10, per_speaker=3)
    out = assign_splits(recs, seed=5)
    a = split_by_speaker(recs, 5)
    assert all(r.split == a[r.speaker_id] for r in out)


def test_official_splits_honoured():
    official = [rec(f"o{i}", speaker=f"x{i}", dataset="official", split=("train", "test")[i % 2]) for i in range(4)]
    resplit = speakers_fixture(10)
    out = assign_splits(official + resplit, seed=1)
    assert out[:4] == official
    assert all(r.split is not None for r in out)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(5, 120), seed=st.integers(0, 2**32 - 1))
def test_split_disjoint_and_sized(n, seed):
    a = split_by_speaker(speakers_fixture(n, 1), seed)
    sets = [set(a.speakers(s)) for s in ("train", "valid", "test")]
    assert not (sets[0] & sets[1] or sets[0] & sets[2] or sets[1] & sets[2])
    assert sum(len(s) for s in sets) == n
    # valid and test are floored; train takes up to two fractional remainders
    assert len(sets[1]) == len(sets[2]) == math.floor(0.2 * n + 1e-9)
    assert 0 <= len(sets[0]) - 0.6 * n < 2


@settings(max_examples=50, deadline=None)
@given(n=st.integers(5, 40), seed=st.integers(0, 1000), who=st.integers(0, 39))
def test_split_stability(n, seed, who):
    recs = speakers_fixture(n)
    before = split_by_speaker(recs, seed).mapping
    extra = rec("new_utt", speaker=f"spk{who % n:03d}")
    assert split_by_speaker(recs + [extra], seed).mapping == before


# --- pairing -----------------------------------------------------------------


def test_pairs_fully_paired():
    recs = [rec("a", style="whisper", pair_id="p1"), rec("b", style="normal", pair_id="p1"),
            rec("c", style="whisper", pair_id="p2"), rec("d", style="normal", pair_id="p2")]
    pairs = pair_styles(recs)
    assert [(w.id, n.id) for w, n in pairs] == [("a", "b"), ("c", "d")]


def test_pairs_whisper_only():
    pairs = pair_styles([rec("a"), rec("b")])
    assert [n for _, n in pairs] == [None, None]


def test_pairs_one_orphan():
    recs = [rec("w1", pair_id="1"), rec("n1", style="normal", pair_id="1"),
            rec("w2", pair_id="2"),
            rec("w3", pair_id="3"), rec("n3", style="normal", pair_id="3"),
            rec("n2x", style="normal", speaker="other", pair_id="2")]
    pairs = pair_styles(recs)
    orphans = [w.id for w, n in pairs if n is None]
    assert orphans == ["w2"]
    assert len(pairs) == 3


@settings(max_examples=50, deadline=None)
@given(styles=st.lists(st.sampled_from(["whisper", "normal"]), max_size=30))
def test_pairing_totality(styles):
    recs = [rec(f"u{i}", style=s, pair_id=str(i // 2)) for i, s in enumerate(styles)]
    assert len(pair_styles(recs)) == styles.count("whisper")


# --- statistics ----------------------------------------------------------------


def test_stats_empty(tmp_path):
    table = corpus_stats([])
    assert table.groups == []
    assert table.total.file_count == 0 and table.total.hours == 0.0 and table.total.avg_seconds == 0.0
    path = tmp_path / "s.csv"
    table.write_csv(path)
    assert list(csv.reader(open(path))) == [list(STATS_HEADER)]


def test_stats_two_hours():
    table = corpus_stats([rec("a", duration=3600.0), rec("b", duration=3600.0)])
    g = table.get("en", "all")
    assert g.hours == 2.0 and g.avg_seconds == 3600.0 and g.file_count == 2


def test_stats_en_train_fixture(tmp_path):
    table = corpus_stats(en_train_fixture())
    g = table.get("en", "train")
    assert g.file_count == 20694
    assert f"{g.hours:.2f}" == "29.62"
    assert f"{g.avg_seconds:.2f}" == "5.15"
    assert g.speaker_label() == "78M 87F"
    path = tmp_path / "t.csv"
    table.write_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[1] == ["en", "train", "20694", "29.62", "5.15", "78M 87F"]


@settings(max_examples=30, deadline=None)
@given(a=st.lists(st.floats(0.01, 1e4), max_size=20), b=st.lists(st.floats(0.01, 1e4), max_size=20))
def test_stats_additivity(a, b):
    ra = [rec(f"a{i}", duration=d) for i, d in enumerate(a)]
    rb = [rec(f"b{i}", duration=d) for i, d in enumerate(b)]
    union = corpus_stats(ra + rb).total.hours
    assert math.isclose(union, corpus_stats(ra).total.hours + corpus_stats(rb).total.hours, abs_tol=1e-9)
