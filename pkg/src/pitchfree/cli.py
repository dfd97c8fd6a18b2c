"""Command-line front end: ``pitchfree convert|analyze|corpus``."""

from __future__ import annotations

import argparse
import csv
import hashlib
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import corpus, metrics, pitch
from .audio_io import ENCODINGS, read_wav, resample, write_wav
from .errors import ManifestError, PitchfreeError
from .signal_core import FrameConfig
from .whisperize import WhisperizeConfig, to_whisper_lpc, whisper_effect, whisperize_detailed

log = logging.getLogger("pitchfree")

METHODS = ("pitch_free", "whisper_effect", "lpc")
MANIFEST_SUFFIXES = (".jsonl", ".manifest")


@dataclass(frozen=True)
class InputItem:
    path: Path
    rel: str  # forward-slash relative path, used for naming and seeding
    utterance_id: str
    split: str = ""


@dataclass
class JobConfig:
    inputs: list[InputItem]
    out_dir: Path
    method: str = "pitch_free"
    rate: int = 24000
    seed: int = 0
    workers: int = 1
    encoding: str = "pcm16"
    gain_match: bool = True
    crossfade_ms: float = 10.0
    cutoff_hz: float = 800.0
    noise_gain: float = 0.02
    lpc_order: int = 24

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("working sample rate must be positive")
        if self.workers < 1:
            raise ValueError("worker count must be >= 1")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")


def discover_inputs(spec: str) -> list[InputItem]:
    """Expand a WAV file, a directory (recursive) or a manifest into input items."""
    p = Path(spec)
    if p.is_dir():
        files = sorted(q for q in p.rglob("*") if q.is_file() and q.suffix.lower() == ".wav")
        return [_item(q, q.relative_to(p).as_posix()) for q in files]
    if p.suffix.lower() in MANIFEST_SUFFIXES:
        items = []
        for rec in corpus.load_manifest(p):
            audio = Path(rec.audio_path)
            if not audio.is_absolute():
                audio = p.parent / audio
            rel = f"{rec.source_dataset}/{rec.audio_path}".replace("\\", "/")
            items.append(InputItem(audio, rel, f"{rec.source_dataset}/{rec.id}", rec.split or ""))
        return items
    return [_item(p, p.name)]


def _item(path: Path, rel: str) -> InputItem:
    return InputItem(path, rel, rel[:-4] if rel.lower().endswith(".wav") else rel)


def file_seed(seed: int, rel: str) -> int:
    """Per-file seed from the global seed and the relative path."""
    digest = hashlib.sha256(f"{int(seed)}\x00{rel}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def _output_path(out_dir: Path, rel: str) -> Path:
    target = out_dir / rel
    return target.with_suffix(".wav")


def convert_one(job: JobConfig, item: InputItem) -> dict:
    seed = file_seed(job.seed, item.rel)
    out_path = _output_path(job.out_dir, item.rel)
    result = {"input": str(item.path), "output": str(out_path), "method": job.method, "seed": seed,
              "segments": 0, "status": "ok", "error": ""}
    try:
        w = resample(read_wav(item.path), job.rate)
        if job.method == "pitch_free":
            cfg = WhisperizeConfig(crossfade_ms=job.crossfade_ms, noise_gain_match=job.gain_match, seed=seed)
            res = whisperize_detailed(w, cfg)
            y, result["segments"] = res.waveform, len(res.segments)
        elif job.method == "whisper_effect":
            y = whisper_effect(w, job.cutoff_hz, job.noise_gain, seed)
        else:
            y = to_whisper_lpc(w, job.lpc_order, FrameConfig(), seed)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        write_wav(y, out_path, job.encoding)
    except (PitchfreeError, OSError, ValueError) as exc:
        result.update(status="error", error=f"{type(exc).__name__}: {exc}", output="")
    return result


def _convert_star(args):
    return convert_one(*args)


def cmd_convert(job: JobConfig) -> int:
    job.out_dir.mkdir(parents=True, exist_ok=True)
    tasks = [(job, item) for item in job.inputs]
    if job.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=job.workers) as pool:
            results = list(pool.map(_convert_star, tasks))
    else:
        results = [convert_one(*t) for t in tasks]

    n_err = 0
    with open(job.out_dir / "convert.log", "w", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t")
        writer.writerow(["status", "input", "output", "method", "seed", "segments", "error"])
        for r in results:
            writer.writerow([r["status"], r["input"], r["output"], r["method"], r["seed"], r["segments"], r["error"]])
            if r["status"] != "ok":
                n_err += 1
                log.error("%s: %s", r["input"], r["error"])
    log.info("converted %d of %d file(s)", len(results) - n_err, len(results))
    return 1 if n_err else 0


def read_ref_map(path) -> dict[str, Path]:
    """CSV with ``utterance_id,reference``; relative references resolve against the CSV's folder."""
    base = Path(path).parent
    refs = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            ref = Path(row["reference"])
            refs[row["utterance_id"]] = ref if ref.is_absolute() else base / ref
    return refs


def cmd_analyze(inputs, out_dir: Path, ref_map=None, f0_dump=False, rms=False, spectrogram=False,
                import_metrics=None, cfg: FrameConfig = FrameConfig()) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    report = metrics.MetricsReport()
    refs = read_ref_map(ref_map) if ref_map else {}
    n_err = 0
    for item in inputs:
        try:
            w = read_wav(item.path)
            track = pitch.detect_f0(w, cfg)
            rec = metrics.UtteranceMetrics(item.utterance_id, item.split, w.duration, pitch.vtr(track))
            profile = metrics.rms_profile(w)
            rec.rms_dbfs_mean = float(profile[:, 1].mean()) if len(profile) else None
            stem = item.utterance_id.replace("/", "__")
            if ref_map:
                ref = refs.get(item.utterance_id)
                if ref is None:
                    log.warning("%s: no reference in %s; mcd left empty", item.utterance_id, ref_map)
                else:
                    try:
                        rec.mcd_db = metrics.mcd(read_wav(ref), w, cfg)
                    except (PitchfreeError, OSError) as exc:
                        log.warning("%s: mcd skipped (%s)", item.utterance_id, exc)
            if f0_dump:
                (out_dir / "f0").mkdir(exist_ok=True)
                pitch.write_f0_track(track, out_dir / "f0" / f"{stem}.csv")
            if rms:
                (out_dir / "rms").mkdir(exist_ok=True)
                with open(out_dir / "rms" / f"{stem}.csv", "w", newline="") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(["time_s", "rms_dbfs"])
                    writer.writerows((f"{t:.6f}", f"{v:.4f}") for t, v in profile)
            if spectrogram:
                (out_dir / "spectrograms").mkdir(exist_ok=True)
                metrics.render_spectrogram(w, cfg, out_dir / "spectrograms" / f"{stem}.png")
            report.add(rec)
        except (PitchfreeError, OSError, ValueError) as exc:
            n_err += 1
            log.error("%s: %s", item.path, exc)
    if import_metrics:
        report.import_columns(import_metrics)
    report.write_csv(out_dir / "metrics.csv")
    return 1 if n_err else 0


def cmd_corpus(sub: str, manifest, out, seed: int = 0) -> int:
    records = corpus.load_manifest(manifest)
    if sub == "stats":
        corpus.corpus_stats(records).write_csv(out)
    elif sub == "split":
        corpus.save_manifest(corpus.assign_splits(records, seed), out)
    elif sub == "pair":
        with open(out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["source_dataset", "speaker_id", "whisper_id", "normal_id"])
            for wr, nr in corpus.pair_styles(records):
                writer.writerow([wr.source_dataset, wr.speaker_id, wr.id, nr.id if nr else ""])
    else:
        raise ValueError(f"unknown corpus subcommand {sub!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pitchfree", description="Pitch-free whisper conversion toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("convert", help="convert audio files to whispered speech")
    p.add_argument("--in", dest="inputs", required=True, help="WAV file, directory or manifest")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--method", choices=METHODS, default="pitch_free")
    p.add_argument("--rate", type=int, default=24000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-gain-match", dest="gain_match", action="store_false")
    p.add_argument("--crossfade-ms", type=float, default=10.0)
    p.add_argument("--cutoff-hz", type=float, default=800.0)
    p.add_argument("--noise-gain", type=float, default=0.02)
    p.add_argument("--lpc-order", type=int, default=24)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--encoding", choices=ENCODINGS, default="pcm16")

    p = subs.add_parser("analyze", help="compute VTR / MCD / level metrics")
    p.add_argument("--in", dest="inputs", required=True)
    p.add_argument("--ref-map")
    p.add_argument("--f0-dump", action="store_true")
    p.add_argument("--rms", action="store_true")
    p.add_argument("--spectrogram", action="store_true")
    p.add_argument("--import-metrics", help="CSV of externally computed metric columns")
    p.add_argument("--out", required=True, type=Path)

    p = subs.add_parser("corpus", help="manifest statistics, splits and pairing")
    p.add_argument("action", choices=("stats", "split", "pair"))
    p.add_argument("--manifest", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        if args.command == "convert":
            job = JobConfig(discover_inputs(args.inputs), args.out, args.method, args.rate, args.seed,
                            args.workers, args.encoding, args.gain_match, args.crossfade_ms,
                            args.cutoff_hz, args.noise_gain, args.lpc_order)
            return cmd_convert(job)
        if args.command == "analyze":
            return cmd_analyze(discover_inputs(args.inputs), args.out, args.ref_map, args.f0_dump,
                               args.rms, args.spectrogram, args.import_metrics)
        return cmd_corpus(args.action, args.manifest, args.out, args.seed)
    except ManifestError as exc:
        print(f"manifest error: {exc}", file=sys.stderr)
        return 2
    except (PitchfreeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
