"""Command-line interface.

Subcommands: ``extract`` (descriptor tracks), ``embed`` (feature dump),
``evaluate`` (pair / word experiments with JSON, CSV and figure output),
``project`` (t-SNE coordinates and scatter plot), and ``synth``
(deterministic synthetic rhythm corpus).

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .audio import FrameConfig, extract_tracks, load_wav, write_track_csv
from .embedding import Normalization, PeConfig, PitchScope
from .errors import MalformedManifest, PeakembError
from .functionals import PeakPicking
from .harness import (
    ExtractionConfig,
    FeatureSet,
    aggregate_report,
    compute_tracks,
    extract_features,
    load_manifest,
    run_pair_experiment,
    run_word_experiment,
    write_report_csv,
    write_report_json,
)
from .metrics import LabeledPointSet
from .synth import synthesize_rhythm_corpus
from .tsne import TsneConfig, tsne_project


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; we reserve 2 for data errors
    def error(self, message):
        raise UsageError(message)


CONFIG_KEYS = {
    "frame_length_ms": float,
    "hop_ms": float,
    "f0_floor_hz": float,
    "f0_ceil_hz": float,
    "voicing_threshold": float,
    "chunk_count": int,
    "smooth_window_frames": int,
    "normalization": str,
    "pitch_scope": str,
    "peak_threshold_db": float,
    "peak_min_separation_ms": float,
}


def _load_config_file(path) -> dict:
    """Parse a flat `key = value` config file ('#' starts a comment)."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in CONFIG_KEYS:
            raise UsageError(
                f"{path}:{lineno}: unknown key {key!r} "
                f"(known: {', '.join(sorted(CONFIG_KEYS))})"
            )
        try:
            values[key] = CONFIG_KEYS[key](val)
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def _add_extraction_options(parser: argparse.ArgumentParser) -> None:
    grp = parser.add_argument_group("extraction options (override config file)")
    grp.add_argument("--config", help="key = value config file")
    grp.add_argument("--frame-ms", type=float, dest="frame_length_ms")
    grp.add_argument("--hop-ms", type=float, dest="hop_ms")
    grp.add_argument("--chunk-count", type=int, dest="chunk_count")
    grp.add_argument("--smooth-window", type=int, dest="smooth_window_frames")
    grp.add_argument(
        "--normalization", choices=["minmax", "zscore"], dest="normalization"
    )
    grp.add_argument(
        "--pitch-scope", choices=["voiced", "all"], dest="pitch_scope"
    )


def _build_extraction_config(args) -> ExtractionConfig:
    values = _load_config_file(args.config) if args.config else {}
    for key in CONFIG_KEYS:
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            values[key] = flag_val
    frame = FrameConfig(
        frame_length_ms=values.get("frame_length_ms", 40.0),
        hop_ms=values.get("hop_ms", 10.0),
        f0_floor_hz=values.get("f0_floor_hz", 60.0),
        f0_ceil_hz=values.get("f0_ceil_hz", 500.0),
        voicing_threshold=values.get("voicing_threshold", 0.45),
    )
    pe = PeConfig(
        chunk_count=values.get("chunk_count", 10),
        smooth_window_frames=values.get("smooth_window_frames", 5),
        normalization=Normalization(values.get("normalization", "minmax")),
        pitch_scope=PitchScope(values.get("pitch_scope", "voiced")),
    )
    picking = PeakPicking(
        threshold_db=values.get("peak_threshold_db", 1.0),
        min_separation_ms=values.get("peak_min_separation_ms", 100.0),
        smooth_window_frames=values.get("smooth_window_frames", 5),
    )
    return ExtractionConfig(
        frame=frame,
        pe=pe,
        picking=picking,
        standardize=getattr(args, "standardize", False),
        max_skip_frac=getattr(args, "max_skip_frac", 0.1),
    )


def _parse_feature_sets(spec: str) -> list[FeatureSet]:
    if spec == "all":
        return list(FeatureSet)
    return [FeatureSet.from_name(name.strip()) for name in spec.split(",")]


def cmd_extract(args) -> int:
    cfg = _build_extraction_config(args)
    manifest = load_manifest(args.manifest)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    tracks, skipped = compute_tracks(manifest, cfg, workers=args.workers)

    with open(out_dir / "tracks_summary.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["utterance_id", "group_label", "n_frames", "voiced_frac", "duration_s"]
        )
        for entry in manifest.entries:
            pair = tracks.get(entry.utterance_id)
            if pair is None:
                continue
            pitch, _ = pair
            writer.writerow(
                [
                    entry.utterance_id,
                    entry.group_label,
                    len(pitch),
                    f"{float(np.mean(pitch.voiced)):.6f}",
                    f"{pitch.duration_s:.6f}",
                ]
            )
    if args.dump_tracks:
        for entry in manifest.entries:
            pair = tracks.get(entry.utterance_id)
            if pair is not None:
                write_track_csv(*pair, out_dir / f"{entry.utterance_id}_lld.csv")
    for uid, reason in skipped:
        print(f"skipped {uid}: {reason}", file=sys.stderr)
    print(f"extracted {len(tracks)}/{len(manifest)} utterances -> {out_dir}")
    return 0


def cmd_embed(args) -> int:
    cfg = _build_extraction_config(args)
    manifest = load_manifest(args.manifest)
    feature_set = FeatureSet.from_name(args.features)
    table = extract_features(manifest, feature_set, cfg, workers=args.workers)

    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if feature_set is FeatureSet.BASELINE:
            writer.writerow(
                ["utterance_id", "label", "peak_rate", "v_mean", "v_std",
                 "uv_mean", "uv_std", "psyl_rate"]
            )
            for uid, lab, vec in zip(table.ids, table.labels, table.vectors):
                writer.writerow([uid, lab] + [repr(float(v)) for v in vec])
        else:
            dim = table.vectors.shape[1] if len(table.ids) else 0
            writer.writerow(
                ["utterance_id", "label", "descriptor_set"]
                + [f"v{i}" for i in range(dim)]
            )
            for uid, lab, vec in zip(table.ids, table.labels, table.vectors):
                writer.writerow(
                    [uid, lab, feature_set.value] + [repr(float(v)) for v in vec]
                )
    for uid, reason in table.skipped:
        print(f"skipped {uid}: {reason}", file=sys.stderr)
    print(f"wrote {len(table.ids)} feature rows -> {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _build_extraction_config(args)
    manifest = load_manifest(args.manifest)
    feature_sets = _parse_feature_sets(args.features)

    # read audio once, share descriptor tracks across feature sets
    tracks, track_skips = compute_tracks(manifest, cfg, workers=args.workers)
    pair_results, partition_results = [], []
    for fs in feature_sets:
        if args.mode == "pairs":
            pair_results.append(
                run_pair_experiment(
                    manifest, fs, cfg, tracks=tracks, track_skips=track_skips
                )
            )
        else:
            partition_results.append(
                run_word_experiment(
                    manifest, fs, cfg, tracks=tracks, track_skips=track_skips
                )
            )
    report = aggregate_report(pair_results, partition_results)
    write_report_json(report, args.out)
    print(f"report -> {args.out}")
    if args.csv:
        write_report_csv(report, args.csv)
        print(f"csv -> {args.csv}")
    if args.figures:
        from .plots import save_report_figures

        for path in save_report_figures(report, args.figures):
            print(f"figure -> {path}")
    for fs in sorted(report.averages):
        mp = report.averages[fs]
        print(f"{fs:12s} SC {mp.sc:+.4f}  GSI {mp.gsi:.4f}")
    return 0


def _read_embeddings_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        rows = list(reader)
    if header is None or len(header) < 3:
        raise MalformedManifest(f"{path}: not an embedding dump")
    try:
        id_col = header.index("utterance_id")
        label_col = header.index("label")
    except ValueError as exc:
        raise MalformedManifest(
            f"{path}: embedding dump needs utterance_id and label columns"
        ) from exc
    skip = {id_col, label_col}
    if "descriptor_set" in header:
        skip.add(header.index("descriptor_set"))
    value_cols = [i for i in range(len(header)) if i not in skip]
    ids, labels, vectors = [], [], []
    for row in rows:
        if not row:
            continue
        ids.append(row[id_col])
        labels.append(row[label_col])
        vectors.append([float(row[i]) for i in value_cols])
    if not ids:
        raise MalformedManifest(f"{path}: embedding dump holds no rows")
    return ids, np.array(labels), np.array(vectors, dtype=np.float64)


def cmd_project(args) -> int:
    ids, labels, vectors = _read_embeddings_csv(args.embeddings)
    cfg = TsneConfig(
        perplexity=args.perplexity, iterations=args.iterations, seed=args.seed
    )
    projection = tsne_project(LabeledPointSet(vectors, labels), cfg)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["utterance_id", "label", "x", "y"])
        for uid, lab, (x, y) in zip(ids, labels, projection.coordinates):
            writer.writerow([uid, lab, repr(float(x)), repr(float(y))])
    print(f"coordinates -> {args.out} (final KL {projection.final_kl:.4f})")
    if args.svg:
        from .plots import save_projection_figure

        save_projection_figure(projection, args.svg, title=Path(args.embeddings).stem)
        print(f"figure -> {args.svg}")
    return 0


def _parse_profiles(text: str):
    profiles = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        profiles.append(tuple(float(v) for v in part.split(",")))
    if not profiles:
        raise UsageError("--profiles needs at least one class, e.g. '0.2,0.8'")
    return profiles


def _parse_duration_range(text: str):
    lo, _, hi = text.partition(":")
    try:
        return float(lo), float(hi or lo)
    except ValueError as exc:
        raise UsageError(f"bad duration range {text!r}; expected LO:HI") from exc


def cmd_synth(args) -> int:
    profiles = _parse_profiles(args.profiles)
    labels = args.labels.split(",") if args.labels else None
    manifest = synthesize_rhythm_corpus(
        class_profiles=profiles,
        n_per_class=args.n,
        duration_range_s=_parse_duration_range(args.dur),
        jitter_frac=args.jitter,
        seed=args.seed,
        out_dir=args.out,
        sample_rate=args.sample_rate,
        class_labels=labels,
        partition_tag=args.partition,
    )
    print(f"synthesized {len(manifest)} utterances -> {Path(args.out) / 'manifest.csv'}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(
        prog="peakemb",
        description="Peak embeddings of speech rhythm and their separability metrics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="compute pitch/loudness descriptor tracks")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dump-tracks", action="store_true",
                   help="also write one per-frame CSV per utterance")
    p.add_argument("--workers", type=int, default=1)
    _add_extraction_options(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("embed", help="dump feature vectors for one feature set")
    p.add_argument("--manifest", required=True)
    p.add_argument(
        "--features", required=True,
        choices=[fs.value for fs in FeatureSet],
    )
    p.add_argument("--out", required=True, help="output CSV")
    p.add_argument("--workers", type=int, default=1)
    _add_extraction_options(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("evaluate", help="run the pair or word experiment")
    p.add_argument("--manifest", required=True)
    p.add_argument("--mode", required=True, choices=["pairs", "words"])
    p.add_argument("--features", default="all",
                   help="'all' or comma-separated feature set names")
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--csv", help="also write a delimited report")
    p.add_argument("--figures", help="directory for summary figures")
    p.add_argument("--standardize", action="store_true",
                   help="z-score features before distance computation")
    p.add_argument("--max-skip-frac", type=float, default=0.1,
                   help="abort a pair when a group loses more than this fraction")
    p.add_argument("--workers", type=int, default=1)
    _add_extraction_options(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("project", help="t-SNE projection of an embedding dump")
    p.add_argument("--embeddings", required=True, help="CSV from the embed command")
    p.add_argument("--perplexity", type=float, default=15.0)
    p.add_argument("--iterations", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="coordinates CSV")
    p.add_argument("--svg", help="scatter plot output (any matplotlib format)")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("synth", help="generate a synthetic rhythm corpus")
    p.add_argument("--profiles", required=True,
                   help="class peak positions, e.g. '0.2,0.8;0.45,0.55'")
    p.add_argument("--n", type=int, required=True, help="utterances per class")
    p.add_argument("--dur", default="0.9:1.71", help="duration range LO:HI seconds")
    p.add_argument("--jitter", type=float, default=0.03)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--sample-rate", type=int, default=16000)
    p.add_argument("--labels", help="comma-separated class labels")
    p.add_argument("--partition", default="", help="partition tag for all entries")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except PeakembError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to exit code
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
