"""Experiment harness: manifests, batch feature extraction, and reports.

Drives the two evaluation protocols end to end:

* pair mode: separability metrics for every unordered pair of group
  labels, averaged per feature set and ranked best/worst.
* word mode: metrics for the rhythm classes inside each partition tag,
  averaged across partitions.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from pathlib import Path

import numpy as np

from .audio import FrameConfig, extract_tracks, load_wav
from .embedding import CombineMode, PeConfig, combine, embed_track
from .errors import (
    DuplicateId,
    EmptyResults,
    MalformedManifest,
    MissingAudio,
    NoPartitions,
    PeakembError,
    SingleClassPartition,
)
from .functionals import PeakPicking, compute_functionals
from .metrics import LabeledPointSet, MetricPair, evaluate_metrics, standardize

MANIFEST_COLUMNS = [
    "audio_path",
    "utterance_id",
    "speaker_id",
    "group_label",
    "partition_tag",
]

RANKING_SIZE = 6


class FeatureSet(Enum):
    """The five feature sets every experiment can run."""

    BASELINE = "baseline"
    PE_PITCH = "pe-pitch"
    PE_LOUDNESS = "pe-loudness"
    PE_CONCAT = "pe-concat"
    PE_SUM = "pe-sum"

    @classmethod
    def from_name(cls, name: str) -> "FeatureSet":
        for fs in cls:
            if fs.value == name:
                return fs
        raise MalformedManifest(
            f"unknown feature set {name!r}; choose from "
            f"{[fs.value for fs in cls]}"
        )


@dataclass(frozen=True)
class ManifestEntry:
    audio_path: Path
    utterance_id: str
    speaker_id: str
    group_label: str
    partition_tag: str


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry]

    def groups(self) -> dict[str, list[ManifestEntry]]:
        out: dict[str, list[ManifestEntry]] = {}
        for e in self.entries:
            out.setdefault(e.group_label, []).append(e)
        return out

    def partitions(self) -> dict[str, list[ManifestEntry]]:
        out: dict[str, list[ManifestEntry]] = {}
        for e in self.entries:
            if e.partition_tag:
                out.setdefault(e.partition_tag, []).append(e)
        return out

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class ExtractionConfig:
    """Bundle of all knobs the extraction pipeline needs."""

    frame: FrameConfig = field(default_factory=FrameConfig)
    pe: PeConfig = field(default_factory=PeConfig)
    picking: PeakPicking = field(default_factory=PeakPicking)
    standardize: bool = False
    max_skip_frac: float = 0.1


def load_manifest(path) -> DatasetManifest:
    """Read and validate a dataset manifest CSV.

    Relative audio paths resolve against the manifest's directory. Every
    utterance id must be unique, every audio file must exist, and every
    group label needs at least two entries.
    """
    path = Path(path)
    base = path.parent
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [
                c.strip() for c in reader.fieldnames
            ] != MANIFEST_COLUMNS:
                raise MalformedManifest(
                    f"{path}: header must be {','.join(MANIFEST_COLUMNS)}"
                )
            rows = list(reader)
    except OSError as exc:
        raise MalformedManifest(f"{path}: {exc}") from exc
    if not rows:
        raise MalformedManifest(f"{path}: manifest has no entries")

    entries = []
    seen: set[str] = set()
    for i, row in enumerate(rows, start=2):
        if any(row.get(c) is None for c in MANIFEST_COLUMNS):
            raise MalformedManifest(f"{path}: line {i} is incomplete")
        uid = row["utterance_id"].strip()
        if not uid:
            raise MalformedManifest(f"{path}: line {i} has an empty utterance_id")
        if uid in seen:
            raise DuplicateId(f"{path}: duplicate utterance_id {uid!r}")
        seen.add(uid)
        audio = Path(row["audio_path"].strip())
        if not audio.is_absolute():
            audio = base / audio
        if not audio.is_file():
            raise MissingAudio(f"{path}: line {i}: no such file {audio}")
        entries.append(
            ManifestEntry(
                audio_path=audio,
                utterance_id=uid,
                speaker_id=row["speaker_id"].strip(),
                group_label=row["group_label"].strip(),
                partition_tag=row["partition_tag"].strip(),
            )
        )

    manifest = DatasetManifest(entries=entries)
    for label, members in manifest.groups().items():
        if len(members) < 2:
            raise MalformedManifest(
                f"{path}: group {label!r} has {len(members)} entry; needs >= 2"
            )
    return manifest


def write_manifest(manifest: DatasetManifest, path, relative_to=None) -> None:
    """Write a manifest CSV, with audio paths relative to ``relative_to``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_COLUMNS)
        for e in manifest.entries:
            apath = e.audio_path
            if relative_to is not None:
                try:
                    apath = apath.relative_to(relative_to)
                except ValueError:
                    pass
            writer.writerow(
                [str(apath), e.utterance_id, e.speaker_id, e.group_label,
                 e.partition_tag]
            )


@dataclass
class FeatureTable:
    """Feature vectors for the utterances that survived extraction."""

    feature_set: FeatureSet
    ids: list[str]
    labels: list[str]
    partitions: list[str]
    vectors: np.ndarray
    skipped: list[tuple[str, str]]  # (utterance_id, reason)

    def subset(self, wanted_labels) -> LabeledPointSet:
        wanted = set(wanted_labels)
        keep = [i for i, lab in enumerate(self.labels) if lab in wanted]
        return LabeledPointSet(
            points=self.vectors[keep],
            labels=np.array([self.labels[i] for i in keep]),
        )

    def for_partition(self, tag: str) -> LabeledPointSet:
        keep = [i for i, p in enumerate(self.partitions) if p == tag]
        return LabeledPointSet(
            points=self.vectors[keep],
            labels=np.array([self.labels[i] for i in keep]),
        )


def compute_tracks(manifest: DatasetManifest, cfg: ExtractionConfig, workers: int = 1):
    """Pitch/loudness tracks per utterance, in manifest order.

    Returns ``(tracks, skipped)`` where ``tracks`` maps utterance_id to a
    (pitch, loudness) tuple and ``skipped`` lists per-utterance failures.
    Results are independent of ``workers``.
    """

    def one(entry: ManifestEntry):
        try:
            audio = load_wav(entry.audio_path)
            return entry.utterance_id, extract_tracks(audio, cfg.frame), None
        except PeakembError as exc:
            return entry.utterance_id, None, f"{type(exc).__name__}: {exc}"

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, manifest.entries))
    else:
        results = [one(e) for e in manifest.entries]

    tracks = {}
    skipped = []
    for uid, pair, reason in results:
        if pair is None:
            skipped.append((uid, reason))
        else:
            tracks[uid] = pair
    return tracks, skipped


def _feature_vector(feature_set: FeatureSet, pitch, loudness, cfg: ExtractionConfig):
    if feature_set is FeatureSet.BASELINE:
        return compute_functionals(pitch, loudness, cfg.picking).as_vector()
    if feature_set is FeatureSet.PE_PITCH:
        return embed_track(pitch, cfg.pe).values
    if feature_set is FeatureSet.PE_LOUDNESS:
        return embed_track(loudness, cfg.pe).values
    pe_p = embed_track(pitch, cfg.pe)
    pe_l = embed_track(loudness, cfg.pe)
    mode = CombineMode.CONCAT if feature_set is FeatureSet.PE_CONCAT else CombineMode.SUM
    return combine(pe_p, pe_l, mode).values


def extract_features(
    manifest: DatasetManifest,
    feature_set: FeatureSet,
    cfg: ExtractionConfig | None = None,
    workers: int = 1,
    tracks=None,
    track_skips=None,
) -> FeatureTable:
    """Build the feature table for one feature set.

    Utterances that fail any stage land in ``skipped`` with the failure
    reason instead of being silently dropped. Precomputed ``tracks`` (from
    :func:`compute_tracks`) are reused when given, so evaluating several
    feature sets reads the audio only once.
    """
    cfg = cfg or ExtractionConfig()
    if tracks is None:
        tracks, track_skips = compute_tracks(manifest, cfg, workers)
    track_skips = list(track_skips or [])

    ids, labels, partitions, vectors = [], [], [], []
    skipped = list(track_skips)
    for entry in manifest.entries:
        pair = tracks.get(entry.utterance_id)
        if pair is None:
            continue  # already recorded by compute_tracks
        try:
            vec = _feature_vector(feature_set, pair[0], pair[1], cfg)
        except PeakembError as exc:
            skipped.append(
                (entry.utterance_id, f"{type(exc).__name__}: {exc}")
            )
            continue
        ids.append(entry.utterance_id)
        labels.append(entry.group_label)
        partitions.append(entry.partition_tag)
        vectors.append(vec)

    matrix = np.vstack(vectors) if vectors else np.zeros((0, 1))
    if cfg.standardize and matrix.shape[0] > 0:
        matrix = standardize(matrix)
    return FeatureTable(
        feature_set=feature_set,
        ids=ids,
        labels=labels,
        partitions=partitions,
        vectors=matrix,
        skipped=skipped,
    )


@dataclass
class PairResults:
    feature_set: FeatureSet
    per_pair: dict[tuple[str, str], MetricPair]
    aborted: list[tuple[str, str, str]]  # (label_a, label_b, reason)
    skipped: list[tuple[str, str]]


@dataclass
class PartitionResults:
    feature_set: FeatureSet
    per_partition: dict[str, MetricPair]
    aborted: list[tuple[str, str]]  # (partition, reason)
    skipped: list[tuple[str, str]]


def run_pair_experiment(
    manifest: DatasetManifest,
    feature_set: FeatureSet,
    cfg: ExtractionConfig | None = None,
    workers: int = 1,
    tracks=None,
    track_skips=None,
) -> PairResults:
    """Metrics for every unordered pair of group labels.

    A pair is aborted (and listed, not computed) when either group lost
    more than ``cfg.max_skip_frac`` of its utterances to extraction
    failures, or has fewer than two surviving members.
    """
    cfg = cfg or ExtractionConfig()
    table = extract_features(
        manifest, feature_set, cfg, workers, tracks=tracks, track_skips=track_skips
    )
    group_sizes = {lab: len(ms) for lab, ms in manifest.groups().items()}
    surviving: dict[str, int] = {}
    for lab in table.labels:
        surviving[lab] = surviving.get(lab, 0) + 1

    def group_ok(label: str):
        total = group_sizes[label]
        kept = surviving.get(label, 0)
        frac_lost = (total - kept) / total
        if frac_lost > cfg.max_skip_frac:
            return f"group {label!r} lost {frac_lost:.0%} of its utterances"
        if kept < 2:
            return f"group {label!r} has {kept} surviving utterance(s)"
        return None

    per_pair: dict[tuple[str, str], MetricPair] = {}
    aborted: list[tuple[str, str, str]] = []
    for a, b in combinations(sorted(group_sizes), 2):
        reason = group_ok(a) or group_ok(b)
        if reason is not None:
            aborted.append((a, b, reason))
            continue
        per_pair[(a, b)] = evaluate_metrics(table.subset([a, b]))
    return PairResults(
        feature_set=feature_set,
        per_pair=per_pair,
        aborted=aborted,
        skipped=table.skipped,
    )


def run_word_experiment(
    manifest: DatasetManifest,
    feature_set: FeatureSet,
    cfg: ExtractionConfig | None = None,
    workers: int = 1,
    tracks=None,
    track_skips=None,
) -> PartitionResults:
    """Metrics for the rhythm classes inside each partition tag."""
    cfg = cfg or ExtractionConfig()
    partitions = manifest.partitions()
    if not partitions:
        raise NoPartitions("no manifest entry carries a partition_tag")
    for tag, members in partitions.items():
        if len({e.group_label for e in members}) < 2:
            raise SingleClassPartition(
                f"partition {tag!r} holds a single rhythm class"
            )

    table = extract_features(
        manifest, feature_set, cfg, workers, tracks=tracks, track_skips=track_skips
    )
    per_partition: dict[str, MetricPair] = {}
    aborted: list[tuple[str, str]] = []
    for tag in sorted(partitions):
        pset = table.for_partition(tag)
        if len(set(np.asarray(pset.labels).tolist())) < 2 or len(pset) < 2:
            aborted.append(
                (tag, "partition lost a rhythm class to extraction failures")
            )
            continue
        per_partition[tag] = evaluate_metrics(pset)
    return PartitionResults(
        feature_set=feature_set,
        per_partition=per_partition,
        aborted=aborted,
        skipped=table.skipped,
    )


@dataclass
class ExperimentReport:
    """Aggregated metrics, rankings and bookkeeping for one run."""

    mode: str
    per_pair: dict[str, dict[tuple[str, str], MetricPair]]
    per_partition: dict[str, dict[str, MetricPair]]
    averages: dict[str, MetricPair]
    rankings: dict[str, dict[str, dict[str, list]]]
    skipped: dict[str, list[tuple[str, str]]]
    aborted: dict[str, list]


def _rank(keyed: dict, metric: str) -> dict[str, list]:
    # ties break on the lexicographic key so rankings are deterministic
    items = [(key, getattr(mp, metric)) for key, mp in keyed.items()]
    best = sorted(items, key=lambda kv: (-kv[1], kv[0]))[:RANKING_SIZE]
    worst = sorted(items, key=lambda kv: (kv[1], kv[0]))[:RANKING_SIZE]
    return {
        "best": [[*_aslist(k), v] for k, v in best],
        "worst": [[*_aslist(k), v] for k, v in worst],
    }


def _aslist(key):
    return list(key) if isinstance(key, tuple) else [key]


def aggregate_report(
    pair_results: list[PairResults] | None = None,
    partition_results: list[PartitionResults] | None = None,
) -> ExperimentReport:
    """Average and rank per-pair / per-partition metrics per feature set."""
    pair_results = pair_results or []
    partition_results = partition_results or []
    per_pair, per_partition = {}, {}
    averages, rankings, skipped, aborted = {}, {}, {}, {}

    for res in pair_results:
        name = res.feature_set.value
        per_pair[name] = dict(res.per_pair)
        skipped[name] = list(res.skipped)
        aborted[name] = [list(t) for t in res.aborted]
        if res.per_pair:
            averages[name] = MetricPair(
                sc=float(np.mean([m.sc for m in res.per_pair.values()])),
                gsi=float(np.mean([m.gsi for m in res.per_pair.values()])),
            )
            rankings[name] = {
                "sc": _rank(res.per_pair, "sc"),
                "gsi": _rank(res.per_pair, "gsi"),
            }
    for res in partition_results:
        name = res.feature_set.value
        per_partition[name] = dict(res.per_partition)
        skipped[name] = list(res.skipped)
        aborted[name] = [list(t) for t in res.aborted]
        if res.per_partition:
            averages[name] = MetricPair(
                sc=float(np.mean([m.sc for m in res.per_partition.values()])),
                gsi=float(np.mean([m.gsi for m in res.per_partition.values()])),
            )
            rankings[name] = {
                "sc": _rank(res.per_partition, "sc"),
                "gsi": _rank(res.per_partition, "gsi"),
            }

    if not averages:
        raise EmptyResults("no pair or partition produced metrics")
    mode = "pairs" if pair_results else "words"
    return ExperimentReport(
        mode=mode,
        per_pair=per_pair,
        per_partition=per_partition,
        averages=averages,
        rankings=rankings,
        skipped=skipped,
        aborted=aborted,
    )


def report_to_dict(report: ExperimentReport) -> dict:
    """JSON-serializable view of a report (full float precision)."""
    return {
        "mode": report.mode,
        "per_pair": {
            fs: [
                {"label_a": a, "label_b": b, "sc": mp.sc, "gsi": mp.gsi}
                for (a, b), mp in sorted(pairs.items())
            ]
            for fs, pairs in report.per_pair.items()
        },
        "per_partition": {
            fs: [
                {"partition": tag, "sc": mp.sc, "gsi": mp.gsi}
                for tag, mp in sorted(parts.items())
            ]
            for fs, parts in report.per_partition.items()
        },
        "averages": {
            fs: {"sc": mp.sc, "gsi": mp.gsi}
            for fs, mp in sorted(report.averages.items())
        },
        "rankings": report.rankings,
        "skipped": {
            fs: [{"utterance_id": uid, "reason": why} for uid, why in rows]
            for fs, rows in report.skipped.items()
        },
        "aborted": report.aborted,
    }


def write_report_json(report: ExperimentReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_to_dict(report), fh, indent=2)
        fh.write("\n")


def write_report_csv(report: ExperimentReport, path) -> None:
    """Delimited view: one row per pair/partition plus average rows."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["feature_set", "kind", "label_a", "label_b", "partition", "sc", "gsi"]
        )
        for fs, pairs in sorted(report.per_pair.items()):
            for (a, b), mp in sorted(pairs.items()):
                writer.writerow([fs, "pair", a, b, "", repr(mp.sc), repr(mp.gsi)])
        for fs, parts in sorted(report.per_partition.items()):
            for tag, mp in sorted(parts.items()):
                writer.writerow(
                    [fs, "partition", "", "", tag, repr(mp.sc), repr(mp.gsi)]
                )
        for fs, mp in sorted(report.averages.items()):
            writer.writerow([fs, "average", "", "", "", repr(mp.sc), repr(mp.gsi)])
