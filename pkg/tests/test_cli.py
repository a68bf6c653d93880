import csv
import json

import numpy as np
import pytest

from peakemb.cli import main

from conftest import write_pcm16, sawtooth


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("clicorpus")
    rc = main([
        "synth",
        "--profiles", "0.2,0.8;0.45,0.55",
        "--n", "6",
        "--dur", "0.6:0.9",
        "--jitter", "0.02",
        "--seed", "11",
        "--out", str(out),
    ])
    assert rc == 0
    return out


def test_synth_writes_manifest(corpus_dir):
    manifest = corpus_dir / "manifest.csv"
    assert manifest.is_file()
    with open(manifest) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 12
    assert all((corpus_dir / r["audio_path"]).is_file() for r in rows)


def test_extract_summary_and_dump(corpus_dir, tmp_path):
    out = tmp_path / "tracks"
    rc = main([
        "extract", "--manifest", str(corpus_dir / "manifest.csv"),
        "--out", str(out), "--dump-tracks",
    ])
    assert rc == 0
    assert (out / "tracks_summary.csv").is_file()
    dumps = list(out.glob("*_lld.csv"))
    assert len(dumps) == 12
    header = dumps[0].read_text().splitlines()[0]
    assert header == "frame_index,time_s,pitch_hz,voiced,loudness_db"


def test_embed_and_project(corpus_dir, tmp_path):
    emb = tmp_path / "emb.csv"
    rc = main([
        "embed", "--manifest", str(corpus_dir / "manifest.csv"),
        "--features", "pe-loudness", "--out", str(emb),
    ])
    assert rc == 0
    with open(emb) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 12
    assert rows[0]["descriptor_set"] == "pe-loudness"
    assert sum(1 for k in rows[0] if k.startswith("v")) == 10

    coords = tmp_path / "coords.csv"
    svg = tmp_path / "plot.svg"
    rc = main([
        "project", "--embeddings", str(emb),
        "--perplexity", "3", "--seed", "5", "--iterations", "300",
        "--out", str(coords), "--svg", str(svg),
    ])
    assert rc == 0
    with open(coords) as fh:
        crows = list(csv.DictReader(fh))
    assert len(crows) == 12
    assert set(crows[0]) == {"utterance_id", "label", "x", "y"}
    assert svg.is_file() and svg.read_bytes().startswith(b"<?xml")


def test_embed_baseline_schema(corpus_dir, tmp_path):
    out = tmp_path / "base.csv"
    rc = main([
        "embed", "--manifest", str(corpus_dir / "manifest.csv"),
        "--features", "baseline", "--out", str(out),
    ])
    assert rc == 0
    header = out.read_text().splitlines()[0]
    assert header == "utterance_id,label,peak_rate,v_mean,v_std,uv_mean,uv_std,psyl_rate"


def test_evaluate_pairs_with_outputs(corpus_dir, tmp_path):
    report = tmp_path / "report.json"
    report_csv = tmp_path / "report.csv"
    figures = tmp_path / "figs"
    rc = main([
        "evaluate", "--manifest", str(corpus_dir / "manifest.csv"),
        "--mode", "pairs", "--features", "pe-loudness,baseline",
        "--out", str(report), "--csv", str(report_csv),
        "--figures", str(figures),
    ])
    assert rc == 0
    data = json.loads(report.read_text())
    assert set(data["averages"]) == {"pe-loudness", "baseline"}
    assert (figures / "averages.png").is_file()
    assert (figures / "per_comparison.png").is_file()
    assert report_csv.is_file()


def test_evaluate_words(tmp_path):
    from peakemb import synthesize_rhythm_corpus
    from peakemb.harness import DatasetManifest, write_manifest

    entries = []
    for i, tag in enumerate(["rise", "fall"]):
        m = synthesize_rhythm_corpus(
            class_profiles=[(0.3, 0.7), (0.2, 0.5, 0.8)],
            class_labels=["2syl", "3syl"],
            n_per_class=4,
            duration_range_s=(0.4, 0.6),
            jitter_frac=0.02,
            seed=3 + i,
            out_dir=tmp_path / tag,
            partition_tag=tag,
        )
        entries.extend(m.entries)
    combined = DatasetManifest(entries=entries)
    write_manifest(combined, tmp_path / "words.csv")

    report = tmp_path / "words.json"
    rc = main([
        "evaluate", "--manifest", str(tmp_path / "words.csv"),
        "--mode", "words", "--features", "pe-loudness",
        "--out", str(report),
    ])
    assert rc == 0
    data = json.loads(report.read_text())
    parts = data["per_partition"]["pe-loudness"]
    assert {p["partition"] for p in parts} == {"rise", "fall"}


def test_config_file_and_override(corpus_dir, tmp_path):
    cfg = tmp_path / "peakemb.cfg"
    cfg.write_text("chunk_count = 5\nsmooth_window_frames = 3  # comment\n")
    emb = tmp_path / "five.csv"
    rc = main([
        "embed", "--manifest", str(corpus_dir / "manifest.csv"),
        "--features", "pe-loudness", "--out", str(emb),
        "--config", str(cfg),
    ])
    assert rc == 0
    header = emb.read_text().splitlines()[0]
    assert header.endswith("v0,v1,v2,v3,v4")

    emb2 = tmp_path / "seven.csv"
    rc = main([
        "embed", "--manifest", str(corpus_dir / "manifest.csv"),
        "--features", "pe-loudness", "--out", str(emb2),
        "--config", str(cfg), "--chunk-count", "7",
    ])
    assert rc == 0
    assert emb2.read_text().splitlines()[0].endswith("v6")


# --- exit codes ---

def test_usage_error_exit_1(capsys):
    assert main(["evaluate", "--manifest", "x"]) == 1  # missing required args
    assert main(["embed", "--manifest", "m", "--features", "bogus",
                 "--out", "o"]) == 1
    cfgless = capsys.readouterr()
    assert "usage error" in cfgless.err


def test_bad_config_key_exit_1(corpus_dir, tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nope = 1\n")
    rc = main([
        "embed", "--manifest", str(corpus_dir / "manifest.csv"),
        "--features", "pe-loudness", "--out", str(tmp_path / "o.csv"),
        "--config", str(cfg),
    ])
    assert rc == 1


def test_data_error_exit_2(tmp_path, capsys):
    rc = main([
        "evaluate", "--manifest", str(tmp_path / "missing.csv"),
        "--mode", "pairs", "--out", str(tmp_path / "r.json"),
    ])
    assert rc == 2
    assert "data error" in capsys.readouterr().err


def test_data_error_on_missing_audio(tmp_path):
    path = tmp_path / "m.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["audio_path", "utterance_id", "speaker_id",
                    "group_label", "partition_tag"])
        w.writerow(["ghost.wav", "u1", "s", "g", ""])
        w.writerow(["ghost.wav", "u2", "s", "g", ""])
    rc = main([
        "evaluate", "--manifest", str(path),
        "--mode", "pairs", "--out", str(tmp_path / "r.json"),
    ])
    assert rc == 2
