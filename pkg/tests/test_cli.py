import json

import pytest

from xwalk.cli import main
from xwalk.store import DatasetManifest, read_manifest, write_manifest

from sample_factory import make_sample


def write_json(path, raw):
    path.write_text(json.dumps(raw), encoding="utf-8")
    return str(path)


def plan_config(tmp_path):
    # One 0.3 x 0.6 degree region tiles into 2 x 3 = 6 sub-regions; with
    # min_sites 0 every tile is kept.
    return write_json(
        tmp_path / "plan.json",
        {
            "regions": [
                {"name": "big", "bottom_left": [0.0, 0.0], "top_right": [0.3, 0.6]}
            ],
            "thresholds": {"min_sites": 0},
            "sim": {"n_sites": 10},
        },
    )


def harvest_config(tmp_path, seed=11):
    return write_json(
        tmp_path / "harvest.json",
        {
            "regions": [
                {"name": "west", "bottom_left": [0.0, 0.0], "top_right": [0.004, 0.004]},
                {"name": "east", "bottom_left": [0.0, 0.005], "top_right": [0.004, 0.009]},
            ],
            "seed": seed,
            "thresholds": {"min_sites": 2},
            "sim": {"n_sites": 60, "block_size": 1e-3},
        },
    )


def test_plan_lists_kept_sub_regions(tmp_path, capsys):
    assert main(["plan", "--config", plan_config(tmp_path)]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert out[-1] == "kept sub-regions: 6"
    assert len(out) == 7
    assert out[0].startswith("big/r0c0\t")


def test_invalid_config_exits_nonzero(tmp_path, capsys):
    bad = write_json(tmp_path / "bad.json", {"regions": [], "provider": "sim"})
    assert main(["plan", "--config", bad]) == 1
    assert "error:" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert main(["plan", "--config", str(tmp_path / "nope.json")]) == 1
    assert "error:" in capsys.readouterr().err


def test_harvest_dry_run_fetches_nothing(tmp_path, capsys):
    out_dir = tmp_path / "out"
    code = main(
        [
            "harvest",
            "--config",
            harvest_config(tmp_path),
            "--out",
            str(out_dir),
            "--dry-run",
        ]
    )
    assert code == 0
    report = json.loads((out_dir / "run_report.json").read_text())
    assert report["dry_run"] is True
    assert report["planned_route_requests"] >= 1
    assert report["samples"] == 0
    assert not (out_dir / "manifest.jsonl").exists()
    # No imagery requests were spent.
    assert report["quota"].get("imagery", 0) == 0


def test_harvest_then_annotate_and_split(tmp_path, capsys):
    out_dir = tmp_path / "out"
    assert main(["harvest", "--config", harvest_config(tmp_path), "--out", str(out_dir)]) == 0
    manifest_path = out_dir / "manifest.jsonl"
    m = read_manifest(manifest_path)
    assert len(m.samples) > 10
    # Every sample's image exists on disk.
    for s in m.samples[:5]:
        assert (out_dir / s.image_ref).is_file()

    # Override the first sample's label through the CLI.
    first = m.samples[0]
    flipped = "negative" if first.label.value == "positive" else "positive"
    overrides = tmp_path / "ov.tsv"
    overrides.write_text(f"{first.sample_id}\t{flipped}\n", encoding="utf-8")
    assert main(
        ["annotate", "--manifest", str(manifest_path), "--overrides", str(overrides)]
    ) == 0
    m2 = read_manifest(manifest_path)
    assert m2.samples[0].label.value == flipped
    assert m2.samples[0].label.source == "manual"

    capsys.readouterr()
    assert main(
        ["split", "--config", harvest_config(tmp_path), "--manifest", str(manifest_path)]
    ) == 0
    counts = json.loads(capsys.readouterr().out)
    assert counts["train"] > 0 and counts["test"] > 0
    m3 = read_manifest(manifest_path)
    assert set(m3.splits.values()) <= {"train", "val", "test"}


def test_annotate_unknown_sample_fails(tmp_path, capsys):
    manifest_path = tmp_path / "m.jsonl"
    write_manifest(DatasetManifest(samples=[make_sample("a")]), manifest_path)
    overrides = tmp_path / "ov.tsv"
    overrides.write_text("ghost\tpositive\n", encoding="utf-8")
    assert main(
        ["annotate", "--manifest", str(manifest_path), "--overrides", str(overrides)]
    ) == 1
    assert "error:" in capsys.readouterr().err
    # Manifest untouched on failure.
    assert read_manifest(manifest_path).samples[0].label.value == "negative"


def test_eval_hand_tally(tmp_path, capsys):
    # 6 test samples: predictions hit on 4 of them.
    samples = [
        make_sample("a", label="positive"),
        make_sample("b", label="positive"),
        make_sample("c", label="positive"),
        make_sample("d", label="negative"),
        make_sample("e", label="negative"),
        make_sample("f", label="negative"),
    ]
    m = DatasetManifest(samples=samples, splits={s.sample_id: "test" for s in samples})
    manifest_path = tmp_path / "m.jsonl"
    write_manifest(m, manifest_path)
    preds = tmp_path / "preds.tsv"
    preds.write_text(
        "a\t0.900000\n"  # TP
        "b\t0.700000\n"  # TP
        "c\t0.200000\n"  # FN
        "d\t0.100000\n"  # TN
        "e\t0.300000\n"  # TN
        "f\t0.800000\n",  # FP
        encoding="utf-8",
    )
    assert main(
        ["eval", "--manifest", str(manifest_path), "--predictions", str(preds)]
    ) == 0
    out = capsys.readouterr().out
    assert "accuracy: 0.6667" in out  # 4 / 6 by hand
    assert "f1: 0.6667" in out  # p = r = 2/3
    assert "samples: 6  (P=3 N=3)" in out


def test_eval_report_out(tmp_path, capsys):
    samples = [make_sample("a", label="positive"), make_sample("b", label="negative")]
    m = DatasetManifest(samples=samples, splits={s.sample_id: "test" for s in samples})
    manifest_path = tmp_path / "m.jsonl"
    write_manifest(m, manifest_path)
    preds = tmp_path / "preds.tsv"
    preds.write_text("a\t0.9\nb\t0.1\n", encoding="utf-8")
    report_path = tmp_path / "report.json"
    assert main(
        [
            "eval",
            "--manifest", str(manifest_path),
            "--predictions", str(preds),
            "--report-out", str(report_path),
        ]
    ) == 0
    report = json.loads(report_path.read_text())
    assert report["accuracy"] == 1.0
    assert report["counts"] == {"tp": 1, "tn": 1, "fp": 0, "fn": 0}


def test_eval_mismatched_predictions(tmp_path, capsys):
    samples = [make_sample("a", label="positive")]
    m = DatasetManifest(samples=samples, splits={"a": "test"})
    manifest_path = tmp_path / "m.jsonl"
    write_manifest(m, manifest_path)
    preds = tmp_path / "preds.tsv"
    preds.write_text("zzz\t0.9\n", encoding="utf-8")
    assert main(
        ["eval", "--manifest", str(manifest_path), "--predictions", str(preds)]
    ) == 1
    assert "error:" in capsys.readouterr().err


def test_compare_command(tmp_path, capsys):
    a = tmp_path / "a.txt"
    b = tmp_path / "b.txt"
    a.write_text("1.5\n2.0\n2.5\n")
    b.write_text("1.0\n1.0\n1.0\n")
    assert main(["compare", str(a), str(b)]) == 0
    out = capsys.readouterr().out
    assert "t = 3.4641" in out
    assert "not significant" in out

    b.write_text("1.0\nbroken\n")
    assert main(["compare", str(a), str(b)]) == 1
