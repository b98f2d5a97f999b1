import json

import pytest

from cnn_trainer.manifest import ManifestError, ManifestRecord, in_split, read_manifest

from manifest_factory import HEADER, sample_record, write_manifest


def test_read_valid_manifest(tmp_path):
    records = [
        sample_record("a", "images/a.png", "positive", "train"),
        sample_record("b", "images/b.png", "negative", "test"),
    ]
    path = write_manifest(tmp_path / "m.jsonl", records)
    out = read_manifest(path)
    assert out == [
        ManifestRecord("a", "images/a.png", "positive", "train"),
        ManifestRecord("b", "images/b.png", "negative", "test"),
    ]
    assert in_split(out, "test") == [out[1]]


def test_blank_lines_skipped(tmp_path):
    path = tmp_path / "m.jsonl"
    rec = sample_record("a", "a.png", "positive", "train")
    path.write_text(
        json.dumps(HEADER) + "\n\n" + json.dumps(rec) + "\n", encoding="utf-8"
    )
    assert len(read_manifest(path)) == 1


def test_unsupported_version(tmp_path):
    path = tmp_path / "m.jsonl"
    path.write_text('{"format_version": 2}\n', encoding="utf-8")
    with pytest.raises(ManifestError):
        read_manifest(path)


def test_bad_header(tmp_path):
    path = tmp_path / "m.jsonl"
    path.write_text("nonsense\n", encoding="utf-8")
    with pytest.raises(ManifestError):
        read_manifest(path)


def test_missing_field(tmp_path):
    rec = sample_record("a", "a.png", "positive", "train")
    del rec["image_ref"]
    path = write_manifest(tmp_path / "m.jsonl", [rec])
    with pytest.raises(ManifestError):
        read_manifest(path)


def test_bad_label_and_split(tmp_path):
    rec = sample_record("a", "a.png", "maybe", "train")
    path = write_manifest(tmp_path / "m.jsonl", [rec])
    with pytest.raises(ManifestError):
        read_manifest(path)
    rec = sample_record("a", "a.png", "positive", "holdout")
    path = write_manifest(tmp_path / "m.jsonl", [rec])
    with pytest.raises(ManifestError):
        read_manifest(path)


def test_duplicate_sample_id(tmp_path):
    records = [
        sample_record("a", "a.png", "positive", "train"),
        sample_record("a", "a2.png", "negative", "train"),
    ]
    path = write_manifest(tmp_path / "m.jsonl", records)
    with pytest.raises(ManifestError):
        read_manifest(path)
