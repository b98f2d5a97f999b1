import pytest
from PIL import Image

from manifest_factory import sample_record, write_manifest


@pytest.fixture
def tiny_dataset(tmp_path):
    """A 12-image manifest with visually separable classes.

    Positives carry a bright striped band; negatives are flat road/sky.
    """
    root = tmp_path / "data"
    (root / "images").mkdir(parents=True)
    records = []
    for i in range(12):
        positive = i % 2 == 0
        img = Image.new("RGB", (64, 52), (90, 90, 90))
        for x in range(64):
            for y in range(20):
                img.putpixel((x, y), (170, 170, 170))
        if positive:
            for x in range(8, 56):
                value = 235 if (x // 6) % 2 == 0 else 60
                for y in range(36, 46):
                    img.putpixel((x, y), (value, value, value))
        rel = f"images/s{i:02d}.png"
        img.save(root / rel)
        split = "train" if i < 8 else ("val" if i < 10 else "test")
        records.append(
            sample_record(f"s{i:02d}", rel, "positive" if positive else "negative", split)
        )
    manifest = write_manifest(root / "manifest.jsonl", records)
    return root, manifest, records
