from __future__ import annotations

import pytest

from gazeprompt.manifest import (
    dumps_manifest,
    load_manifest,
    manifest_from_dict,
    manifest_to_dict,
    round_half_up,
    save_manifest,
    summarize_manifest,
)
from gazeprompt.synth import generate_synthetic_scanpaths, synthesize_manifest
from gazeprompt.types import DatasetManifest, Fixation, ImageRecord, ReportTexts, ScanPath

IMAGE = ImageRecord(image_id="img", path="img.png", width=64, height=48)


class TestSyntheticScanpaths:
    def test_same_seed_same_output(self):
        kwargs = dict(
            seed=1, n_paths=2, fixation_count_range=(2, 5), duration_range_s=(0.1, 1.0), image=IMAGE
        )
        a = generate_synthetic_scanpaths(**kwargs)
        b = generate_synthetic_scanpaths(**kwargs)
        assert a == b
        manifest_a = DatasetManifest(images=(IMAGE,), scanpaths=tuple(a))
        manifest_b = DatasetManifest(images=(IMAGE,), scanpaths=tuple(b))
        assert dumps_manifest(manifest_a) == dumps_manifest(manifest_b)

    def test_degenerate_duration_range(self):
        paths = generate_synthetic_scanpaths(
            seed=2, n_paths=3, fixation_count_range=(1, 4), duration_range_s=(0.1, 0.1), image=IMAGE
        )
        assert all(f.duration == 0.1 for sp in paths for f in sp.fixations)

    def test_zero_paths(self):
        assert (
            generate_synthetic_scanpaths(
                seed=3, n_paths=0, fixation_count_range=(1, 2), duration_range_s=(0.1, 0.2), image=IMAGE
            )
            == []
        )

    def test_coordinates_inside_image(self):
        paths = generate_synthetic_scanpaths(
            seed=4, n_paths=20, fixation_count_range=(1, 6), duration_range_s=(0.05, 2.0), image=IMAGE
        )
        for sp in paths:
            for f in sp.fixations:
                assert 0 <= f.x < IMAGE.width
                assert 0 <= f.y < IMAGE.height

    def test_invalid_ranges_rejected(self):
        with pytest.raises(ValueError):
            generate_synthetic_scanpaths(
                seed=1, n_paths=1, fixation_count_range=(3, 2), duration_range_s=(0.1, 1.0), image=IMAGE
            )
        with pytest.raises(ValueError):
            generate_synthetic_scanpaths(
                seed=1, n_paths=1, fixation_count_range=(1, 2), duration_range_s=(0.0, 1.0), image=IMAGE
            )


class TestManifestRoundTrip:
    def make_manifest(self):
        scanpaths = generate_synthetic_scanpaths(
            seed=9, n_paths=4, fixation_count_range=(1, 5), duration_range_s=(0.2, 1.4), image=IMAGE
        )
        reports = {
            scanpaths[0].key: ReportTexts(findings="clear lungs", impression="normal", diagnosis="none")
        }
        return DatasetManifest(images=(IMAGE,), scanpaths=tuple(scanpaths), reports=reports)

    def test_dict_round_trip(self):
        manifest = self.make_manifest()
        assert manifest_from_dict(manifest_to_dict(manifest)) == manifest

    def test_file_round_trip(self, tmp_path):
        manifest = self.make_manifest()
        path = str(tmp_path / "manifest.json")
        save_manifest(manifest, path)
        assert load_manifest(path) == manifest
        save_manifest(load_manifest(path), path + ".2")
        assert open(path).read() == open(path + ".2").read()

    def test_version_checked(self):
        with pytest.raises(ValueError, match="manifest_version"):
            manifest_from_dict({"manifest_version": 99})

    def test_referential_integrity_enforced(self):
        sp = ScanPath(
            image_id="ghost",
            reader_id="r",
            fixations=(Fixation(x=1, y=1, duration=0.1, seq=1),),
        )
        with pytest.raises(ValueError, match="unknown image_id"):
            DatasetManifest(images=(IMAGE,), scanpaths=(sp,))


class TestStats:
    def test_alpha_like_counts(self):
        manifest = synthesize_manifest(
            seed=0, n_images=3134, n_scanpaths=3699, fixation_count_range=(1, 2)
        )
        stats = summarize_manifest(manifest)
        assert stats.images == 3134
        assert stats.scanpaths == 3699
        assert stats.readers_per_image == 1.18

    def test_beta_like_counts(self):
        manifest = synthesize_manifest(
            seed=0, n_images=549, n_scanpaths=3197, fixation_count_range=(1, 2), split="beta"
        )
        stats = summarize_manifest(manifest)
        assert stats.readers_per_image == 5.82

    def test_one_to_one(self):
        manifest = synthesize_manifest(seed=1, n_images=1, n_scanpaths=1)
        assert summarize_manifest(manifest).readers_per_image == 1.0

    def test_empty_manifest_yields_zeros(self):
        stats = summarize_manifest(DatasetManifest(images=(), scanpaths=()))
        assert stats.to_dict() == {
            "images": 0,
            "scanpaths": 0,
            "reports": 0,
            "readers_per_image": 0.0,
        }

    def test_split_filter(self):
        alpha = synthesize_manifest(seed=1, n_images=2, n_scanpaths=4, split="alpha")
        beta = synthesize_manifest(seed=2, n_images=1, n_scanpaths=3, split="beta")
        beta_renamed = [
            ScanPath(
                image_id="beta_" + sp.image_id,
                reader_id=sp.reader_id,
                fixations=sp.fixations,
                split=sp.split,
            )
            for sp in beta.scanpaths
        ]
        beta_images = [
            ImageRecord(
                image_id="beta_" + img.image_id, path=img.path, width=img.width, height=img.height
            )
            for img in beta.images
        ]
        merged = DatasetManifest(
            images=alpha.images + tuple(beta_images),
            scanpaths=alpha.scanpaths + tuple(beta_renamed),
        )
        assert summarize_manifest(merged, split="alpha").scanpaths == 4
        assert summarize_manifest(merged, split="beta").scanpaths == 3
        assert summarize_manifest(merged, split="beta").images == 1


def test_round_half_up_display():
    assert round_half_up(1.180281, 2) == 1.18
    assert round_half_up(5.823315, 2) == 5.82
    assert round_half_up(1.005, 2) == 1.01
    assert round_half_up(139.45, 1) == 139.5
