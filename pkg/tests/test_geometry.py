import math

import numpy as np
import pytest

from vph import (MarkedPoint, MarkedPointCloud, hausdorff_distance,
                 min_enclosing_ball, min_enclosing_ball_radius, min_separation,
                 read_cloud_csv, write_cloud_csv)
from vph.errors import CloudFormatError

from helpers import hausdorff_oracle, meb_oracle, random_cloud


def cloud(*coords):
    return MarkedPointCloud.from_coords(coords)


class TestCloud:
    def test_rejects_duplicate_coordinates(self):
        with pytest.raises(ValueError, match="not simple"):
            cloud((0, 0), (0, 0))

    def test_rejects_mixed_dimensions(self):
        with pytest.raises(ValueError):
            MarkedPointCloud([MarkedPoint((0.0,)), MarkedPoint((0.0, 1.0))])

    def test_rejects_negative_mark(self):
        with pytest.raises(ValueError):
            MarkedPoint((0.0, 0.0), -1.0)

    def test_rejects_mark_beyond_r0(self):
        with pytest.raises(ValueError, match="exceeds"):
            MarkedPointCloud.from_coords([(0, 0)], [2.0], r0=1.0)

    def test_empty_needs_dimension(self):
        with pytest.raises(ValueError):
            MarkedPointCloud([])
        empty = MarkedPointCloud([], dim=2)
        assert len(empty) == 0
        assert empty.coords_array().shape == (0, 2)


class TestHausdorff:
    def test_identical_clouds(self):
        a = cloud((0, 0), (1, 2), (3, 1))
        assert hausdorff_distance(a, a) == 0.0

    def test_single_pair(self):
        assert hausdorff_distance(cloud((0, 0)), cloud((3, 4))) == 5.0

    def test_asymmetric_example(self):
        # directed suprema: 1 (from the pair side) and 0 backwards
        a = cloud((0, 0), (1, 0))
        b = cloud((0, 0))
        assert hausdorff_distance(a, b) == 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            hausdorff_distance(cloud((0, 0)), MarkedPointCloud.from_coords([(0,)]))

    def test_empty_cloud_rejected(self):
        empty = MarkedPointCloud([], dim=2)
        with pytest.raises(ValueError):
            hausdorff_distance(empty, cloud((0, 0)))

    def test_metric_properties_on_random_triples(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            a = random_cloud(rng, int(rng.integers(1, 6)))
            b = random_cloud(rng, int(rng.integers(1, 6)))
            c = random_cloud(rng, int(rng.integers(1, 6)))
            dab = hausdorff_distance(a, b)
            assert dab == hausdorff_distance(b, a)
            assert dab >= 0
            assert dab <= hausdorff_distance(a, c) + hausdorff_distance(c, b) + 1e-12
            assert dab == pytest.approx(hausdorff_oracle(a, b), abs=1e-12)

    def test_zero_iff_equal_coordinate_sets(self):
        a = cloud((0, 0), (1, 1))
        b = MarkedPointCloud.from_coords([(1, 1), (0, 0)], [0.5, 0.25], r0=1.0)
        assert hausdorff_distance(a, b) == 0.0  # marks ignored
        assert hausdorff_distance(a, cloud((0, 0), (1, 1.5))) > 0


class TestMinEnclosingBall:
    def test_singleton(self):
        assert min_enclosing_ball_radius([(2.0, 3.0)]) == 0.0

    def test_midpoint_pair(self):
        assert min_enclosing_ball_radius([(0, 0), (2, 0)]) == 1.0

    def test_equilateral_triangle(self):
        pts = [(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)]
        r = min_enclosing_ball_radius(pts)
        assert r == pytest.approx(1 / math.sqrt(3), abs=1e-9)
        assert r == pytest.approx(meb_oracle(pts), abs=1e-6)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            min_enclosing_ball_radius([])

    def test_interior_point_does_not_matter(self):
        base = [(0, 0), (2, 0), (1, 1.5)]
        r1 = min_enclosing_ball_radius(base)
        r2 = min_enclosing_ball_radius(base + [(1.0, 0.5)])
        assert r1 == r2

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_bounds_and_containment_on_random_sets(self, dim):
        rng = np.random.default_rng(11 + dim)
        for _ in range(40):
            n = int(rng.integers(1, 9))
            pts = rng.uniform(-3, 3, size=(n, dim))
            center, r = min_enclosing_ball(pts)
            d = pts - center
            dists = np.sqrt((d * d).sum(axis=1))
            assert float(dists.max()) <= r + 1e-9
            if n >= 2:
                diam = max(
                    math.dist(pts[i], pts[j])
                    for i in range(n) for j in range(i + 1, n))
                assert r >= diam / 2 - 1e-9
                assert r <= diam * math.sqrt(dim / (2 * (dim + 1))) + 1e-9

    def test_translation_and_permutation_invariance(self):
        rng = np.random.default_rng(23)
        for _ in range(25):
            n = int(rng.integers(2, 8))
            pts = rng.uniform(-2, 2, size=(n, 2))
            r = min_enclosing_ball_radius(pts)
            shift = rng.uniform(-5, 5, size=2)
            assert min_enclosing_ball_radius(pts + shift) == pytest.approx(r, abs=1e-9)
            perm = rng.permutation(n)
            assert min_enclosing_ball_radius(pts[perm]) == pytest.approx(r, abs=1e-9)

    def test_oracle_agreement_random(self):
        rng = np.random.default_rng(31)
        for _ in range(15):
            n = int(rng.integers(2, 7))
            pts = rng.uniform(-2, 2, size=(n, 2))
            assert min_enclosing_ball_radius(pts) == pytest.approx(
                meb_oracle(pts), abs=1e-5)

    def test_large_input_path(self):
        rng = np.random.default_rng(5)
        pts = rng.uniform(-1, 1, size=(200, 2))
        center, r = min_enclosing_ball(pts)
        d = pts - center
        assert float(np.sqrt((d * d).sum(axis=1)).max()) <= r + 1e-9

    def test_deterministic(self):
        rng = np.random.default_rng(77)
        pts = rng.uniform(-1, 1, size=(30, 3))
        assert min_enclosing_ball_radius(pts) == min_enclosing_ball_radius(pts)


class TestMinSeparation:
    def test_direct_minimum(self):
        assert min_separation(cloud((0, 0), (1, 0), (5, 0))) == 1.0

    def test_unit_square(self):
        assert min_separation(cloud((0, 0), (1, 0), (0, 1), (1, 1))) == 1.0

    def test_exhaustive_pairs(self):
        assert min_separation(cloud((0, 0), (0.25, 0), (1, 1))) == 0.25

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            min_separation(cloud((0, 0)))


class TestCloudCsv:
    def test_round_trip_marked(self, tmp_path):
        c = MarkedPointCloud.from_coords([(0, 0), (1.5, -2.25)], [0.5, 0.125],
                                         r0=0.5)
        path = tmp_path / "cloud.csv"
        write_cloud_csv(path, c)
        back = read_cloud_csv(path)
        assert [p.coords for p in back.points] == [p.coords for p in c.points]
        assert [p.mark for p in back.points] == [p.mark for p in c.points]

    def test_round_trip_unmarked(self, tmp_path):
        c = cloud((0, 0), (1, 2))
        path = tmp_path / "cloud.csv"
        write_cloud_csv(path, c)
        back = read_cloud_csv(path)
        assert [p.coords for p in back.points] == [p.coords for p in c.points]

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(CloudFormatError):
            read_cloud_csv(path)

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n0,0\n")
        with pytest.raises(CloudFormatError, match="header"):
            read_cloud_csv(path)

    def test_bad_cell_reports_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x1,x2\n0,0\n1,zap\n")
        with pytest.raises(CloudFormatError, match="row 3"):
            read_cloud_csv(path)
