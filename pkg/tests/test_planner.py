import logging
import random

import pytest

from xwalk.errors import InvalidRegion
from xwalk.geo import GeoPoint, Region
from xwalk.planner import MAX_DEPTH, SubRegion, density_partition, split_region


def region(lat0, lon0, lat1, lon1):
    return Region(GeoPoint(lat0, lon0), GeoPoint(lat1, lon1))


def sites_counter(sites):
    return lambda r: sum(1 for s in sites if r.contains(s))


def test_compliant_region_is_single_tile():
    r = region(0, 0, 0.2, 0.2)
    subs = split_region(r)
    assert len(subs) == 1
    assert subs[0].bounds == r


def test_quarter_degree_region_not_split():
    subs = split_region(region(0, 0, 0.25, 0.25))
    assert len(subs) == 1


def test_rectangular_region_tiling():
    subs = split_region(region(0, 0, 0.3, 0.6))  # height 0.3, width 0.6
    assert len(subs) == 6  # 2 rows x 3 cols
    for sub in subs:
        assert sub.bounds.height == pytest.approx(0.15)
        assert sub.bounds.width == pytest.approx(0.2)


def test_degenerate_region_rejected():
    with pytest.raises(InvalidRegion):
        region(0, 0, 0, 0.2)


def test_tiling_exactness_random_regions():
    rnd = random.Random(7)
    for _ in range(200):
        lat0 = rnd.uniform(-50, 50)
        lon0 = rnd.uniform(-50, 50)
        r = region(lat0, lon0, lat0 + rnd.uniform(0.01, 1.5), lon0 + rnd.uniform(0.01, 1.5))
        subs = split_region(r)
        rows = sorted({s.bounds.bottom_left.lat for s in subs})
        cols = sorted({s.bounds.bottom_left.lon for s in subs})
        assert len(subs) == len(rows) * len(cols)
        for s in subs:
            assert s.bounds.width <= 0.25 + 1e-12
            assert s.bounds.height <= 0.25 + 1e-12
        # Exact cover: outer edges equal the input, inner edges shared.
        assert min(rows) == r.bottom_left.lat
        assert min(cols) == r.bottom_left.lon
        assert max(s.bounds.top_right.lat for s in subs) == r.top_right.lat
        assert max(s.bounds.top_right.lon for s in subs) == r.top_right.lon
        area = sum(s.bounds.width * s.bounds.height for s in subs)
        assert area == pytest.approx(r.width * r.height, rel=1e-9)


def make_sub(lat0=0.0, lon0=0.0, size=0.25, depth=0):
    return SubRegion(region(lat0, lon0, lat0 + size, lon0 + size), "t/r0c0", depth)


def test_sparse_sub_region_discarded():
    sub = make_sub()
    assert density_partition(sub, lambda r: 49) == []


def test_borderline_counts_kept():
    sub = make_sub()
    assert density_partition(sub, lambda r: 50) == [sub]
    assert density_partition(sub, lambda r: 2000) == [sub]


def test_dense_uniform_cloud_splits_into_quadrants():
    rnd = random.Random(11)
    sites = [GeoPoint(rnd.uniform(0, 0.25), rnd.uniform(0, 0.25)) for _ in range(2001)]
    count = sites_counter(sites)
    sub = make_sub()
    kept = density_partition(sub, count)
    assert len(kept) == 4
    # Brute-force: each quadrant holds roughly a quarter of the sites.
    for quad in kept:
        assert 50 <= count(quad.bounds) <= 2000
    assert sum(count(q.bounds) for q in kept) == 2001


def test_point_mass_cloud_stops_at_max_depth(caplog):
    count = lambda r: 5000 if r.contains(GeoPoint(0.01, 0.01)) else 0
    sub = make_sub()
    with caplog.at_level(logging.WARNING):
        kept = density_partition(sub, count)
    assert len(kept) == 1
    assert kept[0].depth == MAX_DEPTH
    assert any("max depth" in rec.message for rec in caplog.records)


def test_no_double_counting_of_sites():
    rnd = random.Random(3)
    sites = [GeoPoint(rnd.uniform(0, 0.25), rnd.uniform(0, 0.25)) for _ in range(5000)]
    count = sites_counter(sites)
    kept = density_partition(make_sub(), count)
    assert sum(count(q.bounds) for q in kept) <= len(sites)
    for q in kept:
        assert 50 <= count(q.bounds) <= 2000
