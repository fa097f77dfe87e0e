import random

import numpy as np
import pytest

from morphlex.core import EmptyDataError, InputError
from morphlex.curve import (GainMode, IpsCurve, appendix_curve, kneedle, kneedle_elbow,
                            max_gain_point, q90_point, read_curve_csv, recommend_range,
                            write_curve_csv)

from conftest import write


def curve(points):
    return IpsCurve.from_points(points)


def test_curve_invariants():
    with pytest.raises(ValueError):
        curve([(2, 0.1), (1, 0.2)])
    with pytest.raises(ValueError):
        curve([(1, 0.1), (1, 0.2)])


@pytest.mark.parametrize("lang", ["hu", "fi", "et"])
def test_elbow_on_published_grid(lang):
    assert kneedle_elbow(appendix_curve(lang)) == 80_000


def test_q90_hungarian_and_finnish():
    hu = appendix_curve("hu")
    assert q90_point(hu) == 128_000
    ips = dict(hu.points)
    assert round(ips[128_000], 4) == 0.6796 and round(ips[100_000], 4) == 0.6527
    fi = appendix_curve("fi")
    assert q90_point(fi) == 150_000
    assert round(dict(fi.points)[128_000], 4) == 0.2810


def test_q90_single_point_and_definition():
    assert q90_point(curve([(5, 0.3)])) == 5
    rng = random.Random(0)
    for _ in range(50):
        pts = [(k, rng.random()) for k in range(1, 12)]
        c = curve(pts)
        k = q90_point(c)
        assert dict(pts)[k] >= 0.9 * max(v for _, v in pts)


def test_max_gain():
    assert max_gain_point(appendix_curve("et")) == 16_000
    assert max_gain_point(appendix_curve("hu")) == 32_000  # published value is 40k
    c = curve([(1, 0.1), (2, 0.15), (3, 0.6), (4, 0.62)])
    assert max_gain_point(c) == 3
    # per-unit mode divides by the k step
    c = curve([(0, 0.0), (1, 0.1), (11, 0.5)])
    assert max_gain_point(c, GainMode.ABSOLUTE_DELTA) == 11
    assert max_gain_point(c, GainMode.PER_UNIT_DELTA) == 1
    assert max_gain_point(curve([(1, 0.0), (2, 0.1), (3, 0.2)])) == 2  # tie to smaller k


def test_linear_curve_has_no_distinct_knee():
    knee = kneedle(curve([(k, 0.1 * k) for k in range(1, 8)]))
    assert not knee.distinct
    analysis = recommend_range(curve([(k, 0.1 * k) for k in range(1, 8)]))
    assert "no distinct knee" in analysis.warnings


def test_kneedle_needs_three_points():
    with pytest.raises(EmptyDataError):
        kneedle_elbow(curve([(1, 0.1), (2, 0.2)]))


@pytest.mark.parametrize("seed", range(20))
def test_kneedle_affine_invariance(seed):
    rng = np.random.default_rng(seed)
    ks = np.cumsum(rng.integers(1, 20, size=12))
    ys = np.log1p(ks) + rng.normal(0, 0.05, size=12)
    base = kneedle_elbow(curve(zip(ks.tolist(), ys.tolist())))
    for a, b in [(2.0, 0.0), (0.5, 3.0), (4.0, -1.0)]:
        ys2 = (a * ys + b).tolist()
        c2 = curve(zip((ks * 4).tolist(), ys2))
        assert kneedle_elbow(c2) == base * 4


@pytest.mark.parametrize("lang,expected", [("hu", (80_000, 128_000)),
                                           ("et", (80_000, 128_000)),
                                           ("fi", (80_000, 150_000))])
def test_recommend_range(lang, expected):
    analysis = recommend_range(appendix_curve(lang))
    assert analysis.recommended_range == expected
    assert analysis.k_elbow == expected[0] and analysis.k_q90 == expected[1]


def test_degenerate_range_warning():
    # every point is within 90% of the max, so q90 is the first grid point
    ks = [1, 2, 4, 8, 16, 32, 64]
    c = curve([(k, 0.9 + 0.1 * np.log(k) / np.log(64)) for k in ks])
    analysis = recommend_range(c)
    assert analysis.k_q90 == 1 and analysis.k_elbow > 1
    assert analysis.recommended_range == (analysis.k_elbow, 1)
    assert any("degenerate" in w for w in analysis.warnings)


def test_read_curve_formats(tmp_path):
    a = read_curve_csv(write(tmp_path, "a.csv", "k,ips\n1,0.1\n2,0.3\n"))
    assert a.points == [(1, 0.1), (2, 0.3)]
    b = read_curve_csv(write(tmp_path, "b.csv", "k,lmc,osr\n1,1.0,0.0\n2,0.0,1.0\n"))
    assert b.points == [(1, 1.0), (2, 0.0)]
    c = read_curve_csv(write(tmp_path, "c.csv", "k,lmc,osr,ips\n1,1.0,0.0,1.0\n"))
    assert c.points == [(1, 1.0)]


def test_read_curve_malformed(tmp_path):
    with pytest.raises(InputError, match=":3:"):
        read_curve_csv(write(tmp_path, "a.csv", "k,ips\n1,0.1\nx,0.3\n"))
    with pytest.raises(InputError, match=":1:"):
        read_curve_csv(write(tmp_path, "b.csv", "size,value\n1,2\n"))


def test_curve_csv_roundtrip(tmp_path):
    c = appendix_curve("hu")
    write_curve_csv(c, tmp_path / "c.csv")
    assert read_curve_csv(tmp_path / "c.csv") == c
