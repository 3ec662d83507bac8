import io
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from cellcov.errors import EmptyPatternError, InvalidParameterError, NoActiveBSError
from cellcov.pointprocess import (
    Association, PointPattern, RngStream, Window, associate, distance, sample_network, sample_ppp,
    select_served, write_realization_csv,
)

W10 = Window(10, 10, torus=True)
coords = st.floats(0, 9.999, allow_nan=False)


def test_window_validation():
    with pytest.raises(InvalidParameterError):
        Window(0, 1)
    assert Window(2, 3).area == 6


def test_rng_stream_validation():
    with pytest.raises(InvalidParameterError):
        RngStream(-1)
    with pytest.raises(InvalidParameterError):
        RngStream(0, 2 ** 64)


def test_sample_ppp_examples():
    assert len(sample_ppp(0.0, W10, RngStream(1))) == 0
    with pytest.raises(InvalidParameterError):
        sample_ppp(-1.0, W10, RngStream(1))


def test_sample_ppp_count_moments():
    counts = np.array([len(sample_ppp(0.5, W10, RngStream(7).generator(i))) for i in range(2000)])
    # mean 50, variance 50
    assert abs(counts.mean() - 50) < 4 * np.sqrt(50 / 2000)
    assert 0.85 < counts.var(ddof=1) / counts.mean() < 1.15


def test_sample_ppp_points_inside_window():
    pts = sample_ppp(5.0, Window(3, 2), RngStream(3)).points
    assert np.all(pts >= 0) and np.all(pts[:, 0] < 3) and np.all(pts[:, 1] < 2)


def test_sample_ppp_deterministic():
    a = sample_ppp(1.0, W10, RngStream(42, 3)).points
    b = sample_ppp(1.0, W10, RngStream(42, 3)).points
    c = sample_ppp(1.0, W10, RngStream(42, 4)).points
    assert np.array_equal(a, b)
    assert not (len(a) == len(c) and np.array_equal(a, c))


def test_distance_examples():
    assert distance([1, 1], [9, 9], W10) == pytest.approx(np.sqrt(8))
    assert distance([1, 1], [9, 9], Window(10, 10, torus=False)) == pytest.approx(np.sqrt(128))
    assert distance([0, 0], [5, 5], W10) == pytest.approx(np.sqrt(50))


@given(coords, coords, coords, coords)
def test_torus_distance_is_min_over_images(x1, y1, x2, y2):
    images = [np.hypot(x2 + 10 * i - x1, y2 + 10 * j - y1) for i, j in itertools.product((-1, 0, 1), repeat=2)]
    d = distance([x1, y1], [x2, y2], W10)
    assert d == pytest.approx(min(images), abs=1e-12)
    assert d <= np.hypot(5, 5) + 1e-12
    assert d == distance([x2, y2], [x1, y1], W10)


def test_associate_example():
    bs = PointPattern(np.array([[2.0, 2.0], [8.0, 8.0]]), W10)
    mob = PointPattern(np.array([[1.0, 1.0], [7.0, 7.0], [9.5, 9.5]]), W10)
    a = associate(mob, bs, W10)
    assert a.assoc.tolist() == [0, 1, 1]
    assert a.active_bs.tolist() == [0, 1]


def test_associate_torus_wraps_and_ties_go_low():
    bs = PointPattern(np.array([[5.0, 5.0], [0.5, 0.5]]), W10)
    mob = PointPattern(np.array([[9.5, 9.5]]), W10)
    assert associate(mob, bs, W10).assoc.tolist() == [1]
    tie_bs = PointPattern(np.array([[4.0, 5.0], [6.0, 5.0]]), W10)
    assert associate(PointPattern(np.array([[5.0, 5.0]]), W10), tie_bs, W10).assoc.tolist() == [0]


def test_associate_errors():
    with pytest.raises(EmptyPatternError):
        associate(PointPattern(np.zeros((1, 2)), W10), PointPattern(np.zeros((0, 2)), W10), W10)
    a = associate(PointPattern(np.zeros((0, 2)), W10), PointPattern(np.ones((2, 2)), W10), W10)
    assert len(a.active_bs) == 0
    with pytest.raises(NoActiveBSError):
        select_served(a, RngStream(0))


def test_associate_matches_kdtree():
    from scipy.spatial import cKDTree
    rng = RngStream(11)
    bs = sample_ppp(1.0, W10, rng.generator(0))
    mob = sample_ppp(3.0, W10, rng.generator(1))
    _, idx = cKDTree(bs.points, boxsize=[10, 10]).query(mob.points)
    assert np.array_equal(associate(mob, bs, W10).assoc, idx)


def test_select_served_uniform_within_cell():
    a = Association(np.array([0, 0, 0, 1]), np.array([0, 1]))
    picks = np.array([select_served(a, RngStream(5).generator(i))[0][0] for i in range(6000)])
    freq = np.bincount(picks, minlength=3) / len(picks)
    assert np.allclose(freq, 1 / 3, atol=0.025)
    served, typ = select_served(a, RngStream(1), typical=2)
    assert served[0] == 2 and typ == 2 and served[1] == 3


def test_select_served_typical_uniform_over_active():
    a = Association(np.array([0, 0, 0, 1]), np.array([0, 1]))
    typ = [select_served(a, RngStream(6).generator(i))[1] for i in range(4000)]
    assert abs(np.mean([t == 3 for t in typ]) - 0.5) < 0.03


def test_sample_network_invariants():
    real = sample_network(0.2, 0.05, Window(30, 30), RngStream(9), lambda_s=0.01)
    assert real.palm and real.typical_mobile == 0
    assert np.allclose(real.mobiles.points[0], [15, 15])
    assert real.serving_bs in real.active_bs
    assert set(real.served_mobile) == set(real.active_bs.tolist())
    for b, m in real.served_mobile.items():
        assert real.assoc[m] == b
    assert len(real.fading) == len(real.bs)
    assert real.active_mask.sum() == len(real.active_bs)
    with pytest.raises(InvalidParameterError):
        sample_network(0.0, 0.1, W10, RngStream(0))


def test_sample_network_idempotent():
    a = sample_network(0.3, 0.1, W10, RngStream(12, 1), lambda_s=0.05)
    b = sample_network(0.3, 0.1, W10, RngStream(12, 1), lambda_s=0.05)
    assert np.array_equal(a.bs.points, b.bs.points)
    assert np.array_equal(a.fading, b.fading)
    assert a.served_mobile == b.served_mobile


def test_switching_centers_do_not_perturb_radio_part():
    a = sample_network(0.3, 0.1, W10, RngStream(12), lambda_s=0.0)
    b = sample_network(0.3, 0.1, W10, RngStream(12), lambda_s=0.5)
    assert np.array_equal(a.bs.points, b.bs.points)
    assert np.array_equal(a.assoc, b.assoc)


@settings(max_examples=20, deadline=None)
@given(st.floats(-20, 20), st.floats(-20, 20))
def test_association_translation_invariant_on_torus(dx, dy):
    rng = RngStream(4)
    bs = sample_ppp(0.5, W10, rng.generator(0))
    mob = sample_ppp(0.5, W10, rng.generator(1))
    shift = lambda p: PointPattern(np.mod(p.points + [dx, dy], 10.0), W10)
    base = associate(mob, bs, W10).assoc
    moved = associate(shift(mob), shift(bs), W10).assoc
    # exact ties are measure zero; allow rounding to flip a near-tie
    assert np.mean(base == moved) >= 0.99


def test_link_distance_distribution_ks():
    # distance from the window center to the nearest BS is Rayleigh(1/sqrt(2 pi lambda))
    lam = 0.25
    w = Window(40, 40)
    d = []
    for i in range(1500):
        r = sample_network(lam, 0.0, w, RngStream(21).generator(i))
        d.append(distance(r.bs.points[r.serving_bs], w.center, w))
    res = stats.kstest(d, stats.rayleigh(scale=1 / np.sqrt(2 * np.pi * lam)).cdf)
    assert res.pvalue > 0.001


def test_write_realization_csv():
    real = sample_network(0.3, 0.1, W10, RngStream(2), lambda_s=0.05)
    buf = io.StringIO()
    write_realization_csv(real, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "kind,x,y,assoc_bs_index,active_flag,served_flag"
    kinds = [ln.split(",")[0] for ln in lines[1:]]
    assert kinds.count("bs") == len(real.bs)
    assert kinds.count("mobile") == len(real.mobiles)
    assert kinds.count("sc") == len(real.switching_centers)
    served_rows = [ln for ln in lines[1:] if ln.startswith("mobile") and ln.endswith(",1")]
    assert len(served_rows) == len(real.active_bs)
