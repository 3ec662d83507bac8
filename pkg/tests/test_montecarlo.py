import io
import math
import warnings
from dataclasses import replace

import numpy as np
import pytest
from scipy import integrate as sci

from cellcov import analytic as A
from cellcov import montecarlo as M
from cellcov.errors import InvalidParameterError
from cellcov.pointprocess import RngStream, Window, sample_network

SMALL = M.SimConfig(window=Window(20, 20), trials=400, seed=3, min_expected_bs=0, chunk_size=100)


# ---------------------------------------------------------------- estimators

def test_proportion_estimate_normal_interval():
    e = M.proportion_estimate(200, 1000)
    assert e.mean == 0.2
    assert e.std_error == pytest.approx(math.sqrt(0.2 * 0.8 / 1000))
    assert e.ci_high - e.mean == pytest.approx(1.959963984540054 * e.std_error)


def test_proportion_estimate_wilson_for_rare_events():
    e = M.proportion_estimate(0, 100)
    assert e.mean == 0 and e.ci_low == 0
    assert 0 < e.ci_high < 0.05


def test_mean_and_ratio_estimates():
    m = M.mean_estimate(np.array([1.0, 2.0, 3.0]))
    assert m.mean == 2.0 and m.std_error == pytest.approx(1 / math.sqrt(3))
    r = M.ratio_estimate(np.array([1.0, 2.0]), np.array([2.0, 4.0]))
    assert r.mean == 0.5 and r.std_error == 0.0


def test_estimate_helpers():
    e = M.Estimate(0.5, 0.1, 10, 0, 0.3, 0.7)
    assert e.contains(0.6) and not e.contains(0.8)
    assert e.z_score(0.3) == pytest.approx(2.0)


def test_sim_config_validation():
    with pytest.raises(InvalidParameterError):
        M.SimConfig(trials=0)
    with pytest.raises(InvalidParameterError):
        M.SimConfig(mode="bogus")
    with pytest.raises(InvalidParameterError):
        M.SimConfig(ci_level=1.0)


def test_window_for_scales_to_expected_count():
    sim = M.SimConfig(window=Window(10, 20), min_expected_bs=100)
    w = sim.window_for(0.1)
    assert w.area * 0.1 == pytest.approx(100)
    assert w.width / w.height == pytest.approx(0.5)
    assert sim.window_for(10.0) == Window(10, 20)


# ---------------------------------------------------------------- far field

def test_far_field_coefficient_against_quadrature():
    w = Window(6, 4)
    for alpha in (3.0, 4.5):
        # polar form: int_phi rho(phi)^(2-alpha)/(alpha-2), rho the distance to the boundary
        def outside(phi):
            c, s = abs(math.cos(phi)), abs(math.sin(phi))
            rho = min(3 / c if c else math.inf, 2 / s if s else math.inf)
            return rho ** (2 - alpha) / (alpha - 2)
        ref = sci.quad(outside, 0, 2 * math.pi, points=[math.atan2(2, 3), math.pi - math.atan2(2, 3),
                                                       math.pi + math.atan2(2, 3), 2 * math.pi - math.atan2(2, 3)],
                       epsabs=1e-13)[0]
        assert M.far_field_coefficient(w, alpha) == pytest.approx(ref, rel=1e-10)


def test_far_field_alpha4_square_closed_form():
    # square of half-side h, alpha = 4: 8 * int_0^{pi/4} cos^2/h^2 / 2
    h = 5.0
    ref = 8 * (math.pi / 8 + 0.25) / (2 * h * h)
    assert M.far_field_coefficient(Window(10, 10), 4.0) == pytest.approx(ref, rel=1e-12)


def test_far_field_corner_position_not_torus():
    assert M.far_field_coefficient(Window(10, 10, torus=False), 3.0, (0.0, 5.0)) == math.inf


# ---------------------------------------------------------------- outage

def test_batched_matches_scalar_realization_path():
    model = A.ModelParams(lambda_b=0.3, lambda_u=0.05)
    sim = replace(SMALL, trials=150)
    silent, alltx = M.outage_indicators(model, sim, stream_id=2)
    stream = RngStream(sim.seed, 2)
    ref = [M.typical_outage(sample_network(0.3, 0.05, sim.window, stream.generator(t)),
                            model.theta, model.alpha) for t in range(sim.trials)]
    assert np.array_equal(silent, [s for s, _ in ref])
    assert np.array_equal(alltx, [a for _, a in ref])


def test_mu_and_power_irrelevant_to_outage():
    base = A.ModelParams(lambda_b=0.2)
    a = M.estimate_outage(base, SMALL)
    b = M.estimate_outage(replace(base, mu=7.0, pa_A=3.0, pa_B=2.0), SMALL)
    assert a == b


def test_all_transmit_dominates_silent():
    model = A.ModelParams(lambda_b=0.1, lambda_u=0.05)
    silent, alltx = M.outage_indicators(model, SMALL)
    assert np.all(alltx >= silent)
    assert alltx.mean() > silent.mean()


def test_outage_deterministic_across_workers_and_chunks():
    model = A.ModelParams(lambda_b=0.2)
    a = M.estimate_outage(model, SMALL)
    b = M.estimate_outage(model, replace(SMALL, workers=3, chunk_size=100))
    assert a == b
    c = M.estimate_outage(model, replace(SMALL, chunk_size=400))
    assert a == c


def test_outage_se_scales_inverse_sqrt_n():
    model = A.ModelParams(lambda_b=0.2)
    e1 = M.estimate_outage(model, replace(SMALL, trials=1000))
    e4 = M.estimate_outage(model, replace(SMALL, trials=4000))
    assert e1.std_error / e4.std_error == pytest.approx(2.0, rel=0.15)


def test_outage_close_to_analytic():
    model = A.ModelParams(lambda_b=0.2)
    sim = M.SimConfig(trials=20000, seed=1)
    e = M.estimate_outage(model, sim)
    beta = A.beta_integral(model.theta, model.alpha)
    assert abs(e.z_score(A.outage_from_densities(0.2, 0.02, beta))) < 3.5


def test_served_and_all_served_estimators_agree_roughly():
    model = A.ModelParams(lambda_b=0.2, lambda_u=0.05)
    sim = M.SimConfig(window=Window(25, 25), trials=1500, seed=5, min_expected_bs=0, chunk_size=500)
    beta = A.beta_integral(model.theta, model.alpha)
    exact = A.outage_from_densities(0.2, 0.05, beta)
    for kw in ({"typical": "served"}, {"estimator": "all-served-per-realization"}):
        e = M.estimate_outage(model, replace(sim, **kw))
        assert abs(e.mean - exact) < 5 * e.std_error + 0.02


def test_noisy_estimate_warns():
    with pytest.warns(M.InsufficientTrialsWarning):
        M.estimate_outage(A.ModelParams(lambda_b=0.6), replace(SMALL, trials=40, seed=4))


# ---------------------------------------------------------------- other quantities

def test_empty_cells_without_mobiles_is_one():
    e = M.estimate_empty_cell_prob(0.5, 0.0, replace(SMALL, trials=10))
    assert e.mean == 1.0


def test_empty_cell_estimate_close_to_fit():
    e = M.estimate_empty_cell_prob(0.2, 0.2, M.SimConfig(trials=300, seed=2))
    assert abs(e.mean - A.empty_cell_probability(0.2, 0.2)) < 0.01


def test_link_distance_mean():
    e = M.estimate_link_distance(1.0, M.SimConfig(trials=4000, seed=8))
    assert abs(e.z_score(0.5)) < 4


def test_cable_length_normalizations():
    ce = M.estimate_cable_length(0.4, 0.01, M.SimConfig(trials=300, seed=4))
    assert ce.per_unit_area.mean == pytest.approx(0.4 / (2 * 0.1), rel=0.03)
    assert ce.per_sc_cell.mean == pytest.approx(A.cable_length_density(0.4, 0.01), rel=0.03)


# ---------------------------------------------------------------- sweep

def test_sweep_validation_and_output():
    model = A.ModelParams()
    with pytest.raises(InvalidParameterError):
        M.sweep_outage(model, [0.2, 0.1], SMALL)
    with pytest.raises(InvalidParameterError):
        M.sweep_outage(model, [], SMALL)
    rows = M.sweep_outage(model, [0.1, 0.2], replace(SMALL, trials=200))
    assert [r.lambda_b for r in rows] == [0.1, 0.2]
    assert rows[0].mc != rows[1].mc
    # row i uses stream i, independent of the rest of the grid
    alone = M.sweep_outage(model, [0.2], replace(SMALL, trials=200))
    assert alone[0].mc != rows[1].mc
    assert M.sweep_outage(model, [0.1], replace(SMALL, trials=200))[0].mc == rows[0].mc
    buf = io.StringIO()
    M.write_sweep_csv(rows, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].split(",") == M.SWEEP_HEADER and len(lines) == 3
