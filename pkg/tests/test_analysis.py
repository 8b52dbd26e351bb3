import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_unitary
from koblab import models
from koblab.analysis import (
    check_normal_preservation,
    estimate_df_alpha,
    fit_blowup_exponent,
    holder_exponent_normal_paths,
    lempert_alpha,
    map_regularity,
    normal_ray_sweep,
    pseudoconvexity_probe,
    sample_boundary_points,
)
from koblab.bounds import normal_estimate_c11
from koblab.maps import HoloMapSpec, ball_automorphism, parse_map


# -- fits -----------------------------------------------------------------------


def test_fit_exact_power_law():
    d = np.geomspace(1e-2, 1e-5, 8)
    slope, icpt, r2 = fit_blowup_exponent(list(zip(d, 2.5 * d ** -0.75)))
    assert slope == pytest.approx(-0.75, abs=1e-12)
    assert icpt == pytest.approx(np.log(2.5), abs=1e-10)
    assert r2 == pytest.approx(1.0, abs=1e-12)


def test_fit_matches_frozen_noisy_law(oracles):
    o = oracles["noisy_power_law"]
    slope, icpt, r2 = fit_blowup_exponent(list(zip(o["deltas"], o["values"])))
    assert slope == pytest.approx(o["slope"], rel=1e-10)
    assert icpt == pytest.approx(o["intercept"], rel=1e-10)
    assert r2 == pytest.approx(o["r2"], rel=1e-10)


@pytest.mark.parametrize("bad", [[(1e-2, 1.0)] * 3, [(1e-2, 1.0), (1e-3, -1.0), (1e-4, 1.0), (1e-5, 1.0)],
                                 [(1e-2, 1.0)] * 5])
def test_fit_rejects_bad_samples(bad):
    with pytest.raises(ValueError):
        fit_blowup_exponent(bad)


@given(st.floats(-2, 0), st.floats(-3, 3))
def test_fit_recovers_any_exponent(a, c):
    d = np.geomspace(1e-1, 1e-4, 6)
    assert fit_blowup_exponent(list(zip(d, np.exp(c) * d ** a)))[0] == pytest.approx(a, abs=1e-9)


# -- sweeps --------------------------------------------------------------------------


def test_sweep_ball_lower_only():
    dom = models.ball(2)
    lower = lambda z, X: normal_estimate_c11(dom, z, X)
    rep = normal_ray_sweep(dom, [1, 0], np.geomspace(1e-2, 1e-5, 6), lower=lower)
    assert rep.rule == "normal"
    assert rep.fits["lower"]["slope"] is not None
    assert -1 - 1e-9 <= rep.fits["lower"]["slope"] <= -0.5
    assert rep.fits["upper"]["samples"] == 0
    lines = rep.to_csv().splitlines()
    assert lines[0] == "delta,lower,upper,lower_ok,upper_ok,flags" and len(lines) == 7


def test_sweep_flags_failures_and_orders():
    dom = models.ball(2)

    def broken(z, X):
        raise ValueError("nope")

    rep = normal_ray_sweep(dom, [1, 0], [1e-2, 1e-3, 1e-4, 1e-5], lower=broken,
                           upper=lambda z, X: 1.0 / (1 - abs(z[0]) ** 2))
    assert all(s.lower is None and "lower: nope" in s.flags for s in rep.samples)
    assert rep.fits["upper"]["slope"] == pytest.approx(-1, abs=0.01)
    with pytest.raises(ValueError):
        normal_ray_sweep(dom, [1, 0], [1e-3, 1e-2], lower=broken)


def test_sweep_threads_do_not_change_results():
    dom = models.ball(2)
    lower = lambda z, X: normal_estimate_c11(dom, z, X)
    deltas = np.geomspace(1e-2, 1e-4, 4)
    a = normal_ray_sweep(dom, [1, 0], deltas, lower=lower, workers=1).to_csv()
    b = normal_ray_sweep(dom, [1, 0], deltas, lower=lower, workers=3).to_csv()
    assert a == b


# -- pseudoconvexity probe --------------------------------------------------------------


def test_boundary_samples_lie_on_boundary():
    dom = models.ball(2)
    pts = sample_boundary_points(dom, 20, seed=3)
    assert len(pts) == 20
    np.testing.assert_allclose([np.linalg.norm(p) for p in pts], 1.0, atol=1e-12)


@pytest.mark.parametrize("dom", [models.ball(2), models.flat_quartic()], ids=["ball", "flat4"])
def test_probe_reports_nonnegative(dom):
    res = pseudoconvexity_probe(dom, budget=60, seed=1)
    assert not res.pseudoconvex_witness
    assert res.verdict.startswith("Levi-nonnegative")
    assert res.sweep is None


def test_probe_finds_saddle_witness():
    res = pseudoconvexity_probe(models.saddle(), budget=40, seed=1)
    assert res.pseudoconvex_witness
    assert res.min_eigenvalue < 0
    assert abs(res.sweep["fit"]["slope"] + 0.5) <= 0.05
    rec = res.to_record()
    assert rec["witness"] is True and rec["sweep"]["fit"]["r2"] >= 0.99


# -- mapping toolkit -------------------------------------------------------------------------


def test_identity_map_regularity():
    dom = models.ball(2)
    rep = map_regularity(HoloMapSpec.identity(2), dom, dom, count=20)
    assert rep.normal_preservation_sup_ratio == pytest.approx(1, abs=1e-12)
    assert rep.real_preservation_sup_ratio == pytest.approx(1, abs=1e-12)
    assert rep.df_alpha_fit == pytest.approx(1, abs=1e-10)
    assert rep.holder_exponent_fit == pytest.approx(1, abs=1e-3)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_unitary_map_regularity(seed):
    U = random_unitary(2, np.random.default_rng(seed))
    dom = models.ball(2)
    rep = map_regularity(HoloMapSpec.linear(U), dom, dom, count=20, seed=seed)
    assert rep.normal_preservation_sup_ratio == pytest.approx(1, abs=1e-12)
    assert rep.df_alpha_fit == pytest.approx(1, abs=1e-10)
    assert rep.holder_exponent_fit == pytest.approx(1, abs=1e-3)


def test_ball_automorphism_regularity():
    dom = models.ball(2)
    h = ball_automorphism(0.3)
    np.testing.assert_allclose(h(h(np.array([0.2 + 0.1j, -0.4j]))), [0.2 + 0.1j, -0.4j], atol=1e-14)
    rep = map_regularity(h, dom, dom, count=30)
    assert np.isfinite(rep.normal_preservation_sup_ratio)
    assert rep.holder_exponent_fit >= 0.95
    assert rep.df_alpha_fit == pytest.approx(1, abs=0.02)


def test_preservation_real_implies_complex():
    dom = models.ball(2)
    rep = check_normal_preservation(ball_automorphism(0.6), dom, dom, count=30)
    assert rep.implication_holds
    assert np.all(rep.ratios[0] <= rep.ratios[1] * (1 + 1e-12))


def test_df_alpha_non_proper_map():
    dom = models.ball(2)
    h = HoloMapSpec.linear(0.5 * np.eye(2))
    fit = estimate_df_alpha(h, dom, dom, count=4)
    assert abs(fit.alpha) < 1e-2


def test_holder_exponent_of_smooth_map():
    # w -> w^2 is Lipschitz on normal paths; curvature bends the fit slightly
    dom = models.unit_disc()
    h = parse_map(["^ z(1) 2"], 1)
    fit = holder_exponent_normal_paths(h, dom, count=4, alpha=1.0)
    assert 0.98 <= fit.gamma <= 1.0 + 1e-9
    assert fit.gamma >= fit.prediction_half_alpha - 0.05


# -- lempert exponent -------------------------------------------------------------------------


def test_lempert_alpha_values():
    assert lempert_alpha(2, 1) == 0.25
    assert lempert_alpha(1, 2) == pytest.approx(1 / 12, abs=1e-16)
    for eps, n in [(0, 1), (-1, 1), (1, 0)]:
        with pytest.raises(ValueError):
            lempert_alpha(eps, n)


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.integers(1, 10))
def test_lempert_alpha_monotone(e1, e2, n):
    lo, hi = sorted((e1, e2))
    assert lempert_alpha(lo, n) <= lempert_alpha(hi, n) < 1 / (2 * n)
    assert lempert_alpha(hi, n + 1) < lempert_alpha(hi, n)
