import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_unitary
from koblab import models
from koblab.maps import HoloMapSpec
from koblab.metrics import (
    CanonicalDomain,
    ball_distance,
    contraction_transfer,
    coth,
    kobayashi_canonical,
    kobayashi_halfplane,
    localization_factor,
    poincare_distance,
    ray_complement_metric,
    segment_distance,
    slit_complement_lower_bound,
    wedge_complement_metric,
)


def disc_metric(z, X, c=0.0, rho=1.0):
    return rho * abs(X) / (rho ** 2 - abs(z - c) ** 2)


def test_poincare_distance_examples(oracles):
    assert poincare_distance(0, 0) == 0
    assert poincare_distance(0, 0.5) == pytest.approx(oracles["poincare_half"], rel=1e-15)
    rng = np.random.default_rng(1)
    for _ in range(10):
        a, b = 0.7 * (rng.uniform(-1, 1, 2) @ [1, 1j]), 0.7 * (rng.uniform(-1, 1, 2) @ [1, 1j])
        assert poincare_distance(a, b) == pytest.approx(poincare_distance(b, a), abs=1e-14)
    with pytest.raises(ValueError):
        poincare_distance(1.0, 0)


def test_canonical_examples(oracles):
    assert kobayashi_canonical(CanonicalDomain.disc(), 0, 1) == type(kobayashi_canonical(
        CanonicalDomain.disc(), 0, 1))(1.0, True)
    v = kobayashi_canonical(CanonicalDomain.halfplane(), 1, 1)
    assert v.value == 0.5 and v.exact
    X = np.array([0.3 - 0.4j, 1.2])
    v = kobayashi_canonical(CanonicalDomain.ball(), [0, 0], X)
    assert v.value == pytest.approx(np.linalg.norm(X), rel=1e-15) and v.exact
    for r, ref in oracles["ball_radial"].items():
        v = kobayashi_canonical(CanonicalDomain.ball(), [float(r), 0], [1, 0]).value
        assert v == pytest.approx(ref, rel=1e-14)
    ref = oracles["ball_generic"]
    v = kobayashi_canonical(CanonicalDomain.ball(), [0.3, 0.2j], [1, 1j]).value
    assert v == pytest.approx(ref["value"], rel=1e-14)


def test_ball_radial_against_disc_optimizer(oracles):
    from koblab.optimize import disc_upper_bound_optimize

    for r in ("0.3", "0.9"):
        up = disc_upper_bound_optimize(models.ball(2), [float(r), 0], [1, 0])[0]
        assert oracles["ball_radial"][r] <= up <= oracles["ball_radial"][r] * 1.005


def test_polydisc_is_max_of_factors():
    dom = CanonicalDomain.polydisc([1.0, 2.0])
    z, X = [0.5, 1.0j], [1.0, 1.0]
    expect = max(disc_metric(0.5, 1.0), disc_metric(1.0j, 1.0, rho=2.0))
    assert kobayashi_canonical(dom, z, X).value == pytest.approx(expect)


def test_exterior_point_rejected():
    with pytest.raises(ValueError):
        kobayashi_canonical(CanonicalDomain.disc(), 1.2, 1)
    with pytest.raises(ValueError):
        kobayashi_halfplane(-1 + 0j, 1)


def test_slit_complement_examples(oracles):
    ref = oracles["slit_tip"]
    v = slit_complement_lower_bound(0.01, 1.0, (0.0, -1.0))
    assert v == pytest.approx(ref["bound"], rel=1e-12)
    assert v >= (1 / 8) / 0.01
    assert slit_complement_lower_bound(0.01, 2.0, (0.0, -1.0)) == pytest.approx(2 * v, rel=1e-14)
    mv = kobayashi_canonical(CanonicalDomain.slit(0.0, -1.0), 0.01, 1.0)
    assert not mv.exact and mv.value == pytest.approx(v) and mv.upper == pytest.approx(100.0)
    with pytest.raises(ValueError):
        slit_complement_lower_bound(-0.5, 1.0, (0.0, -1.0))


def test_ray_and_wedge_limits():
    w, X = 0.3 + 0.4j, 1.0
    # kappa = 0 is the half-plane Re w < vertex
    assert wedge_complement_metric(w, X, 1.0, 0.0) == pytest.approx(abs(X) / (2 * (1.0 - w.real)))
    # kappa -> 1 approaches the ray complement
    assert wedge_complement_metric(w, X, 1.0, 1 - 1e-12) == pytest.approx(
        ray_complement_metric(w, X, 1.0), rel=1e-5)


def test_contraction_transfer_examples(oracles):
    ident = HoloMapSpec.identity(1)
    assert contraction_transfer(ident, CanonicalDomain.disc(), [0.3j], [1.0]) == pytest.approx(
        kobayashi_canonical(CanonicalDomain.disc(), 0.3j, 1.0).value)
    # inclusion D(0, 1/2) into D: the D metric is below the D(0, 1/2) metric
    z = 0.2
    assert contraction_transfer(ident, CanonicalDomain.disc(), [z], [1.0]) <= disc_metric(z, 1.0, rho=0.5)
    # -z_2 maps {Re z_2 < 0} into the right half-plane
    from koblab.maps import CBin, CConst, CVar

    h = HoloMapSpec([CBin("*", CConst(-1.0), CVar(2))], 2)
    for d, ref in oracles["halfplane_projection"].items():
        d = float(d)
        v = contraction_transfer(h, CanonicalDomain.halfplane(), [0, -d], [0, 1])
        assert v == pytest.approx(ref, rel=1e-14)


def test_localization_equality_edge(oracles):
    ref = oracles["localization_edge"]
    f = localization_factor(models.unit_disc(), [0], [0], 0.5)
    assert f == pytest.approx(ref["coth"], abs=1e-9)
    F_omega, F_U = disc_metric(0, 1), disc_metric(0, 1, rho=0.5)
    assert F_omega <= F_U <= f * F_omega * (1 + 1e-9)


def test_localization_sandwich_random():
    rng = np.random.default_rng(11)
    dom = models.unit_disc()
    for _ in range(50):
        rho = rng.uniform(0.2, 0.9)
        c = (1 - rho) * rng.uniform(0, 1) * np.exp(2j * np.pi * rng.uniform())
        z = c + rho * 0.9 * rng.uniform() * np.exp(2j * np.pi * rng.uniform())
        X = rng.normal() + 1j * rng.normal()
        f = localization_factor(dom, [z], [c], rho)
        F_omega, F_U = disc_metric(z, X), disc_metric(z, X, c, rho)
        assert F_omega <= F_U * (1 + 1e-12)
        assert F_U <= f * F_omega * (1 + 1e-9)


def test_localization_factor_monotone_and_degenerate():
    dom = models.ball(2)
    fs = [localization_factor(dom, [0, 0], [0, 0], r) for r in (0.3, 0.5, 0.8, 0.95)]
    assert all(a > b for a, b in zip(fs, fs[1:]))
    assert localization_factor(dom, [0, 0], [0, 0], 2.5) == 1.0
    with pytest.raises(ValueError):
        localization_factor(dom, [0.5, 0], [0, 0], 0.5)


def test_coth_precision():
    assert coth(1e-8) == pytest.approx(1e8, rel=1e-12)
    assert coth(np.arctanh(0.5)) == pytest.approx(2.0, rel=1e-15)
    with pytest.raises(ValueError):
        coth(0.0)


# -- properties ----------------------------------------------------------------

unit = st.floats(-0.6, 0.6, allow_nan=False)
scales = st.sampled_from([2.0, 10.0, 1j, -0.5 + 0.5j])


@given(unit, unit, unit, unit, unit, unit, scales)
def test_homogeneity(a, b, c, d, e, f, s):
    z = np.array([a + 1j * b, c + 1j * d]) * 0.7
    X = np.array([e + 1j * f, 1.0])
    for dom in (CanonicalDomain.ball(), CanonicalDomain.polydisc([1, 1])):
        v1 = kobayashi_canonical(dom, z, X).value
        v2 = kobayashi_canonical(dom, z, s * X).value
        assert v2 == pytest.approx(abs(s) * v1, rel=1e-12)
    w = complex(a + 0.7, b)
    assert slit_complement_lower_bound(w, s, (0, -1)) == pytest.approx(
        abs(s) * slit_complement_lower_bound(w, 1.0, (0, -1)), rel=1e-12)


@given(unit, unit, unit, unit, st.integers(0, 10_000))
def test_ball_unitary_invariance(a, b, c, d, seed):
    U = random_unitary(2, np.random.default_rng(seed))
    z = 0.7 * np.array([a + 1j * b, c + 1j * d])
    X = np.array([1.0, 0.5j])
    v1 = kobayashi_canonical(CanonicalDomain.ball(), z, X).value
    v2 = kobayashi_canonical(CanonicalDomain.ball(), U @ z, U @ X).value
    assert v2 == pytest.approx(v1, rel=1e-12)
    w = 0.5 * np.array([c, a])
    assert ball_distance(U @ z, U @ w) == pytest.approx(ball_distance(z, w), rel=1e-9, abs=1e-12)


@given(unit, unit, unit, unit)
def test_inclusion_monotonicity(a, b, c, d):
    z = 0.7 * np.array([a + 1j * b, c + 1j * d])
    X = np.array([1.0, 1j])
    big = kobayashi_canonical(CanonicalDomain.ball(2.0), z, X).value
    small = kobayashi_canonical(CanonicalDomain.ball(1.0), z, X).value
    assert big <= small


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_slit_bound_sandwich(x, y):
    z = complex(x, y)
    d = segment_distance(z, -1.0, 0.0)
    near = abs(z)
    if d < 1e-6 or near > 1:
        return
    v = slit_complement_lower_bound(z, 1.0, (0.0, -1.0))
    assert v <= 1.0 / d * (1 + 1e-12)
    assert v >= 1.0 / (8 * near) * (1 - 1e-12)
