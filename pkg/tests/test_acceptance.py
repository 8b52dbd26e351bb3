"""End-to-end acceptance checks; each prints one PASS/FAIL line and the
session summary lists all of them."""

import time

import numpy as np
import pytest

from conftest import random_unitary
from koblab import models
from koblab.analysis import lempert_alpha, map_regularity, pseudoconvexity_probe
from koblab.bounds import compute_bounds, disc_upper_bound_nonpsc
from koblab.discs import recheck_containment
from koblab.geometry import levi_form
from koblab.maps import HoloMapSpec, ball_automorphism
from koblab.metrics import (
    CanonicalDomain,
    kobayashi_canonical,
    localization_factor,
    segment_distance,
    slit_complement_lower_bound,
)
from koblab.optimize import disc_upper_bound_optimize
from koblab.presets import check_windows, get_preset

REL = 1e-9   # float comparisons of mathematically exact inequalities


def _query(kind, rng):
    n = 1 if kind in ("disc", "halfplane") else 2
    X = rng.normal(size=n) + 1j * rng.normal(size=n)
    if kind == "halfplane":
        return np.array([rng.uniform(0.05, 5) + 1j * rng.uniform(-5, 5)]), X
    if kind == "polydisc":
        return rng.uniform(0, 0.95, n) * np.exp(1j * rng.uniform(0, 2 * np.pi, n)), X
    z = rng.normal(size=n) + 1j * rng.normal(size=n)
    return z / np.linalg.norm(z) * rng.uniform(0, 0.95), X


def test_canonical_exactness(acceptance):
    rng = np.random.default_rng(2024)
    cases = {
        "disc": (models.unit_disc(), CanonicalDomain.disc()),
        "halfplane": (models.right_halfplane(), CanonicalDomain.halfplane()),
        "ball": (models.ball(2), CanonicalDomain.ball()),
        "polydisc": (models.polydisc([1.0, 1.0]), CanonicalDomain.polydisc([1.0, 1.0])),
    }
    t0 = time.time()
    worst, below = {}, 0
    for kind, (dom, canon) in cases.items():
        errs = []
        for _ in range(25):
            z, X = _query(kind, rng)
            exact = kobayashi_canonical(canon, z, X).value
            up = disc_upper_bound_optimize(dom, z, X, degree=3)[0]
            below += up < exact * (1 - REL)
            errs.append(abs(up / exact - 1))
        worst[kind] = max(errs)
    elapsed = time.time() - t0
    ok = max(worst.values()) <= 5e-3 and below == 0 and elapsed < 60
    detail = (", ".join(f"{k} {v:.1e}" for k, v in worst.items())
              + f"; below exact {below}; {elapsed:.1f} s")
    assert acceptance(1, ok, detail), detail


def test_slit_sandwich(acceptance):
    dom = models.slit_complement(-1.0, 0.0)
    rng = np.random.default_rng(3)
    violations, n = 0, 0
    while n < 20:
        z = complex(rng.uniform(-2, 1), rng.uniform(-1.5, 1.5))
        d = segment_distance(z, -1.0, 0.0)
        if not 0 < d <= 1:
            continue
        n += 1
        X = complex(*rng.normal(size=2))
        lo = slit_complement_lower_bound(z, X, (0.0, -1.0))
        up = disc_upper_bound_optimize(dom, np.array([z]), np.array([X]))[0]
        chain = [abs(X) / (8 * d), lo, up, abs(X) / d]
        violations += sum(a > b * (1 + REL) for a, b in zip(chain, chain[1:]))
    detail = f"{violations} violations over {n} points"
    assert acceptance(2, violations == 0, detail), detail


def test_weighted_model_exponents(acceptance):
    parts, ok = [], True
    for name, m in (("omega-m2", 2), ("omega-m3", 3)):
        preset = get_preset(name)
        t0 = time.time()
        rep = preset.execute()
        elapsed = time.time() - t0
        target = -(1 - 1 / (2 * m))
        for side in ("lower", "upper"):
            f = rep.fits[side]
            good = f["slope"] is not None and abs(f["slope"] - target) <= 0.05 and f["r2"] >= 0.99
            ok &= good
            parts.append(f"m={m} {side} {f['raw_slope']:.4f} (r2 {f['r2']:.4f})")
        ok &= rep.sandwich_ok and elapsed < 300 and len(rep.samples) == 8
    detail = "; ".join(parts)
    assert acceptance(3, ok, detail), detail


def test_c11_pinch(acceptance):
    rep = get_preset("sharpness-c2").execute()
    fits = rep.fits
    ok = rep.sandwich_ok and all(fits[s]["slope"] is not None and abs(fits[s]["slope"] + 0.5) <= 0.05
                                 for s in ("lower", "upper"))
    detail = (f"lower {fits['lower']['raw_slope']:.4f}, upper {fits['upper']['raw_slope']:.4f}, "
              f"sandwich {'ok' if rep.sandwich_ok else 'violated'}")
    assert acceptance(4, ok, detail), detail


def test_nonpsc_witness_and_probe(acceptance):
    dom = models.saddle()
    eig = levi_form(dom.field, np.zeros(2)).restricted_eigenvalues
    rep = get_preset("nonpsc-witness").execute()
    slope = rep.fits["upper"]["slope"]
    sweep_ok = slope is not None and abs(slope + 0.5) <= 0.05
    w = disc_upper_bound_nonpsc(dom, np.zeros(2), 1e-4)
    contained = recheck_containment(dom, w.disc, 256, 1024) < 0
    saddle = pseudoconvexity_probe(dom, budget=60, seed=0)
    others = [pseudoconvexity_probe(d, budget=60, seed=0) for d in (models.ball(2), models.flat_quartic())]
    ok = (np.allclose(eig, [-1.0]) and sweep_ok and contained and saddle.pseudoconvex_witness
          and all(o.verdict.startswith("Levi-nonnegative") for o in others))
    detail = (f"eigenvalue {eig.min():.3f}, witness slope {rep.fits['upper']['raw_slope']:.4f}, "
              f"saddle probe {'witness' if saddle.pseudoconvex_witness else 'none'}, "
              f"ball/flat4 {[o.verdict.split(' on')[0] for o in others]}")
    assert acceptance(5, ok, detail), detail


def test_pseudoconvex_two_thirds(acceptance):
    rep = get_preset("psc-23").execute()
    f = rep.fits["lower"]
    above = sum(1 for s in rep.samples if s.lower_ok and s.upper_ok and s.lower > s.upper * (1 + REL))
    certified = sum(s.lower_ok for s in rep.samples)
    ok = (f["slope"] is not None and abs(f["slope"]) >= 2 / 3 - 0.05 and above == 0
          and certified == len(rep.samples) and all(s.upper_ok for s in rep.samples))
    detail = f"lower slope {f['raw_slope']:.4f} (r2 {f['r2']:.4f}), {certified} certified, {above} above upper"
    assert acceptance(6, ok, detail), detail


def _disc_metric(z, X, c=0.0, rho=1.0):
    return rho * abs(X) / (rho ** 2 - abs(z - c) ** 2)


def test_localization_nested_discs(acceptance):
    dom = models.unit_disc()
    rng = np.random.default_rng(17)
    violations = 0
    for _ in range(50):
        rho = rng.uniform(0.2, 0.9)
        c = (1 - rho) * rng.uniform() * np.exp(2j * np.pi * rng.uniform())
        z = c + 0.9 * rho * rng.uniform() * np.exp(2j * np.pi * rng.uniform())
        X = complex(*rng.normal(size=2))
        f = localization_factor(dom, [z], [c], rho)
        F_dom, F_U = _disc_metric(z, X), _disc_metric(z, X, c, rho)
        violations += (F_dom > F_U * (1 + REL)) + (F_U > f * F_dom * (1 + REL))
    f0 = localization_factor(dom, [0], [0], 0.5)
    F_dom, F_U = _disc_metric(0, 1), _disc_metric(0, 1, 0, 0.5)
    edge = abs(F_U - f0 * F_dom) <= 1e-9
    detail = f"{violations} violations over 50 queries; edge case F_U - coth * F = {F_U - f0 * F_dom:.1e}"
    assert acceptance(7, violations == 0 and edge, detail), detail


def test_mapping_toolkit(acceptance):
    dom = models.ball(2)
    ok, parts = True, []
    maps = [HoloMapSpec.identity(2)] + [HoloMapSpec.linear(random_unitary(2, np.random.default_rng(s)))
                                         for s in (0, 1)]
    for h in maps:
        rep = map_regularity(h, dom, dom, count=40)
        ok &= (abs(rep.normal_preservation_sup_ratio - 1) <= 1e-12 and abs(rep.real_preservation_sup_ratio - 1)
               <= 1e-12 and abs(rep.df_alpha_fit - 1) <= 1e-10 and abs(rep.holder_exponent_fit - 1) <= 1e-3)
        parts.append(f"{h.name}: ratio-1 {rep.normal_preservation_sup_ratio - 1:.0e}, "
                     f"alpha-1 {rep.df_alpha_fit - 1:.0e}, gamma {rep.holder_exponent_fit:.5f}")
    rep = map_regularity(ball_automorphism(0.3), dom, dom, count=1000)
    ok &= np.isfinite(rep.normal_preservation_sup_ratio) and rep.holder_exponent_fit >= 0.95
    parts.append(f"ball_aut 0.3: ratio {rep.normal_preservation_sup_ratio:.3f}, gamma {rep.holder_exponent_fit:.4f}")
    ok &= lempert_alpha(2, 1) == 0.25
    detail = "; ".join(parts)
    assert acceptance(8, ok, detail), detail


def test_invariant_suite(acceptance):
    rng = np.random.default_rng(99)
    counts = {"homogeneity": 0, "unitary": 0, "sandwich": 0, "containment": 0}
    checks = 0
    for dom, sample in ((models.ball(2), "ball"), (models.saddle(), "saddle")):
        for _ in range(5):
            if sample == "ball":
                z = rng.normal(size=2) + 1j * rng.normal(size=2)
                z *= rng.uniform(0.3, 0.97) / np.linalg.norm(z)
            else:
                z = np.array([0.1 * complex(*rng.normal(size=2)), -rng.uniform(2e-3, 5e-2)])
                if not dom.contains(z):
                    continue
            X = rng.normal(size=2) + 1j * rng.normal(size=2)
            res = compute_bounds(dom, z, X, seed=1)
            checks += 1
            s = complex(*rng.normal(size=2))
            scaled = compute_bounds(dom, z, s * X, optimize=False).lower
            counts["homogeneity"] += abs(scaled - abs(s) * res.lower) > REL * abs(s) * res.lower
            counts["sandwich"] += res.lower > res.upper * (1 + REL)
            if res.witness is not None:
                counts["containment"] += recheck_containment(dom, res.witness, 256, 1024) >= 0
            if sample == "ball":
                U = random_unitary(2, rng)
                rot = compute_bounds(dom, U @ z, U @ X, optimize=False).lower
                counts["unitary"] += abs(rot - res.lower) > REL * res.lower
    total = sum(counts.values())
    detail = f"{total} violations over {checks} queries ({', '.join(f'{k} {v}' for k, v in counts.items())})"
    assert acceptance(9, total == 0 and checks >= 8, detail), detail
