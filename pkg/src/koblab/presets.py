"""Ready-made experiments: each preset is a domain, a query rule along the
inner normal, the lower/upper bound routes to use and the slope windows the
fitted blow-up exponents are expected to fall in."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import models
from .analysis import SweepReport, normal_ray_sweep, pseudoconvexity_probe
from .bounds import (
    disc_upper_bound_nonpsc,
    disc_upper_bound_weighted_model,
    model_envelope,
    normal_estimate_c11,
    pseudoconvex_lower_bound,
    tangential_weighted_lower_bound,
)
from .geometry import cvec
from .optimize import disc_upper_bound_optimize

BUILTIN_DOMAINS = {
    "ball": lambda: models.ball(2),
    "ball1": lambda: models.ball(1),
    "disc": models.unit_disc,
    "halfplane": models.right_halfplane,
    "halfspace": lambda: models.halfspace(2),
    "polydisc": lambda: models.polydisc([1.0, 1.0]),
    "slit": models.slit_complement,
    "saddle": models.saddle,
    "flat4": models.flat_quartic,
    "omega2": lambda: models.omega_tilde(2),
    "omega3": lambda: models.omega_tilde(3),
}


def builtin_domain(name: str):
    if name not in BUILTIN_DOMAINS:
        raise KeyError(f"unknown built-in domain {name!r}; choose from {sorted(BUILTIN_DOMAINS)}")
    return BUILTIN_DOMAINS[name]()


@dataclass
class Preset:
    name: str
    description: str
    domain: Callable
    deltas: np.ndarray
    run: Callable                       # (domain, deltas, workers, seed) -> SweepReport
    windows: dict = field(default_factory=dict)   # side -> (lo, hi) for the slope

    def execute(self, workers: int = 1, seed: int = 0, deltas=None) -> SweepReport:
        dom = self.domain()
        return self.run(dom, self.deltas if deltas is None else np.asarray(deltas), workers, seed)


def check_windows(report: SweepReport, windows: dict) -> dict:
    """Per side: "ok", "outside", or "no fit" (too few samples or r^2 too low)."""
    out = {}
    for side, (lo, hi) in windows.items():
        slope = report.fits.get(side, {}).get("slope")
        if slope is None:
            out[side] = "no fit"
        else:
            out[side] = "ok" if lo <= slope <= hi else "outside"
    return out


def _axis_point(d):
    return np.array([0.0, -d], dtype=complex)


# -- sharpness of the C^{1,1} exponent on Re z2 - |z1|^2 < 0 -----------------


def _run_sharpness(dom, deltas, workers, seed):
    def X_of(d):
        return np.array([d ** -0.5, 1.0], dtype=complex)

    X_of.__name__ = "X(delta) = (delta^-1/2, 1)"

    def lower(z, X):
        return normal_estimate_c11(dom, z, X, seed=seed)

    def upper(z, X):
        d = -z[-1].real
        # with kappa = 1/2 and v = e1 the witness direction is X(delta) / 2
        w = disc_upper_bound_nonpsc(dom, np.zeros(2, dtype=complex), d, kappa=0.5, tangent=[1, 0])
        return 2.0 * w.upper

    return normal_ray_sweep(dom, None, deltas, X_of, lower, upper, workers, seed, point=_axis_point)


# -- weighted exponent 1 - 1/(2m) on the model domains -------------------------


def _run_omega(m):
    K = float(np.sqrt(2.0))

    def run(dom, deltas, workers, seed):
        # Re z_n < A|z_1|^m - B(...) <= A|z_1|^m inside B(0, R): no mixed term needed
        env = model_envelope(m, 1.0, dom.enclosing_radius, n=2, A_mixed=0.0)

        def lower(z, X):
            return tangential_weighted_lower_bound(env, z, X, K)

        def upper(z, X):
            return disc_upper_bound_weighted_model(dom, z, X, m, K=K)[0]

        return normal_ray_sweep(dom, None, deltas, np.array([1, 1], dtype=complex), lower, upper,
                                workers, seed, point=_axis_point)

    return run


# -- witness discs at a Levi-negative point ------------------------------------


def _run_nonpsc(dom, deltas, workers, seed):
    p0 = np.zeros(2, dtype=complex)
    cache = {}

    def X_of(d):
        w = disc_upper_bound_nonpsc(dom, p0, d)
        cache[d] = w
        return w.direction

    X_of.__name__ = "witness direction X_delta"

    def lower(z, X):
        return normal_estimate_c11(dom, z, X, seed=seed)

    def upper(z, X):
        return cache[-z[-1].real].upper

    return normal_ray_sweep(dom, None, deltas, X_of, lower, upper, workers, seed, point=_axis_point)


# -- pseudoconvex 2/3 estimate ---------------------------------------------------


def _run_psc23(dom, deltas, workers, seed):
    def lower(z, X):
        return pseudoconvex_lower_bound(dom, z, X, seed=seed)

    def upper(z, X):
        return disc_upper_bound_optimize(dom, z, X, seed=seed)[0]

    return normal_ray_sweep(dom, cvec([0, 0]), deltas, np.array([0, 1], dtype=complex), lower, upper,
                            workers, seed, point=_axis_point)


# -- ball baseline ------------------------------------------------------------------


def _run_ball(dom, deltas, workers, seed):
    p0 = cvec([1, 0])
    return normal_ray_sweep(dom, p0, deltas, "normal", workers=workers, seed=seed)


PRESETS = {
    "sharpness-c2": Preset("sharpness-c2", "Re z2 - |z1|^2 < 0 with X(delta) = (delta^-1/2, 1): "
                           "C^{1,1} lower bound against witness discs",
                           models.saddle, np.geomspace(1e-3, 1e-6, 8), _run_sharpness,
                           {"lower": (-0.55, -0.45), "upper": (-0.55, -0.45)}),
    "omega-m2": Preset("omega-m2", "weighted model m = 2, direction (1, 1)",
                       lambda: models.omega_tilde(2), np.geomspace(1e-2, 1e-5, 8), _run_omega(2),
                       {"lower": (-0.80, -0.70), "upper": (-0.80, -0.70)}),
    "omega-m3": Preset("omega-m3", "weighted model m = 3, direction (1, 1)",
                       lambda: models.omega_tilde(3), np.geomspace(1e-2, 1e-5, 8), _run_omega(3),
                       {"lower": (-5 / 6 - 0.05, -5 / 6 + 0.05), "upper": (-5 / 6 - 0.05, -5 / 6 + 0.05)}),
    "nonpsc-witness": Preset("nonpsc-witness", "witness discs at the Levi-negative origin of the saddle",
                             models.saddle, np.geomspace(1e-3, 1e-6, 8), _run_nonpsc,
                             {"upper": (-0.55, -0.45)}),
    "psc-23": Preset("psc-23", "Re z2 + |z1|^4 < 0, normal direction: cubic-envelope lower bound",
                     models.flat_quartic, np.geomspace(1e-3, 1e-6, 8), _run_psc23,
                     {"lower": (-np.inf, -2 / 3 + 0.05)}),
    "ball-baseline": Preset("ball-baseline", "unit ball in C^2, radial direction at e1",
                            lambda: models.ball(2), np.geomspace(1e-2, 1e-5, 8), _run_ball,
                            {"lower": (-1.0 - 1e-9, -0.5), "upper": (-1.05, -0.95)}),
}


def get_preset(name: str) -> Preset:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return PRESETS[name]


def probe_preset(name: str, seed: int = 0, budget: int = 200, workers: int = 1):
    """Pseudoconvexity probe on a built-in domain."""
    return pseudoconvexity_probe(builtin_domain(name), budget=budget, seed=seed, workers=workers)


__all__ = ["BUILTIN_DOMAINS", "PRESETS", "Preset", "builtin_domain", "check_windows", "get_preset",
           "probe_preset"]
