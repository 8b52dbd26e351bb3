"""Builders for the domains used throughout the experiments."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .expr import Abs2, AbsPow, Norm, ScalarField, SegmentDistance, add, const, mul, re_, scale
from .geometry import DomainSpec, estimate_gradient_bound


def _norm2(n):
    return add(*[Abs2(j) for j in range(1, n + 1)])


def ball_constraint(n: int, R: float) -> ScalarField:
    """|z|^2 - R^2."""
    return ScalarField(add(_norm2(n), const(-R * R)), n)


def ball(n: int = 2, R: float = 1.0) -> DomainSpec:
    f = ball_constraint(n, R)
    return DomainSpec(
        field=f,
        enclosing_radius=R,
        gradient_bound=2.5 * R,
        regularity="real-analytic",
        witness_point=np.zeros(n, dtype=complex),
        pseudoconvex_known=True,
        tubular_radius=0.5 * R,
        name=f"ball{n}" if R == 1 else f"ball{n}_R{R:g}",
        model=("ball", R),
    )


def unit_disc() -> DomainSpec:
    return ball(1, 1.0).with_name("disc")


def clipped(field: ScalarField, R: float, *, name: str, regularity="real-analytic",
            witness=None, pseudoconvex_known=False, tubular_radius=0.25,
            gradient_bound=None, extra=()) -> DomainSpec:
    """``{field < 0}`` intersected with the ball ``B(0, R)``."""
    n = field.dim
    if witness is None:
        witness = np.zeros(n, dtype=complex)
        witness[-1] = -0.5 * min(R, 1.0)
    if gradient_bound is None:
        gradient_bound = estimate_gradient_bound(field, R)
    return DomainSpec(
        field=field,
        enclosing_radius=R,
        gradient_bound=gradient_bound,
        regularity=regularity,
        witness_point=np.asarray(witness, dtype=complex),
        constraints=(ball_constraint(n, R),) + tuple(extra),
        pseudoconvex_known=pseudoconvex_known,
        tubular_radius=tubular_radius,
        name=name,
    )


def halfspace(n: int = 2, R: float = 1.0) -> DomainSpec:
    """``{Re z_n < 0}`` clipped to ``B(0, R)``."""
    d = clipped(ScalarField(re_(n), n), R, name=f"halfspace{n}", gradient_bound=1.0,
                pseudoconvex_known=True, tubular_radius=0.25 * R)
    return replace(d, model=("halfspace", R))


def right_halfplane(R: float = 1e4) -> DomainSpec:
    """``{Re z > 0}`` clipped to ``B(0, R)``; n = 1."""
    w = np.array([0.5 + 0j])
    return clipped(ScalarField(scale(-1.0, re_(1)), 1), R, name="halfplane", gradient_bound=1.0,
                   witness=w, pseudoconvex_known=True, tubular_radius=0.25 * R)


def polydisc(radii) -> DomainSpec:
    radii = [float(r) for r in radii]
    n = len(radii)
    pieces = [ScalarField(add(Abs2(j + 1), const(-r * r)), n) for j, r in enumerate(radii)]
    R = float(np.sqrt(sum(r * r for r in radii)))
    return DomainSpec(
        field=pieces[0],
        enclosing_radius=R * (1 + 1e-9),
        gradient_bound=2.5 * max(radii),
        regularity="real-analytic",
        witness_point=np.zeros(n, dtype=complex),
        constraints=tuple(pieces[1:]),
        pseudoconvex_known=True,
        tubular_radius=0.25 * min(radii),
        name="polydisc",
    )


def slit_complement(a: complex = -1.0, b: complex = 0.0, R: float = 10.0) -> DomainSpec:
    """``C`` minus the segment ``[a, b]``, clipped to ``B(0, R)``."""
    f = ScalarField(SegmentDistance(1, complex(a), complex(b)), 1)
    w = np.array([0.5 * (a + b) + 0.5j * max(abs(b - a), 1.0)])
    return DomainSpec(
        field=f,
        enclosing_radius=R,
        gradient_bound=1.0,
        regularity="C-one-one",
        witness_point=w,
        constraints=(ball_constraint(1, R),),
        tubular_radius=0.25,
        name="slit",
    )


def saddle(B: float = 0.0, a: float = 0.5, R: float = 2.0) -> DomainSpec:
    """``Re z_2 - 2a|z_1|^2 + B|z_2|^2 < 0`` clipped to ``B(0, R)``; the
    restricted Levi eigenvalue at the origin is ``-2a``."""
    terms = [re_(2), scale(-2.0 * a, Abs2(1))]
    if B:
        terms.append(scale(B, Abs2(2)))
    f = ScalarField(add(*terms), 2)
    tag = "saddle" if B == 0 and a == 0.5 else f"saddle_a{a:g}_B{B:g}"
    return clipped(f, R, name=tag, tubular_radius=0.25)


def flat_quartic(R: float = 2.0) -> DomainSpec:
    """``Re z_2 + |z_1|^4 < 0`` clipped to ``B(0, R)``: pseudoconvex, Levi-flat
    to second order at the origin."""
    f = ScalarField(add(re_(2), AbsPow(1, 4)), 2)
    return clipped(f, R, name="flat4", regularity="real-analytic", pseudoconvex_known=True,
                   tubular_radius=0.05)


def omega_tilde(m: float = 2, A: float = 1.0, B: float = 1.0, n: int = 2, R: float = 3.0) -> DomainSpec:
    """``Re z_n - A|z_1|^m + B(sum_{j>=2} |z_j|^m + |z_n||z|) < 0`` in ``B(0, R)``."""
    good = scale(-A, AbsPow(1, m))
    bad = [AbsPow(j, m) for j in range(2, n + 1)] + [mul(AbsPow(n, 1), Norm())]
    f = ScalarField(add(re_(n), good, scale(B, add(*bad))), n)
    mm = int(m) if float(m).is_integer() else m
    w = np.zeros(n, dtype=complex)
    w[-1] = -0.1
    dom = clipped(f, R, name=f"omega{mm}", regularity="C2", tubular_radius=0.05, witness=w,
                  gradient_bound=estimate_gradient_bound(f, R))
    return replace(dom, model=("omega", m, A))


__all__ = [
    "ball",
    "ball_constraint",
    "clipped",
    "flat_quartic",
    "halfspace",
    "omega_tilde",
    "polydisc",
    "right_halfplane",
    "saddle",
    "slit_complement",
    "unit_disc",
]
