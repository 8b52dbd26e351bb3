"""Closed-form Kobayashi metrics of model domains and the comparison tools
(holomorphic contraction, localization) that transfer them to other domains."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .geometry import DomainSpec, cvec, hermitian, norm


@dataclass(frozen=True)
class MetricValue:
    value: float
    exact: bool
    upper: Optional[float] = None


@dataclass(frozen=True)
class CanonicalDomain:
    """kind in {"disc", "halfplane", "ball", "polydisc", "slit", "ray"}.

    ``radii`` holds (R,) for a ball and the per-coordinate radii for a
    polydisc; ``segment`` the endpoints of a slit; ``base`` the start of the
    deleted ray ``[base, +inf)`` on the real axis."""

    kind: str
    radii: tuple = (1.0,)
    segment: tuple = (0.0, -1.0)
    base: float = 0.0

    def __post_init__(self):
        if self.kind not in ("disc", "halfplane", "ball", "polydisc", "slit", "ray"):
            raise ValueError(f"unknown canonical domain {self.kind!r}")
        if any(r <= 0 for r in self.radii):
            raise ValueError("radii must be positive")
        if self.kind == "slit" and self.segment[0] == self.segment[1]:
            raise ValueError("slit endpoints must be distinct")

    @classmethod
    def disc(cls):
        return cls("disc")

    @classmethod
    def halfplane(cls):
        return cls("halfplane")

    @classmethod
    def ball(cls, R=1.0):
        return cls("ball", radii=(float(R),))

    @classmethod
    def polydisc(cls, radii):
        return cls("polydisc", radii=tuple(float(r) for r in radii))

    @classmethod
    def slit(cls, z0, z1):
        return cls("slit", segment=(complex(z0), complex(z1)))

    @classmethod
    def ray(cls, base):
        return cls("ray", base=float(base))

    def contains(self, z) -> bool:
        z = cvec(z)
        if self.kind == "disc":
            return abs(z[0]) < 1
        if self.kind == "halfplane":
            return z[0].real > 0
        if self.kind == "ball":
            return norm(z) < self.radii[0]
        if self.kind == "polydisc":
            return bool(np.all(np.abs(z) < np.asarray(self.radii)))
        if self.kind == "slit":
            return segment_distance(z[0], *self.segment) > 0
        return not (z[0].imag == 0 and z[0].real >= self.base)


def segment_distance(z: complex, a: complex, b: complex) -> float:
    d = b - a
    s = min(max(((z - a) * np.conj(d)).real / abs(d) ** 2, 0.0), 1.0)
    return float(abs(z - a - s * d))


def poincare_distance(a: complex, b: complex) -> float:
    if abs(a) >= 1 or abs(b) >= 1:
        raise ValueError("Poincare distance needs points of the open unit disc")
    return float(np.arctanh(abs((a - b) / (1 - np.conj(a) * b))))


def ball_distance(z, w, R: float = 1.0) -> float:
    """Kobayashi distance of the ball ``B(0, R)``."""
    z = cvec(z) / R
    w = cvec(w) / R
    az, aw = 1 - hermitian(z, z).real, 1 - hermitian(w, w).real
    if az <= 0 or aw <= 0:
        raise ValueError("points must lie inside the ball")
    t = 1 - az * aw / abs(1 - hermitian(z, w)) ** 2
    return float(np.arctanh(np.sqrt(min(max(t, 0.0), 1.0))))


def kobayashi_halfplane(w: complex, X: complex) -> float:
    """Metric of the right half-plane: |X| / (2 Re w)."""
    if w.real <= 0:
        raise ValueError("point not in the right half-plane")
    return abs(X) / (2.0 * w.real)


def ray_complement_metric(w: complex, X: complex, base: float) -> float:
    """Exact metric of ``C`` minus the ray ``[base, +inf)``.

    ``w -> sqrt(base - w)`` maps the domain biholomorphically onto the right
    half-plane, giving ``|X| / (4 |f| Re f)``."""
    f = np.sqrt(complex(base - w))
    if f.real <= 0:
        raise ValueError("point lies on the deleted ray")
    return abs(X) / (4.0 * abs(f) * f.real)


def wedge_complement_metric(w: complex, X: complex, vertex: float, kappa: float) -> float:
    """Exact metric of ``C`` minus the closed sector ``{|arg(w - vertex)| <= arccos(kappa)}``.

    ``w -> (vertex - w)^alpha`` with ``alpha = pi / (2 (pi - beta))``,
    ``beta = arccos(kappa)``, maps the domain onto the right half-plane.
    ``kappa = 0`` is a half-plane, ``kappa -> 1`` the ray complement."""
    if not 0 <= kappa < 1:
        raise ValueError("kappa must lie in [0, 1)")
    beta = float(np.arccos(kappa))
    alpha = np.pi / (2.0 * (np.pi - beta))
    s = complex(vertex - w)
    th = np.angle(s)
    if s == 0 or abs(th) >= np.pi - beta:
        raise ValueError("point lies in the deleted sector")
    return float(alpha * abs(X) / (2.0 * abs(s) * np.cos(alpha * th)))


def slit_complement_lower_bound(z: complex, X: complex, segment) -> float:
    """Half-plane comparison through ``f(w) = sqrt(w / (w + eps0))`` after
    moving ``segment = (z0, z1)`` to ``[-eps0, 0]`` with ``z0 -> 0``."""
    z0, z1 = complex(segment[0]), complex(segment[1])
    eps0 = abs(z1 - z0)
    if eps0 == 0:
        raise ValueError("degenerate segment")
    rot = -eps0 / (z1 - z0)  # unit complex number sending z1 - z0 to -eps0
    w = (complex(z) - z0) * rot
    if segment_distance(w, 0.0, -eps0) == 0:
        raise ValueError("point lies on the deleted segment")
    f = np.sqrt(w / (w + eps0))
    fp = 0.5 / f * eps0 / (w + eps0) ** 2
    return float(abs(fp) * abs(X) / (2.0 * f.real))


def _disc_metric(z, X, R=1.0):
    if abs(z) >= R:
        raise ValueError("point not interior")
    return R * abs(X) / (R * R - abs(z) ** 2)


def kobayashi_canonical(dom: CanonicalDomain, z, X) -> MetricValue:
    if dom.kind in ("disc", "halfplane", "slit", "ray"):
        z0 = complex(np.ravel(z)[0])
        X0 = complex(np.ravel(X)[0])
    if dom.kind == "disc":
        return MetricValue(_disc_metric(z0, X0), True)
    if dom.kind == "halfplane":
        return MetricValue(kobayashi_halfplane(z0, X0), True)
    if dom.kind == "ray":
        return MetricValue(ray_complement_metric(z0, X0, dom.base), True)
    if dom.kind == "slit":
        lo = slit_complement_lower_bound(z0, X0, dom.segment)
        return MetricValue(lo, False, upper=abs(X0) / segment_distance(z0, *dom.segment))
    z, X = cvec(z), cvec(X)
    if dom.kind == "ball":
        R = dom.radii[0]
        a = R * R - hermitian(z, z).real
        if a <= 0:
            raise ValueError("point not interior")
        v = hermitian(X, X).real / a + abs(hermitian(X, z)) ** 2 / (a * a)
        return MetricValue(float(np.sqrt(v)), True)
    return MetricValue(max(_disc_metric(zj, Xj, r) for zj, Xj, r in zip(z, X, dom.radii)), True)


def contraction_transfer(h, G: CanonicalDomain, z, X) -> float:
    """Lower bound ``F_G(h(z), h'(z) X)`` for any domain mapped into ``G`` by ``h``."""
    w = h(cvec(z))
    if not G.contains(w):
        raise ValueError("h(z) is not interior to the target domain")
    Y = h.push(z, X)
    return kobayashi_canonical(G, w, Y).value


# ---------------------------------------------------------------------------
# localization


def coth(x: float) -> float:
    """coth via expm1 so small arguments keep full precision."""
    if x <= 0:
        raise ValueError("coth needs a positive argument")
    if x > 20:
        return 1.0 + 2.0 * np.exp(-2 * x)
    e = np.expm1(2.0 * x)
    return float((e + 2.0) / e)


def _sphere_points(dim2, count, rng):
    v = rng.normal(size=(count, dim2))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def patch_distance_lower_bound(R_enc: float, z, center, radius: float, seed: int = 0) -> float:
    """Lower bound for the Lempert function from ``z`` to the complement of
    ``B(center, radius)`` inside any domain contained in ``B(0, R_enc)``.

    Distances decrease under inclusion, so it suffices to minimise the exact
    ball distance of ``B(0, R_enc)`` from ``z`` over the patch sphere.  The
    minimum is located by dense sampling followed by local refinement; the
    elementary bound ``arctanh(dist / (R_enc + |z|))`` is kept as a floor
    check."""
    z, c = cvec(z), cvec(center)
    gap = radius - norm(z - c)
    if gap <= 0:
        return 0.0
    n = z.size
    rng = np.random.default_rng(seed)
    S = _sphere_points(2 * n, 2000 * n, rng)
    pts = c[None, :] + radius * (S[:, 0::2] + 1j * S[:, 1::2])
    R2 = R_enc * R_enc
    a_z = R2 - hermitian(z, z).real

    def tanh2(w):
        a_w = R2 - np.sum(np.abs(w) ** 2, axis=-1)
        inner = R2 - np.sum(w * np.conj(z), axis=-1)
        val = np.where(a_w > 0, 1 - a_z * a_w / np.abs(inner) ** 2, 1.0)
        return np.clip(val, 0.0, 1.0)

    vals = tanh2(pts)
    best = float(vals.min())
    # a flat sample (z at the patch centre of a centred ball) needs no refinement
    order = np.argsort(vals)[:5] if vals.max() - best > 1e-12 else []

    def obj(x):
        u = x / np.linalg.norm(x)
        w = c + radius * (u[0::2] + 1j * u[1::2])
        return float(tanh2(w[None, :])[0])

    for k in order:
        res = minimize(obj, S[k], method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 2000})
        best = min(best, float(res.fun))
    ell = float(np.arctanh(np.sqrt(best))) if best < 1 else np.inf
    floor = float(np.arctanh(min(gap / (R_enc + norm(z)), 1 - 1e-16)))
    if ell < floor * (1 - 1e-9):
        raise RuntimeError("patch distance minimisation fell below the elementary floor")
    return ell


def localization_factor(domain: DomainSpec, z, center, radius: float, seed: int = 0) -> float:
    """``coth(l)`` where ``l`` lower-bounds the Lempert distance from ``z`` to
    ``domain \\ B(center, radius)``; equals 1 when the patch covers the domain."""
    z, c = cvec(z), cvec(center)
    if norm(c) + domain.enclosing_radius <= radius:
        return 1.0
    ell = patch_distance_lower_bound(domain.enclosing_radius, z, c, radius, seed)
    if ell <= 0:
        raise ValueError("point on or outside the patch boundary: localization unusable")
    if not np.isfinite(ell):
        return 1.0
    return coth(ell)


__all__ = [
    "CanonicalDomain",
    "MetricValue",
    "ball_distance",
    "contraction_transfer",
    "coth",
    "kobayashi_canonical",
    "kobayashi_halfplane",
    "localization_factor",
    "patch_distance_lower_bound",
    "poincare_distance",
    "ray_complement_metric",
    "segment_distance",
    "slit_complement_lower_bound",
    "wedge_complement_metric",
]
