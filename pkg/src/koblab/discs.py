"""Analytic discs and certified containment checks.

A disc is ``Phi_j(zeta) = P_j(zeta) / (1 - q_j zeta)`` per coordinate, with
polynomial numerators ``P_j``; all poles zero gives the polynomial discs.
Containment ``Phi(closed D) in {r < 0}`` is certified by enclosing
``r o Phi`` with first-order Taylor models on an adaptively refined polar
grid of the closed unit disc.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import DomainSpec, cvec
from .taylor import TM, cmul, polar_cells


@dataclass
class AnalyticDisc:
    coeffs: np.ndarray              # (D + 1, n) numerator coefficients
    mu: float                       # Phi'(0) = mu * direction
    direction: np.ndarray
    poles: Optional[np.ndarray] = None

    def __post_init__(self):
        self.coeffs = np.atleast_2d(np.asarray(self.coeffs, dtype=complex))
        self.direction = cvec(self.direction)
        n = self.coeffs.shape[1]
        self.poles = np.zeros(n, dtype=complex) if self.poles is None else cvec(self.poles)
        if np.any(np.abs(self.poles) >= 1):
            raise ValueError("poles must lie outside the closed unit disc (|q| < 1)")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("disc coefficients must be finite")
        if not self.mu > 0:
            raise ValueError("mu must be positive")

    @property
    def dim(self):
        return self.coeffs.shape[1]

    @property
    def degree(self):
        return self.coeffs.shape[0] - 1

    @property
    def center(self):
        return self.coeffs[0].copy()

    def derivative_at_zero(self):
        d1 = self.coeffs[1] if self.degree >= 1 else np.zeros(self.dim, dtype=complex)
        return d1 + self.poles * self.coeffs[0]

    @property
    def upper(self):
        return 1.0 / self.mu

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        P = np.zeros(zeta.shape + (self.dim,), dtype=complex)
        for a in self.coeffs[::-1]:
            P = P * zeta[..., None] + a
        return P / (1.0 - self.poles * zeta[..., None])

    def scaled(self, s: float) -> "AnalyticDisc":
        """``zeta -> Phi(s zeta)``."""
        powers = s ** np.arange(self.degree + 1)
        return AnalyticDisc(self.coeffs * powers[:, None], self.mu * s, self.direction, self.poles * s)

    def taylor(self, re: TM, im: TM):
        """Taylor models of (Re Phi_j, Im Phi_j) over cells of zeta."""
        out = []
        for j in range(self.dim):
            pr = TM.constant(self.coeffs[-1, j].real, re.h)
            pi = TM.constant(self.coeffs[-1, j].imag, re.h)
            for a in self.coeffs[-2::-1, j]:
                pr, pi = cmul(pr, pi, re, im)
                pr, pi = pr + a.real, pi + a.imag
            q = self.poles[j]
            if q != 0:
                dr = 1.0 - (q.real * re - q.imag * im)
                di = -(q.real * im + q.imag * re)
                inv = (dr.sq() + di.sq()).reciprocal()
                pr, pi = cmul(pr, pi, dr, -di)
                pr, pi = pr * inv, pi * inv
            out.extend([pr, pi])
        return out

    def to_record(self):
        return {
            "coefficients": [[[c.real, c.imag] for c in row] for row in self.coeffs],
            "poles": [[q.real, q.imag] for q in self.poles],
            "mu": self.mu,
        }


def reparametrize(disc: AnalyticDisc, b: complex) -> AnalyticDisc:
    """``Phi o m`` with ``m(zeta) = (zeta + b) / (1 + conj(b) zeta)``, for degree-1 discs.

    ``m`` maps the closed disc onto itself, so the image set is unchanged;
    with ``b = conj(q)`` the coordinates with pole ``q`` become polynomial.
    Only the image matters here (``mu`` and the base point are not kept)."""
    if disc.degree != 1:
        raise ValueError("reparametrization implemented for degree-1 discs")
    if abs(b) >= 1:
        raise ValueError("need |b| < 1")
    a0, a1 = disc.coeffs
    num0 = a0 + a1 * b
    num1 = a0 * np.conj(b) + a1
    q = disc.poles
    scale = 1.0 - q * b
    new_q = -(np.conj(b) - q) / scale
    zero = (np.abs(num0) == 0) & (np.abs(num1) == 0)
    new_q = np.where(zero, 0.0, new_q)
    coeffs = np.stack([num0 / scale, num1 / scale])
    return AnalyticDisc(coeffs, disc.mu, disc.direction, new_q)


def _conditioned(disc: AnalyticDisc) -> AnalyticDisc:
    """Same image, with the worst pole moved to infinity when that helps."""
    if disc.degree != 1:
        return disc
    active = (np.abs(disc.coeffs[0]) > 0) | (np.abs(disc.coeffs[1]) > 0)
    q = np.where(active, disc.poles, 0)
    k = int(np.argmax(np.abs(q)))
    if abs(q[k]) < 0.5:
        return disc
    cand = reparametrize(disc, np.conj(q[k]))
    worst = float(np.max(np.abs(np.where(active, cand.poles, 0))))
    return cand if worst < abs(q[k]) else disc


def linear_disc(z, X, radius) -> AnalyticDisc:
    """``z + radius * zeta * X / |X|``."""
    z, X = cvec(z), cvec(X)
    u = X / np.linalg.norm(X)
    return AnalyticDisc(np.stack([z, radius * u]), radius / np.linalg.norm(X), X)


@dataclass
class Certificate:
    ok: bool
    margin: float
    cells: int = 0
    reason: str = ""
    method: str = "taylor"
    extra: dict = field(default_factory=dict)


def _cell_upper(domain: DomainSpec, disc: AnalyticDisc, r0, r1, t0, t1):
    re, im = polar_cells(r0, r1, t0, t1)
    xs = disc.taylor(re, im)
    up = np.full(r0.shape, -np.inf)
    for g in domain.pieces:
        up = np.maximum(up, g.taylor(xs).upper())
    return up


def certify_disc_containment(domain: DomainSpec, disc: AnalyticDisc, radii=64, angles=256,
                             max_depth=14, max_cells=2_000_000) -> Certificate:
    """Certify ``Phi(closed unit disc)`` lies in the domain.

    Every polar cell gets a Taylor-model upper bound of each defining piece
    composed with the disc; cells whose bound is not negative are split
    until they pass, until a cell centre is found outside the domain, or
    until the depth/cell budget runs out (then the answer is "no").  Degree-1
    discs with a pole near the circle are first reparametrized by a disc
    automorphism, which leaves the image unchanged."""
    if disc.dim != domain.dim:
        raise ValueError("dimension mismatch between disc and domain")
    disc = _conditioned(disc)
    rr = np.linspace(0.0, 1.0, radii + 1)
    tt = np.linspace(0.0, 2 * np.pi, angles + 1)
    R0, T0 = np.meshgrid(rr[:-1], tt[:-1], indexing="ij")
    R1, T1 = np.meshgrid(rr[1:], tt[1:], indexing="ij")
    r0, r1, t0, t1 = R0.ravel(), R1.ravel(), T0.ravel(), T1.ravel()
    margin = np.inf
    total = 0
    for depth in range(max_depth + 1):
        if r0.size == 0:
            return Certificate(True, float(margin), total)
        total += r0.size
        if total > max_cells:
            return Certificate(False, 0.0, total, "cell budget exhausted")
        with np.errstate(all="ignore"):
            up = _cell_upper(domain, disc, r0, r1, t0, t1)
        good = up < 0
        if np.any(good):
            margin = min(margin, float(np.min(-up[good])))
        bad = ~good
        if not np.any(bad):
            return Certificate(True, float(margin), total)
        r0, r1, t0, t1 = r0[bad], r1[bad], t0[bad], t1[bad]
        # a centre already outside means the disc is not contained
        zc = 0.5 * (r0 + r1) * np.exp(0.5j * (t0 + t1))
        if np.any(domain.values(disc(zc)) >= 0):
            return Certificate(False, 0.0, total, "sample outside the domain")
        rm, tm = 0.5 * (r0 + r1), 0.5 * (t0 + t1)
        r0, r1, t0, t1 = (np.concatenate([r0, r0, rm, rm]), np.concatenate([rm, rm, r1, r1]),
                          np.concatenate([t0, tm, t0, tm]), np.concatenate([tm, t1, tm, t1]))
    return Certificate(False, 0.0, total, "maximum subdivision depth reached")


def recheck_containment(domain: DomainSpec, disc: AnalyticDisc, radii=256, angles=1024) -> float:
    """Max of the defining pieces over a dense polar grid (closed disc)."""
    rr = np.linspace(0.0, 1.0, radii + 1)
    tt = np.linspace(0.0, 2 * np.pi, angles, endpoint=False)
    Z = (rr[:, None] * np.exp(1j * tt)[None, :]).ravel()
    return float(np.max(domain.values(disc(Z))))


def certify_by_distance(domain: DomainSpec, disc: AnalyticDisc, distance: float) -> Certificate:
    """A linear disc of radius below the boundary distance is contained; the
    dense re-sampling guards against a wrong distance (values within
    rounding of zero are not a contradiction)."""
    radius = float(np.linalg.norm(disc.coeffs[1])) if disc.degree >= 1 else 0.0
    if disc.degree > 1 or np.any(disc.poles != 0) or not radius < distance:
        return Certificate(False, 0.0, reason="not a linear disc inside the distance ball")
    worst = recheck_containment(domain, disc, 64, 256)
    slack = 64 * np.finfo(float).eps * max(1.0, domain.gradient_bound * domain.enclosing_radius)
    if worst > slack:
        return Certificate(False, 0.0, reason="distance certificate contradicted by sampling")
    return Certificate(True, float(distance - radius), method="distance",
                       extra={"distance": distance, "sampled_max": worst})


__all__ = [
    "AnalyticDisc",
    "Certificate",
    "certify_by_distance",
    "certify_disc_containment",
    "linear_disc",
    "recheck_containment",
    "reparametrize",
]
