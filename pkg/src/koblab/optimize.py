"""Direct numerical attack on the defining infimum of the Kobayashi metric.

The search space is the rational family

    Phi_j(zeta) = P_j(zeta) / (1 - q_j zeta),   |q_j| < 1,

with ``P_j(0) = z_j`` and ``Phi'(0) = mu X``.  One pole per coordinate makes
the Moebius extremals of discs, half-planes, balls and polydiscs members of
the family at degree 1.  ``mu`` is maximised by SLSQP against sampled
containment constraints; violators found on a dense grid are exchanged into
the sample set, then the disc is shrunk slightly and certified with Taylor
models.  The trivial linear disc of radius ``d(z)`` is always a candidate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .discs import (
    AnalyticDisc,
    certify_by_distance,
    certify_disc_containment,
    linear_disc,
    recheck_containment,
)
from .expr import SegmentDistance, is_smooth
from .geometry import DomainSpec, cvec, norm, signed_distance

POLE_MAX = 0.9995


@dataclass
class OptimizerConfig:
    circle: int = 96           # angles on the unit circle
    rings: tuple = (0.5, 0.85)
    ring_angles: int = 32
    dense: int = 1024          # exchange-check density on the circle
    tau: float = 2e-4          # constraint slack, relative to d(z)
    rounds: int = 4
    maxiter: int = 200
    shrink: float = 1e-3
    max_cells: int = 300_000


class _Family:
    """Packing of (mu, poles, higher coefficients) into a real vector."""

    def __init__(self, z, X, degree, d0):
        self.z, self.X = cvec(z), cvec(X)
        self.n = self.z.size
        self.D = max(int(degree), 1)
        self.d0 = d0
        self.mu0 = d0 / norm(self.X)

    @property
    def size(self):
        return 1 + 2 * self.n + 2 * self.n * (self.D - 1)

    def unpack(self, x):
        n = self.n
        mu = x[0] * self.mu0
        q = x[1:1 + n] + 1j * x[1 + n:1 + 2 * n]
        high = x[1 + 2 * n:]
        coeffs = np.zeros((self.D + 1, n), dtype=complex)
        coeffs[0] = self.z
        coeffs[1] = mu * self.X - q * self.z
        if self.D > 1:
            h = high.reshape(self.D - 1, 2, n)
            coeffs[2:] = self.d0 * (h[:, 0] + 1j * h[:, 1])
        return coeffs, q, mu

    def disc(self, x):
        coeffs, q, mu = self.unpack(x)
        return AnalyticDisc(coeffs, float(mu), self.X, q)

    def start(self):
        x = np.zeros(self.size)
        x[0] = 0.98
        return x

    def evaluate(self, xs, zeta):
        """Phi at ``zeta`` for a batch of parameter vectors: (B, K, n)."""
        xs = np.atleast_2d(xs)
        out = np.empty((xs.shape[0], zeta.size, self.n), dtype=complex)
        for b, x in enumerate(xs):
            coeffs, q, _ = self.unpack(x)
            P = np.zeros((zeta.size, self.n), dtype=complex)
            for a in coeffs[::-1]:
                P = P * zeta[:, None] + a
            out[b] = P / (1.0 - q[None, :] * zeta[:, None])
        return out


def _piece_scales(domain, pts):
    """Gradient norms per piece at the sample points, so constraints read
    approximately as signed distances."""
    scales = []
    for g in domain.pieces:
        if not is_smooth(g.root):
            # non-smooth pieces are given as (minus) distances already
            scales.append(np.ones(len(pts)))
            continue
        gr = g.jet(pts).g
        s = np.linalg.norm(gr, axis=1)
        scales.append(np.maximum(s, 1e-3 * max(float(np.median(s)), 1e-12)))
    return np.stack(scales)


def _normalized_values(domain, pts, scales):
    vals = np.stack([np.atleast_1d(g(pts)) for g in domain.pieces])
    return np.max(vals / scales, axis=0)


def _sample_points(fam, x, cfg):
    t = np.linspace(0, 2 * np.pi, cfg.circle, endpoint=False)
    pts = [np.exp(1j * t)]
    for r in cfg.rings:
        s = np.linspace(0, 2 * np.pi, cfg.ring_angles, endpoint=False)
        pts.append(r * np.exp(1j * s))
    # angles clustered at poles close to the circle
    _, q, _ = fam.unpack(x)
    for qj in q:
        if abs(qj) > 0.5:
            w = max(1 - abs(qj), 1e-4)
            off = w * np.array([-8, -4, -2, -1, -0.5, 0, 0.5, 1, 2, 4, 8])
            pts.append(np.exp(1j * (np.angle(qj) + off)))
    return np.concatenate(pts)


def _dense_points(cfg, x, fam):
    t = np.linspace(0, 2 * np.pi, cfg.dense, endpoint=False)
    pts = [np.exp(1j * t)]
    for r in (0.25, 0.5, 0.75, 0.9):
        pts.append(r * np.exp(1j * t[::4]))
    _, q, _ = fam.unpack(x)
    for qj in q:
        if abs(qj) > 0.5:
            w = max(1 - abs(qj), 1e-5)
            pts.append(np.exp(1j * (np.angle(qj) + w * np.linspace(-20, 20, 161))))
    return np.concatenate(pts)


def _solve(domain, fam, x0, zeta, tau, cfg):
    pts0 = fam.evaluate(x0, zeta)[0]
    scales = _piece_scales(domain, pts0)
    n = fam.n
    h = 1e-7

    def cons(x):
        pts = fam.evaluate(x, zeta)[0]
        return -tau - _normalized_values(domain, pts, scales)

    def cons_jac(x):
        X = np.repeat(x[None, :], x.size + 1, axis=0)
        X[1:] += h * np.eye(x.size)
        pts = fam.evaluate(X, zeta).reshape(-1, n)
        v = _normalized_values(domain, pts, np.tile(scales, (1, x.size + 1)))
        v = v.reshape(x.size + 1, zeta.size)
        return -(v[1:] - v[0]).T / h

    def poles(x):
        q = x[1:1 + n] ** 2 + x[1 + n:1 + 2 * n] ** 2
        return POLE_MAX ** 2 - q

    def poles_jac(x):
        J = np.zeros((n, x.size))
        J[np.arange(n), 1 + np.arange(n)] = -2 * x[1:1 + n]
        J[np.arange(n), 1 + n + np.arange(n)] = -2 * x[1 + n:1 + 2 * n]
        return J

    obj_grad = np.zeros(x0.size)
    obj_grad[0] = -1.0
    res = minimize(lambda x: -x[0], x0, jac=lambda x: obj_grad, method="SLSQP",
                   constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac},
                                {"type": "ineq", "fun": poles, "jac": poles_jac}],
                   options={"maxiter": cfg.maxiter, "ftol": 1e-10})
    x = res.x.copy()
    # pull poles back onto the admissible disc (SLSQP may overshoot slightly)
    q = x[1:1 + n] + 1j * x[1 + n:1 + 2 * n]
    q = np.where(np.abs(q) > POLE_MAX, q * POLE_MAX / np.maximum(np.abs(q), 1e-300), q)
    x[1:1 + n], x[1 + n:1 + 2 * n] = q.real, q.imag
    if not np.all(np.isfinite(x)) or x[0] <= 0 or np.min(cons(x)) < -0.5 * tau:
        return x0
    return x


def _optimize_family(domain, fam, x, cfg):
    """SLSQP on sampled constraints with an exchange loop against a dense grid."""
    tau = cfg.tau * fam.d0
    zeta = _sample_points(fam, x, cfg)
    for _ in range(cfg.rounds):
        x = _solve(domain, fam, x, zeta, tau, cfg)
        dense = _dense_points(cfg, x, fam)
        pts = fam.evaluate(x, dense)[0]
        vals = _normalized_values(domain, pts, _piece_scales(domain, pts))
        bad = dense[vals > -0.5 * tau]
        if bad.size == 0:
            break
        zeta = np.concatenate([zeta, bad[:64], _sample_points(fam, x, cfg)])
    return x


def _crosses_segments(domain, disc, angles=2048):
    """True if an image circle of the disc crosses a deleted segment; thin
    complements are invisible to sampled distance constraints."""
    segs = [g.root for g in domain.pieces if isinstance(g.root, SegmentDistance)]
    if not segs:
        return False
    t = np.linspace(0, 2 * np.pi, angles + 1)
    for r in (1.0, 0.9, 0.75, 0.5, 0.25):
        w = disc(r * np.exp(1j * t))
        for sg in segs:
            p, q = w[:-1, sg.j - 1], w[1:, sg.j - 1]
            a, b = sg.a, sg.b

            def orient(u, v, x):
                return np.sign(((v - u) * np.conj(x - u)).imag)

            hit = (orient(p, q, a) != orient(p, q, b)) & (orient(a, b, p) != orient(a, b, q))
            if np.any(hit):
                return True
    return False


def _certify_shrunk(domain, disc, cfg):
    gap = cfg.shrink
    for _ in range(7):
        cand = disc.scaled(1.0 - gap)
        gap *= 2
        if _crosses_segments(domain, cand) or recheck_containment(domain, cand, 32, 128) >= 0:
            continue
        cert = certify_disc_containment(domain, cand, max_cells=cfg.max_cells)
        if cert.ok:
            return cand, cert
    return None, None


def disc_upper_bound_optimize(domain: DomainSpec, z, X, degree: int = 3, effort: int = 1, seed: int = 0,
                              config: OptimizerConfig = None):
    """Certified upper bound ``1 / mu`` from the best disc found.

    Returns ``(upper, disc, info)``; never worse than the linear disc of
    radius ``d(z)``.  ``effort`` scales the number of restarts; ``seed``
    drives their perturbations."""
    cfg = config or OptimizerConfig()
    z, X = cvec(z), cvec(X)
    if not domain.contains(z):
        raise ValueError("point not interior")
    if norm(X) == 0:
        raise ValueError("direction must be nonzero")
    d = -signed_distance(domain, z)
    if d <= 0:
        raise ValueError("point not interior")
    trivial = linear_disc(z, X, d * (1 - 1e-12))
    tcert = certify_by_distance(domain, trivial, d)
    best = (trivial.upper, trivial, {"margin": tcert.margin, "method": "trivial", "certified": tcert.ok})
    if not tcert.ok:
        best = (np.inf, None, {"margin": None, "method": "none", "certified": False})

    fam = _Family(z, X, degree, d)
    # continuation: the degree-1 (Moebius-type) optimum warm-starts the full family
    lin = _Family(z, X, 1, d)
    rng = np.random.default_rng(seed)
    starts = [lin.start()]
    for _ in range(max(int(effort), 1) - 1):
        x = lin.start()
        x[1:] = rng.uniform(-0.3, 0.3, size=2 * lin.n)
        x[0] = 0.5
        starts.append(x)
    for x in starts:
        x = _optimize_family(domain, lin, x, cfg)
        cands = [lin.disc(x)]
        if fam.D > 1:
            full = np.zeros(fam.size)
            full[:lin.size] = x
            xf = _optimize_family(domain, fam, full, cfg)
            if fam.disc(xf).mu > cands[0].mu * (1 + 1e-6):
                cands.insert(0, fam.disc(xf))
        for disc in cands:
            if disc.upper >= best[0]:
                continue
            cand, cert = _certify_shrunk(domain, disc, cfg)
            if cand is not None and cand.upper < best[0]:
                best = (cand.upper, cand, {"margin": cert.margin, "method": "optimized", "certified": True,
                                           "cells": cert.cells, "degree": disc.degree})
                break
    if best[1] is None:
        raise RuntimeError("no certified disc: distance certificate failed")
    return best
