"""Certified lower and upper bounds for the Kobayashi metric.

Lower bounds come from holomorphic comparison: a competitor disc through
``z`` is pushed into a slit or ray complement in one variable whose metric
is known exactly.  Upper bounds come from explicit analytic discs whose
containment is certified by :mod:`koblab.discs`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .discs import AnalyticDisc, Certificate, certify_disc_containment, recheck_containment
from .expr import SingularLocusError, complex_hessian_from_real, deinterleave
from .geometry import (
    DomainSpec,
    ProjectionError,
    boundary_projection,
    cvec,
    levi_form,
    norm,
    normal_frame,
)
from .metrics import localization_factor, wedge_complement_metric

C_GRID = 2.0 ** -np.arange(1, 21)
B_GRID = 2.0 ** -np.arange(-3, 21)


class CertificateUnavailable(RuntimeError):
    """The explicit sufficient conditions fail at this query (e.g. delta too large)."""


class LeviValidationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# envelopes


@dataclass
class EnvelopeParams:
    """Local model ``{Re u_n < A |u_hat|^m + A_mixed |u_n||u|}`` for a boundary patch.

    ``A_mixed`` defaults to ``A``; domains whose extra terms are all
    nonnegative on the outside (such as the weighted examples) admit 0.

    Local coordinates: ``w = U^* (z - p0)`` (outward normal along +Re w_n),
    then for the cubic route ``u_n = w_n + (1/gamma) sum P_jk w_j w_k`` with
    ``P`` the pure second derivatives of r at p0 in w-coordinates.  The
    patch is ``B(p0, R)``; its image lies in ``B(0, R_image)``."""

    m: float
    R: float
    A: float
    U: np.ndarray
    p0: np.ndarray
    gamma: float = 1.0
    P: Optional[np.ndarray] = None
    R_image: Optional[float] = None
    A_mixed: Optional[float] = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.U = np.asarray(self.U, dtype=complex)
        self.p0 = cvec(self.p0)
        if self.R_image is None:
            self.R_image = self.R
        if self.A_mixed is None:
            self.A_mixed = self.A
        if self.m < 2 or self.R <= 0 or self.A <= 0:
            raise ValueError("need m >= 2, R > 0, A > 0")

    @property
    def dim(self):
        return self.p0.size

    def to_local(self, z, X=None):
        w = self.U.conj().T @ (cvec(z) - self.p0)
        Y = None if X is None else self.U.conj().T @ cvec(X)
        if self.P is None:
            return w, Y
        u = w.copy()
        u[-1] = w[-1] + (w @ self.P @ w) / self.gamma
        if Y is not None:
            Y = Y.copy()
            Y[-1] = Y[-1] + 2.0 * (w @ self.P @ Y) / self.gamma
        return u, Y

    def to_record(self):
        return {"m": self.m, "R": self.R, "A": self.A, "R_image": self.R_image,
                "gamma": self.gamma, "p0": [[c.real, c.imag] for c in self.p0]}


def model_envelope(m, A, R, n=2, A_mixed=None) -> EnvelopeParams:
    """Envelope for a domain already in normal form at the origin."""
    return EnvelopeParams(m=m, R=R, A=A, U=np.eye(n, dtype=complex), p0=np.zeros(n, dtype=complex),
                          A_mixed=A_mixed)


def _ball_samples(n, R, count, rng):
    v = rng.normal(size=(count, 2 * n))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    v *= R * rng.uniform(size=(count, 1)) ** (1.0 / (2 * n))
    return deinterleave(v)


def _boundary_samples(domain, p0, U, R, count, rng):
    """Points of {r = 0} in B(p0, R), found along lines parallel to Re w_n."""
    n = domain.dim
    what = _ball_samples(n - 1, R, count, rng) if n > 1 else np.zeros((count, 0), dtype=complex)
    s = rng.uniform(-R, R, size=count)
    ts = np.linspace(-R, R, 129)
    W = np.zeros((count, ts.size, n), dtype=complex)
    W[:, :, :-1] = what[:, None, :]
    W[:, :, -1] = ts[None, :] + 1j * s[:, None]
    Z = p0[None, None, :] + W @ U.T
    vals = domain.field(Z.reshape(-1, n)).reshape(count, ts.size)
    change = (vals[:, :-1] < 0) & (vals[:, 1:] >= 0)
    has = change.any(axis=1)
    # sign change closest to t = 0 on each line
    dist = np.where(change, np.abs(ts[:-1])[None, :], np.inf)
    j = np.argmin(dist, axis=1)[has]
    base = W[has, 0].copy()
    lo, hi, im = ts[j], ts[j + 1], s[has]
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        base[:, -1] = mid + 1j * im
        neg = domain.field(p0[None, :] + base @ U.T) < 0
        lo, hi = np.where(neg, mid, lo), np.where(neg, hi, mid)
    base[:, -1] = lo + 1j * im
    return base[np.linalg.norm(base, axis=1) < R]


def _envelope_ratio(u, m):
    uh = np.linalg.norm(u[:, :-1], axis=1)
    un = np.abs(u[:, -1])
    den = uh ** m + un * np.linalg.norm(u, axis=1)
    num = u[:, -1].real
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(num > 0, num / den, -np.inf)
    return ratio


def envelope_fit(domain: DomainSpec, p0, m: float = 2, R: Optional[float] = None,
                 samples: int = 4000, seed: int = 0) -> EnvelopeParams:
    """Fit ``(R, A)`` so the rotated patch lies in the envelope.

    m = 2: ``A = H / (2 gamma)`` with ``H`` a (sampled, inflated) bound for
    the real Hessian of r on the patch, which gives the envelope by Taylor's
    theorem.  m = 3: after the holomorphic normalisation of the pure second
    order terms, ``A`` is the inflated sup of the envelope ratio on interior
    and boundary samples.  Both are checked on a validation sample."""
    p0 = cvec(p0)
    if m not in (2, 3):
        raise ValueError("envelope_fit supports m = 2 and m = 3")
    jet = domain.field.jet(p0)
    if jet.sing[0]:
        raise SingularLocusError("defining function not differentiable at the base point")
    if abs(jet.v[0]) > 1e-8:
        raise ValueError("base point is not on the boundary")
    g = jet.g[0]
    gamma = float(np.linalg.norm(g))
    if gamma < 1e-12:
        raise ValueError("vanishing gradient at the base point")
    U = normal_frame(deinterleave(g) / gamma)
    n = domain.dim
    rng = np.random.default_rng(seed)
    radii = [R] if R is not None else [0.5 * domain.enclosing_radius * 2.0 ** -k for k in range(11)]
    last_error = None
    for Rk in radii:
        W = np.concatenate([_ball_samples(n, Rk, samples, rng),
                            _boundary_samples(domain, p0, U, Rk, samples // 8, rng)])
        Zs = p0[None, :] + W @ U.T
        jj = domain.field.jet(Zs)
        if np.any(jj.sing):
            last_error = "defining function singular on the patch"
            continue
        inside = domain.values(Zs) < 0
        # boundary samples sit on {r = 0}; nudge them inside for the checks
        Wd = W[inside | (np.abs(jj.v) < 1e-12)]
        P = None
        R_img = Rk
        if m == 2:
            H = 1.25 * float(np.max(np.linalg.norm(jj.H, ord=2, axis=(1, 2))))
            A = max(H / (2.0 * gamma), 1e-6)
            u = Wd
        else:
            levi = levi_form(domain.field, p0)
            ev = levi.restricted_eigenvalues
            if ev is not None and ev.size and ev.min() < -1e-8:
                raise LeviValidationError(f"restricted Levi form has eigenvalue {ev.min():.3g} < 0")
            _, Pz = complex_hessian_from_real(jet.H[0])
            P = U.T @ Pz @ U
            Q = float(np.linalg.norm(P, 2)) / gamma
            R_img = Rk + Q * Rk * Rk
            u = Wd.copy()
            u[:, -1] = Wd[:, -1] + np.einsum("ij,jk,ik->i", Wd, P, Wd) / gamma
            A = 0.0
        ratio = _envelope_ratio(u, m)
        sampled = float(np.max(ratio)) if ratio.size else -np.inf
        A = max(A, 1.25 * sampled, 1e-3 if m == 3 else 1e-6)
        # validation on a fresh sample
        Wv = np.concatenate([_ball_samples(n, Rk, samples // 2, rng),
                             _boundary_samples(domain, p0, U, Rk, samples // 16, rng)])
        Zv = p0[None, :] + Wv @ U.T
        keep = domain.values(Zv) < 1e-14
        uv = Wv[keep].copy()
        if P is not None:
            uv[:, -1] = uv[:, -1] + np.einsum("ij,jk,ik->i", uv, P, uv) / gamma
        rv = _envelope_ratio(uv, m)
        if rv.size and np.max(rv) > A:
            last_error = f"validation sample violates envelope (ratio {np.max(rv):.3g} > A {A:.3g})"
            continue
        return EnvelopeParams(m=m, R=Rk, A=A, U=U, p0=p0, gamma=gamma, P=P, R_image=R_img,
                              info={"sampled_ratio": sampled, "samples": int(len(Wd))})
    raise CertificateUnavailable(f"no admissible envelope found: {last_error}")


# ---------------------------------------------------------------------------
# lower bounds in the envelope


def _prepare(env: EnvelopeParams, z, X, k):
    u, Y = env.to_local(z, X)
    if not 0 < k < 1:
        raise ValueError("cone aperture k must lie in (0, 1)")
    if not -u[-1].real > k * norm(u):
        raise ValueError("query point outside the approach cone")
    return u, Y


def _slice_value(env, u, Yn_abs, rho, M_hat, M=None):
    """``rho |Y_n| F(u_n)`` for the one-variable domain left by the envelope.

    On the slice ``Re w < A M_hat^m + kappa |w|`` with ``kappa = A_mixed M``;
    the excluded set contains the sector of half-angle ``arccos(kappa)`` at
    ``A M_hat^m / (1 - kappa)``, whose complement has an exact metric."""
    M = M_hat if M is None else M
    M_hat = min(M_hat, env.R_image)
    M = min(M, env.R_image)
    kappa = env.A_mixed * M
    if kappa >= 1:
        return 0.0
    vertex = env.A * M_hat ** env.m / (1.0 - kappa)
    return rho * Yn_abs * wedge_complement_metric(u[-1], 1.0, vertex, kappa)


def _maximize_over_c(fun, exponent, delta):
    """Best value over the candidate grid, then refine continuously in log c
    (any c with rho = c delta^exponent <= 1 is admissible)."""
    vals = np.array([fun(c) for c in C_GRID])
    i = int(np.argmax(vals))
    best_c, best = float(C_GRID[i]), float(vals[i])
    if best <= 0:
        return 0.0, None
    c_max = delta ** (-exponent)
    lo = np.log(C_GRID[min(i + 1, C_GRID.size - 1)])
    hi = np.log(min(C_GRID[i - 1] if i > 0 else 2 * C_GRID[0], c_max))
    if hi > lo:
        res = minimize_scalar(lambda s: -fun(np.exp(s)), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-6})
        if -res.fun > best:
            best, best_c = float(-res.fun), float(np.exp(res.x))
    return best, best_c


def normal_slice_lower_bound(env: EnvelopeParams, z, X, k: float = 0.9, detail=False):
    """Lower bound ``~ |X_n| / d^(1 - 1/m)`` from the disc slice of radius
    ``rho = c delta^(1/m)``."""
    u, Y = _prepare(env, z, X, k)
    if Y[-1] == 0:
        return (0.0, None) if detail else 0.0
    delta = -u[-1].real
    Rp = env.R_image + norm(u)
    Yn = abs(Y[-1])

    def fun(c):
        rho = c * delta ** (1.0 / env.m)
        if rho > 1:
            return 0.0
        return _slice_value(env, u, Yn, rho, norm(u[:-1]) + Rp * rho, norm(u) + Rp * rho)

    best, c = _maximize_over_c(fun, 1.0 / env.m, delta)
    if best <= 0:
        raise CertificateUnavailable("no admissible rescaling constant (delta too large)")
    return (best, c) if detail else best


def tangential_weighted_lower_bound(env: EnvelopeParams, z, X, K: float, k: float = 0.9,
                                    detail=False):
    """Lower bound ``~ |X_n| / d^(1 - 1/(2m))`` for directions with ``|X| <= K |X_n|``.

    For a competitor disc with ``Phi'(0) = lambda Y`` the slice of radius
    ``rho = c delta^(1/(2m))`` avoids a ray whose base grows with lambda;
    the resulting implicit inequality ``lambda <= G(lambda)`` has ``G``
    increasing, so iterating ``G`` downward from a valid cap stays an upper
    bound for lambda at every step."""
    u, Y = _prepare(env, z, X, k)
    Yn = abs(Y[-1])
    Ynorm = norm(Y)
    if Yn == 0:
        raise ValueError("direction has no normal component")
    if Ynorm > K * Yn * (1 + 1e-12):
        raise ValueError("direction outside the K-cone |X| <= K|X_n|")
    delta = -u[-1].real
    un = norm(u)
    Rp = env.R_image + un
    try:
        ns = normal_slice_lower_bound(env, z, X, k)
    except CertificateUnavailable:
        ns = 0.0
    cap0 = Rp / Ynorm
    if ns > 0:
        cap0 = min(cap0, 1.0 / ns)

    Yhat = norm(Y[:-1])

    def G(lam, rho):
        # Dieudonne-type bound applied separately to Phi_hat and to Phi
        a = min(lam * Ynorm / Rp, 1.0)
        ah = min(lam * Yhat / Rp, 1.0)
        M = un + Rp * rho * (rho + a) / (1.0 + a * rho)
        M_hat = norm(u[:-1]) + Rp * rho * (rho + ah) / (1.0 + ah * rho)
        v = _slice_value(env, u, Yn, rho, M_hat, M)
        return np.inf if v <= 0 else 1.0 / v

    def chain(c, lam):
        rho = c * delta ** (1.0 / (2 * env.m))
        if rho > 1:
            return lam
        for _ in range(100):
            new = min(lam, G(lam, rho))
            if lam - new <= 1e-10 * lam:
                return new
            lam = new
        return lam

    # every chain result is itself a valid cap for lambda, so the cap is
    # shared across c: small c escape the spurious large fixed point first
    lam_star = cap0
    best_c = None
    for _ in range(10):
        before = lam_star
        for c in C_GRID[::-1]:
            lam = chain(c, lam_star)
            if lam < lam_star:
                lam_star, best_c = lam, float(c)
        if lam_star >= before * (1 - 1e-10):
            break
    if best_c is not None:
        c_max = delta ** (-1.0 / (2 * env.m))
        lo, hi = np.log(best_c / 2), np.log(min(2 * best_c, c_max))
        if hi > lo:
            res = minimize_scalar(lambda s: chain(np.exp(s), lam_star), bounds=(lo, hi),
                                  method="bounded", options={"xatol": 1e-6})
            if res.fun < lam_star:
                lam_star, best_c = float(res.fun), float(np.exp(res.x))
    if not np.isfinite(lam_star) or best_c is None and ns <= 0:
        raise CertificateUnavailable("no admissible rescaling constant (delta too large)")
    best = 1.0 / lam_star
    return (best, best_c) if detail else best


# ---------------------------------------------------------------------------
# localized pipelines


@dataclass
class LowerCertificate:
    value: float
    kind: str
    params: dict = field(default_factory=dict)


def _localized_lower(domain, z, X, m, k, seed, radii=None):
    z, X = cvec(z), cvec(X)
    p0, _ = boundary_projection(domain, z)
    scales = radii if radii is not None else [0.5 * domain.enclosing_radius * 2.0 ** -j for j in range(6)]
    best = None
    errors = []
    for Rk in scales:
        try:
            env = envelope_fit(domain, p0, m, R=Rk, seed=seed)
            local, c = normal_slice_lower_bound(env, z, X, k, detail=True)
        except (CertificateUnavailable, ValueError) as exc:
            if isinstance(exc, LeviValidationError):
                raise
            errors.append(str(exc))
            continue
        if local == 0:
            return LowerCertificate(0.0, "Localized", {"reason": "no normal component"})
        if norm(z - p0) >= Rk:
            continue
        factor = localization_factor(domain, z, p0, Rk, seed)
        val = local / factor
        if best is None or val > best.value:
            best = LowerCertificate(val, "Localized", {"factor": factor, "local": local, "c": c,
                                                       "envelope": env.to_record()})
    if best is None:
        raise CertificateUnavailable("; ".join(errors) or "no usable patch radius")
    return best


def normal_estimate_c11(domain: DomainSpec, z, X, k: float = 0.9, seed: int = 0, detail=False):
    """Lower bound of the shape ``|<d r(z), X>| / |r(z)|^(1/2)``: projection,
    quadratic envelope, normal slice, localization."""
    cert = _localized_lower(domain, z, X, 2, k, seed)
    return cert if detail else cert.value


def pseudoconvex_lower_bound(domain: DomainSpec, z, X, k: float = 0.9, seed: int = 0, detail=False):
    """Lower bound of the shape ``|<d r(z), X>| / |r(z)|^(2/3)`` for pseudoconvex
    domains with C^3 boundary, via the cubic envelope."""
    if not domain.pseudoconvex_known:
        raise LeviValidationError("domain not declared pseudoconvex")
    if domain.regularity not in ("C3", "real-analytic"):
        raise LeviValidationError("pseudoconvex estimate needs C3 regularity")
    cert = _localized_lower(domain, z, X, 3, k, seed)
    return cert if detail else cert.value


# ---------------------------------------------------------------------------
# explicit disc families


def _largest_certified(build, domain, c_grid=C_GRID, refine_steps=8, quick=(32, 128)):
    """Largest c on the grid (then bisected) whose disc is certified."""
    passing = None
    failing = None
    for c in c_grid:
        disc = build(c)
        if recheck_containment(domain, disc, *quick) >= 0:
            failing = c
            continue
        cert = certify_disc_containment(domain, disc)
        if cert.ok:
            passing = (c, disc, cert)
            break
        failing = c
    if passing is None:
        return None
    if failing is not None and failing > passing[0]:
        lo, hi = np.log(passing[0]), np.log(failing)
        for _ in range(refine_steps):
            mid = 0.5 * (lo + hi)
            disc = build(np.exp(mid))
            if recheck_containment(domain, disc, *quick) >= 0:
                hi = mid
                continue
            cert = certify_disc_containment(domain, disc)
            if cert.ok:
                lo = mid
                passing = (float(np.exp(mid)), disc, cert)
            else:
                hi = mid
    return passing


def _phase_align(coeffs, theta):
    return coeffs * np.exp(1j * theta * np.arange(coeffs.shape[0]))[:, None]


def disc_upper_bound_weighted_model(domain: DomainSpec, z, X, m: float, k: float = 0.9, K: Optional[float] = None):
    """Upper bound ``|X_n| / (c delta^(1 - 1/(2m)))`` from the discs
    ``Phi_1 = z_1 + e X_1 zeta + zeta^2 / b``, ``Phi_j = z_j + e X_j zeta``
    (``X`` normalised to ``X_n = 1``, ``e = c delta^(1 - 1/(2m))``)."""
    z, X = cvec(z), cvec(X)
    if not -z[-1].real > k * norm(z):
        raise ValueError("query point outside the approach cone")
    if X[-1] == 0:
        raise ValueError("direction has no normal component")
    if K is not None and norm(X) > K * abs(X[-1]) * (1 + 1e-12):
        raise ValueError("direction outside the K-cone")
    delta = -z[-1].real
    Xn = X[-1]
    Xh = X / Xn
    theta = -np.angle(Xn)
    scale = delta ** (1.0 - 1.0 / (2 * m))
    best = None
    for b in B_GRID:
        # the quadratic term alone reaches |Phi_1| = 1/b; keep it inside the enclosing ball
        if 1.0 / b >= domain.enclosing_radius:
            continue

        def build(c, b=b):
            e = c * scale
            coeffs = np.zeros((3, z.size), dtype=complex)
            coeffs[0] = z
            coeffs[1] = e * Xh
            coeffs[2, 0] = 1.0 / b
            # rotate zeta so that Phi'(0) is a positive multiple of X
            return AnalyticDisc(_phase_align(coeffs, theta), e / abs(Xn), X)

        found = _largest_certified(build, domain)
        if found is None:
            continue
        c, disc, cert = found
        if best is None or disc.mu > best[1].mu:
            best = (c, disc, cert, b)
        elif best is not None:
            break  # smaller b only shrinks the admissible region further
    if best is None:
        raise CertificateUnavailable("no (b, c) pair passes containment at this delta")
    c, disc, cert, b = best
    return disc.upper, disc, {"b": float(b), "c": float(c), "margin": cert.margin}


@dataclass
class WitnessResult:
    upper: float
    disc: AnalyticDisc
    point: np.ndarray
    direction: np.ndarray
    eigenvalue: float
    pairing: float
    scale: float
    certificate: Certificate


def disc_upper_bound_nonpsc(domain: DomainSpec, p0, delta: float, kappa: Optional[float] = None,
                            tangent=None) -> WitnessResult:
    """Witness disc at ``p_delta = p0 - delta nu`` along a Levi-negative
    tangent direction ``v``: in local coordinates

        w_hat = s kappa zeta v,
        w_n   = -delta + s delta^(1/2) zeta / 2 - (1/gamma) sum_{j,k<n} P_jk w_j w_k,

    so ``Phi'(0) = s delta^(1/2) X_delta`` with ``X_delta = (kappa delta^(-1/2) v, 1/2)``
    and ``F(p_delta, X_delta) <= 1 / (s delta^(1/2))``."""
    p0 = cvec(p0)
    levi = levi_form(domain.field, p0)
    ev = levi.restricted_eigenvalues
    if ev is None or ev.size == 0:
        raise ValueError("base point must be a boundary point with n >= 2")
    lam = float(ev[0])
    if lam >= 0:
        raise ValueError("restricted Levi form has no negative eigenvalue at the base point")
    jet = domain.field.jet(p0)
    g = jet.g[0]
    gamma = float(np.linalg.norm(g))
    U = normal_frame(deinterleave(g) / gamma)
    v = levi.restricted_vectors[:, 0] if tangent is None else cvec(tangent)
    v = v / norm(v)
    vw = U.conj().T @ v
    if abs(vw[-1]) > 1e-8:
        raise ValueError("direction is not complex tangential")
    vw[-1] = 0
    a = -lam / (2.0 * gamma)
    if kappa is None:
        kappa = 1.0 / np.sqrt(a)
    _, Pz = complex_hessian_from_real(jet.H[0])
    P = U.T @ Pz @ U
    quad = complex(vw[:-1] @ P[:-1, :-1] @ vw[:-1]) / gamma
    n = p0.size
    X_local = np.zeros(n, dtype=complex)
    X_local[:-1] = kappa * delta ** -0.5 * vw[:-1]
    X_local[-1] = 0.5
    X_delta = U @ X_local
    p_delta = p0 - delta * U[:, -1]

    def build(s):
        W = np.zeros((3, n), dtype=complex)
        W[0, -1] = -delta
        W[1, :-1] = s * kappa * vw[:-1]
        W[1, -1] = 0.5 * s * np.sqrt(delta)
        W[2, -1] = -(s * kappa) ** 2 * quad
        coeffs = W @ U.T
        coeffs[0] += p0
        return AnalyticDisc(coeffs, s * np.sqrt(delta), X_delta)

    grid = 2.0 ** -np.arange(-4, 21, 0.5)
    found = _largest_certified(build, domain, c_grid=grid)
    if found is None:
        raise CertificateUnavailable("witness disc containment fails at this delta")
    s, disc, cert = found
    jd = domain.field.jet(p_delta)
    drz = 0.5 * (jd.g[0][0::2] - 1j * jd.g[0][1::2])
    pairing = abs(complex(drz @ X_delta))
    return WitnessResult(disc.upper, disc, p_delta, X_delta, lam, pairing, float(s), cert)


# ---------------------------------------------------------------------------
# combined query


SCHEMA_VERSION = 1


@dataclass
class BoundResult:
    domain: str
    z: np.ndarray
    X: np.ndarray
    lower: Optional[float] = None
    lower_certificate: Optional[LowerCertificate] = None
    upper: Optional[float] = None
    witness: Optional[AnalyticDisc] = None
    upper_margin: Optional[float] = None
    notes: list = field(default_factory=list)

    @property
    def status(self):
        if self.lower is not None and self.upper is not None and self.lower > 0:
            return "certified"
        if self.lower is not None or self.upper is not None:
            return "partial"
        return "error"

    def to_record(self):
        cert = self.lower_certificate
        return {
            "schema_version": SCHEMA_VERSION,
            "query": {"domain": self.domain, "z": [[c.real, c.imag] for c in self.z],
                      "X": [[c.real, c.imag] for c in self.X]},
            "lower": self.lower,
            "lower_certificate": None if cert is None else {"kind": cert.kind, **_jsonable(cert.params)},
            "upper": self.upper,
            "witness_coefficients": None if self.witness is None else self.witness.to_record(),
            "margins": {"upper_containment": self.upper_margin},
            "notes": list(self.notes),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def contraction_lower(domain: DomainSpec, z, X) -> LowerCertificate:
    """Inclusion into the enclosing ball (and the exact model where known)."""
    from .metrics import CanonicalDomain, kobayashi_canonical

    z, X = cvec(z), cvec(X)
    if domain.model is not None and domain.model[0] == "ball":
        v = kobayashi_canonical(CanonicalDomain.ball(domain.model[1]), z, X).value
        return LowerCertificate(v, "ContractionMap", {"target": "ball (exact)"})
    v = kobayashi_canonical(CanonicalDomain.ball(domain.enclosing_radius), z, X).value
    cert = LowerCertificate(v, "ContractionMap", {"target": "enclosing ball"})
    if domain.model is not None and domain.model[0] == "halfspace" and z[-1].real < 0:
        hv = abs(X[-1]) / (-2.0 * z[-1].real)
        if hv > v:
            cert = LowerCertificate(hv, "ContractionMap", {"target": "half-plane via -z_n"})
    return cert


def slit_lower(domain: DomainSpec, z, X) -> Optional[LowerCertificate]:
    """Slit comparison for one-variable domains whose complement contains a
    segment given by a segment-distance piece."""
    from .expr import SegmentDistance
    from .metrics import segment_distance, slit_complement_lower_bound

    if domain.dim != 1:
        return None
    node = domain.field.root
    if not isinstance(node, SegmentDistance):
        return None
    z0 = complex(cvec(z)[0])
    a, b = node.a, node.b
    near, far = (b, a) if abs(z0 - a) > abs(z0 - b) else (a, b)
    v = slit_complement_lower_bound(z0, complex(cvec(X)[0]), (near, far))
    return LowerCertificate(v, "SlitReduction", {"segment": [complex(near), complex(far)]})


def compute_bounds(domain: DomainSpec, z, X, *, k: float = 0.9, degree: int = 3, effort: int = 1,
                   seed: int = 0, optimize: bool = True) -> BoundResult:
    """Best certified lower bound available plus an optimized disc upper bound."""
    from .optimize import disc_upper_bound_optimize

    z, X = cvec(z), cvec(X)
    if not domain.contains(z):
        raise ValueError("point not interior")
    res = BoundResult(domain.name, z, X)
    cands = [contraction_lower(domain, z, X)]
    s = slit_lower(domain, z, X)
    if s is not None:
        cands.append(s)
    if domain.smooth and domain.dim >= 1:
        for fn in (normal_estimate_c11, pseudoconvex_lower_bound):
            if fn is pseudoconvex_lower_bound and not (domain.pseudoconvex_known and
                                                       domain.regularity in ("C3", "real-analytic")):
                continue
            try:
                cands.append(fn(domain, z, X, k=k, seed=seed, detail=True))
            except (CertificateUnavailable, ProjectionError, ValueError, SingularLocusError) as exc:
                res.notes.append(f"{fn.__name__}: {exc}")
    best = max(cands, key=lambda c: c.value)
    res.lower, res.lower_certificate = best.value, best
    if optimize:
        up, disc, info = disc_upper_bound_optimize(domain, z, X, degree=degree, effort=effort, seed=seed)
        res.upper, res.witness, res.upper_margin = up, disc, info.get("margin")
    return res



disc_upper_bound_prop24 = disc_upper_bound_weighted_model

__all__ = [
    "BoundResult",
    "CertificateUnavailable",
    "EnvelopeParams",
    "LeviValidationError",
    "LowerCertificate",
    "WitnessResult",
    "compute_bounds",
    "contraction_lower",
    "disc_upper_bound_nonpsc",
    "disc_upper_bound_prop24",
    "disc_upper_bound_weighted_model",
    "envelope_fit",
    "model_envelope",
    "normal_estimate_c11",
    "normal_slice_lower_bound",
    "pseudoconvex_lower_bound",
    "slit_lower",
    "tangential_weighted_lower_bound",
]
