"""Domains in C^n given by defining functions, and their boundary geometry.

Points and tangent vectors are plain complex numpy arrays of shape ``(n,)``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .expr import (
    ScalarField,
    SingularLocusError,
    complex_hessian_from_real,
    deinterleave,
    interleave,
    is_smooth,
    wirtinger_from_real,
)

SQRT2 = np.sqrt(2.0)


class ProjectionError(RuntimeError):
    def __init__(self, message, residual=np.inf):
        self.residual = residual
        super().__init__(f"{message} (best residual {residual:.3e})")


class DegenerateGradientError(ValueError):
    pass


def cvec(values) -> np.ndarray:
    """Coerce to a 1-d complex vector."""
    v = np.atleast_1d(np.asarray(values, dtype=complex))
    if v.ndim != 1 or v.size < 1:
        raise ValueError("expected a nonempty 1-d vector")
    return v


def hermitian(u, v) -> complex:
    """<u, v> = sum u_j conj(v_j)."""
    return complex(np.sum(np.asarray(u) * np.conj(v)))


def norm(v) -> float:
    return float(np.linalg.norm(np.asarray(v)))


# ---------------------------------------------------------------------------
# domain specification


@dataclass(frozen=True)
class DomainSpec:
    """``{field < 0}`` intersected with ``{g < 0}`` for every extra constraint.

    ``model`` tags special domains: ``("ball", R)`` and ``("halfspace", R)``
    (``Re z_n < 0`` clipped to ``B(0, R)``) have a closed-form signed
    distance; ``("omega", m, A)`` marks the weighted models whose envelope
    ``Re z_n < A|z_1|^m`` is known exactly.
    """

    field: ScalarField
    enclosing_radius: float
    gradient_bound: float
    regularity: str = "C2"
    witness_point: Optional[np.ndarray] = None
    constraints: tuple = ()
    pseudoconvex_known: bool = False
    tubular_radius: float = 0.1
    name: str = "domain"
    model: Optional[tuple] = None

    def __post_init__(self):
        if self.enclosing_radius <= 0 or self.gradient_bound <= 0:
            raise ValueError("enclosing_radius and gradient_bound must be positive")
        if self.regularity not in ("C2", "C3", "C-one-one", "real-analytic"):
            raise ValueError(f"unknown regularity tag {self.regularity!r}")
        for g in self.constraints:
            if g.dim != self.field.dim:
                raise ValueError("constraint dimension mismatch")
        if self.witness_point is not None:
            w = cvec(self.witness_point)
            if not self.contains(w):
                raise ValueError("witness point is not interior")

    @property
    def dim(self) -> int:
        return self.field.dim

    @property
    def pieces(self):
        return (self.field,) + tuple(self.constraints)

    def values(self, z) -> np.ndarray:
        """Max over pieces of the defining values, batched over rows of z."""
        z = np.asarray(z, dtype=complex)
        single = z.ndim == 1
        zz = z[None, :] if single else z
        v = np.max([np.atleast_1d(g(zz)) for g in self.pieces], axis=0)
        return float(v[0]) if single else v

    def contains(self, z) -> bool:
        z = cvec(z)
        if z.size != self.dim:
            raise ValueError("dimension mismatch")
        return bool(self.values(z) < 0 and norm(z) < self.enclosing_radius)

    @property
    def smooth(self) -> bool:
        return is_smooth(self.field.root)

    def with_name(self, name):
        return dataclasses.replace(self, name=name)


def estimate_gradient_bound(field: ScalarField, radius: float, samples=4000, seed=0) -> float:
    """Sampled sup of |grad r| over B(0, radius), inflated by 25%."""
    if not is_smooth(field.root):
        return 1.0
    rng = np.random.default_rng(seed)
    n = field.dim
    x = rng.normal(size=(samples, 2 * n))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    x *= radius * rng.uniform(size=(samples, 1)) ** (1.0 / (2 * n))
    j = field.jet(deinterleave(x))
    g = np.linalg.norm(j.g, axis=1)
    return float(1.25 * max(np.max(g), 1e-12))


def validate_domain(domain: DomainSpec, samples=2000, seed=0) -> dict:
    """Check the declared gradient bound on a validation sample of the ball."""
    rng = np.random.default_rng(seed)
    n = domain.dim
    x = rng.normal(size=(samples, 2 * n))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    x *= domain.enclosing_radius * rng.uniform(size=(samples, 1)) ** (1.0 / (2 * n))
    report = {"gradient_bound_ok": True, "sampled_gradient_sup": None}
    if domain.smooth:
        j = domain.field.jet(deinterleave(x))
        sup = float(np.max(np.linalg.norm(j.g, axis=1)))
        report["sampled_gradient_sup"] = sup
        report["gradient_bound_ok"] = sup <= domain.gradient_bound
    if domain.witness_point is not None:
        report["witness_interior"] = domain.contains(domain.witness_point)
    return report


# ---------------------------------------------------------------------------
# derivatives


def eval_field(field: ScalarField, z) -> float:
    return field(cvec(z))


def wirtinger_gradient(field: ScalarField, z) -> np.ndarray:
    """(dr/dz_j)_j with d/dz = (d/dx - i d/dy)/2."""
    j = field.jet(cvec(z))
    if j.sing[0]:
        raise SingularLocusError("wirtinger gradient on the singular locus")
    return wirtinger_from_real(j.g[0])


@dataclass
class LeviData:
    matrix: np.ndarray
    gradient: np.ndarray
    restricted_eigenvalues: Optional[np.ndarray] = None
    restricted_vectors: Optional[np.ndarray] = None
    pure: Optional[np.ndarray] = None
    note: str = ""


def tangent_basis(grad: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of {v : sum grad_j v_j = 0}."""
    normal = np.conj(grad) / norm(grad)
    U = normal_frame(normal)
    return U[:, :-1]


def levi_form(field: ScalarField, z, boundary_tol: float = 1e-8) -> LeviData:
    """Levi matrix d^2 r / dz_j dzbar_k at z, plus the eigen-decomposition of
    its restriction to the complex tangent space when z is a boundary point."""
    z = cvec(z)
    j = field.jet(z)
    if j.sing[0]:
        raise SingularLocusError("levi form on the singular locus")
    M, P = complex_hessian_from_real(j.H[0])
    M = 0.5 * (M + M.conj().T)
    g = wirtinger_from_real(j.g[0])
    data = LeviData(matrix=M, gradient=g, pure=P)
    if abs(j.v[0]) <= boundary_tol * max(1.0, norm(z)):
        if norm(g) <= 1e-14:
            data.note = "degenerate gradient at boundary point; restricted eigenvalues omitted"
            return data
        if field.dim == 1:
            data.restricted_eigenvalues = np.zeros(0)
            data.restricted_vectors = np.zeros((1, 0), dtype=complex)
            return data
        B = tangent_basis(g)
        R = B.T @ M @ np.conj(B)
        R = 0.5 * (R + R.conj().T)
        w, e = np.linalg.eigh(R)
        data.restricted_eigenvalues = w
        data.restricted_vectors = B @ np.conj(e)
    return data


def normal_frame(nu: np.ndarray) -> np.ndarray:
    """Unitary matrix whose last column is the unit vector ``nu``; the other
    columns are completed from the standard basis in order, so the frame is
    the identity whenever ``nu = e_n``."""
    nu = cvec(nu) / norm(nu)
    n = nu.size
    cols = []
    for k in range(n):
        e = np.zeros(n, dtype=complex)
        e[k] = 1.0
        v = e - hermitian(e, nu) * nu
        for c in cols:
            v = v - hermitian(v, c) * c
        if norm(v) > 1e-8:
            cols.append(v / norm(v))
        if len(cols) == n - 1:
            break
    U = np.column_stack(cols + [nu]) if cols else nu.reshape(n, 1)
    return U


# ---------------------------------------------------------------------------
# projection and distance


def _project_piece(g: ScalarField, z: np.ndarray, max_iter=100, tol=1e-12, seed=None):
    """Nearest point on {g = 0} to z: damped Newton on the Lagrange system,
    seeded by gradient-flow steps onto the surface (started from ``seed``
    when given, else from z)."""
    x0 = interleave(z)
    w = x0.copy() if seed is None else interleave(seed)
    for _ in range(30):
        j = g.jet(deinterleave(w))
        v, gr = j.v[0], j.g[0]
        gg = gr @ gr
        if gg == 0:
            raise ProjectionError("vanishing gradient during seeding")
        if abs(v) < 1e-14 * max(1.0, np.sqrt(gg)):
            break
        w = w - v * gr / gg
    j = g.jet(deinterleave(w))
    gr = j.g[0]
    lam = (x0 - w) @ gr / (gr @ gr)
    d = x0.size

    def residual(w, lam):
        jj = g.jet(deinterleave(w))
        F = np.concatenate([w - x0 + lam * jj.g[0], [jj.v[0]]])
        return F, jj

    F, jj = residual(w, lam)
    best = np.linalg.norm(F)
    scale = max(1.0, np.linalg.norm(x0))
    for _ in range(max_iter):
        if best <= tol * scale:
            break
        J = np.zeros((d + 1, d + 1))
        J[:d, :d] = np.eye(d) + lam * jj.H[0]
        J[:d, d] = jj.g[0]
        J[d, :d] = jj.g[0]
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            step = -np.linalg.lstsq(J, F, rcond=None)[0]
        t = 1.0
        for _ in range(30):
            w_new, lam_new = w + t * step[:d], lam + t * step[d]
            F_new, jj_new = residual(w_new, lam_new)
            if np.linalg.norm(F_new) < (1 - 1e-4 * t) * best or t < 1e-6:
                break
            t *= 0.5
        w, lam, F, jj = w_new, lam_new, F_new, jj_new
        best = np.linalg.norm(F)
    if not best <= 1e-9 * scale:
        raise ProjectionError("projection did not converge", best)
    if np.any(jj.sing):
        raise SingularLocusError("projection landed on the singular locus")
    return deinterleave(w), jj.g[0]


def _project_robust(g: ScalarField, z: np.ndarray, scale: float):
    """As :func:`_project_piece`; at a critical point of g the flow is
    restarted from nudged seeds and the closest result wins."""
    try:
        return _project_piece(g, z)
    except ProjectionError as exc:
        if "vanishing gradient" not in str(exc):
            raise
    found = []
    for k in range(2 * z.size):
        e = np.zeros(z.size, dtype=complex)
        e[k // 2] = 1.0 if k % 2 == 0 else 1j
        try:
            found.append(_project_piece(g, z, seed=z + 1e-6 * scale * e))
        except (ProjectionError, SingularLocusError):
            continue
    if not found:
        raise ProjectionError("vanishing gradient at every seed")
    return min(found, key=lambda pg: norm(pg[0] - z))


def _all_projections(domain: DomainSpec, z: np.ndarray):
    """Candidate nearest boundary points, one per smooth piece, keeping only
    those that lie on the boundary of the intersection."""
    out = []
    for k, g in enumerate(domain.pieces):
        if not is_smooth(g.root):
            continue
        try:
            p, gr = _project_robust(g, z, domain.enclosing_radius)
        except (ProjectionError, SingularLocusError):
            continue
        others = [h(p) for i, h in enumerate(domain.pieces) if i != k]
        if all(v <= 1e-9 for v in others):
            out.append((norm(p - z), p, gr, k))
    out.sort(key=lambda t: t[0])
    return out


def signed_distance(domain: DomainSpec, z) -> float:
    """Negative inside, positive outside, magnitude = distance to the boundary."""
    z = cvec(z)
    model = domain.model
    if model is not None and model[0] == "ball":
        return float(norm(z) - model[1])
    if model is not None and model[0] == "halfspace":
        R = model[1]
        a, b = z[-1].real, norm(z) - R
        if a < 0 and b < 0:
            return float(max(a, b))
        return float(max(a, b)) if (a >= 0) != (b >= 0) else float(np.hypot(max(a, 0), max(b, 0)))
    for g in domain.pieces:
        if not is_smooth(g.root):
            return _nonsmooth_distance(domain, z)
    cands = _all_projections(domain, z)
    if not cands:
        raise ProjectionError("no boundary piece admitted a projection")
    d = cands[0][0]
    return float(-d if domain.values(z) < 0 else d)


def _nonsmooth_distance(domain, z):
    # pieces given as minus a Euclidean distance (slits); smooth pieces projected
    dists = []
    for g in domain.pieces:
        if is_smooth(g.root):
            try:
                p, _ = _project_piece(g, z)
                dists.append(norm(p - z))
            except ProjectionError:
                pass
        else:
            dists.append(abs(g(z)))
    d = min(dists)
    return float(-d if domain.values(z) < 0 else d)


def boundary_projection(domain: DomainSpec, z, check_tubular=True):
    """Nearest boundary point and outward unit normal (as a complex vector,
    i.e. the real normal with x_j + i y_j packed per coordinate)."""
    z = cvec(z)
    model = domain.model
    if model is not None and model[0] == "ball":
        r = norm(z)
        if r == 0:
            raise ProjectionError("projection of the centre is not unique", 0.0)
        nu = z / r
        p = nu * model[1]
        dist = abs(model[1] - r)
    elif model is not None and model[0] == "halfspace" and (model[1] - norm(z)) > -z[-1].real:
        p = z.copy()
        p[-1] = 1j * z[-1].imag
        nu = np.zeros_like(z)
        nu[-1] = 1.0
        dist = abs(z[-1].real)
    else:
        cands = _all_projections(domain, z)
        if not cands:
            raise ProjectionError("no boundary piece admitted a projection")
        dist, p, gr, _ = cands[0]
        nu = deinterleave(gr) / np.linalg.norm(gr)
    if check_tubular and dist > domain.tubular_radius:
        raise ProjectionError(
            f"point at distance {dist:.3g} is outside the tubular neighbourhood "
            f"({domain.tubular_radius:.3g}); projection may be non-unique", dist)
    return p, nu


def validate_tubular_radius(domain: DomainSpec, samples=16, seed=0, tol=1e-8) -> bool:
    """From boundary points, step inward by the declared radius and check the
    projection returns to the same boundary point."""
    rng = np.random.default_rng(seed)
    n = domain.dim
    t = 0.99 * domain.tubular_radius
    checked = 0
    for _ in range(samples * 20):
        if checked >= samples:
            break
        x = rng.normal(size=n) + 1j * rng.normal(size=n)
        x *= 0.5 * domain.enclosing_radius * rng.uniform() / norm(x)
        try:
            p, nu = boundary_projection(domain, x, check_tubular=False)
        except ProjectionError:
            continue
        q = p - t * nu
        if not domain.contains(q):
            continue
        try:
            p2, _ = boundary_projection(domain, q, check_tubular=False)
        except ProjectionError:
            return False
        if norm(p2 - p) > tol * max(1.0, domain.enclosing_radius):
            return False
        checked += 1
    return checked > 0


def real_part_of_field(N: np.ndarray) -> np.ndarray:
    """Re of sum c_j d/dz_j as a real vector: (Re c_j / 2, Im c_j / 2) pairs."""
    return 0.5 * interleave(N)


def normal_vectors(domain: DomainSpec, p):
    """Real outward normal n_p (length-2n real vector) and complex normal N_p
    built from the gradient of the signed distance at p."""
    p = cvec(p)
    if abs(domain.values(p)) <= 1e-12 * max(1.0, norm(p)):
        gr = None
        for g in domain.pieces:
            if abs(g(p)) <= 1e-10:
                jj = g.jet(p)
                if jj.sing[0]:
                    raise SingularLocusError("normal requested on the singular locus")
                gr = jj.g[0]
                break
        if gr is None:
            raise ProjectionError("boundary piece not identified")
        ddelta = gr / np.linalg.norm(gr)
    else:
        _, nu = boundary_projection(domain, p)
        ddelta = interleave(nu)
    dbar = 0.5 * (ddelta[0::2] + 1j * ddelta[1::2])  # d delta / d zbar_j
    N = 2.0 * SQRT2 * dbar
    n = SQRT2 * real_part_of_field(N)
    return n, N


def cone_membership(z, k: float) -> bool:
    """-Re z_n > k |z| (the approach region along the inner normal)."""
    if not 0 < k < 1:
        raise ValueError("cone aperture k must lie in (0, 1)")
    z = cvec(z)
    return bool(-z[-1].real > k * norm(z))


__all__ = [
    "DomainSpec",
    "LeviData",
    "ProjectionError",
    "boundary_projection",
    "cone_membership",
    "cvec",
    "eval_field",
    "estimate_gradient_bound",
    "hermitian",
    "levi_form",
    "normal_frame",
    "normal_vectors",
    "signed_distance",
    "tangent_basis",
    "validate_domain",
    "validate_tubular_radius",
    "wirtinger_gradient",
]
