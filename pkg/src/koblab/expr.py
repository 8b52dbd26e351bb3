"""Expression trees for real defining functions r(z) on C^n.

Trees are built over the real coordinates ``x_1, y_1, ..., x_n, y_n`` (stored
interleaved, ``x_j`` at index ``2j - 2``).  A single tree is evaluated through
three backends:

* plain floats (batched numpy arrays),
* second-order jets (value, real gradient, real Hessian, singular flag),
* first-order Taylor models (certified enclosures over cells, see ``taylor``).

The text form is prefix notation over the tokens ``re(j)``, ``im(j)``,
``re(j,k,...)`` / ``im(j,k,...)`` (real/imaginary part of ``z_j z_k ...``),
``abs2(j)``, ``absp(j,m)``, ``norm``, numeric constants (bare or ``const(c)``),
``seg(j,a,b)`` (minus the distance from ``z_j`` to a segment) and the binary
operators ``+``, ``*`` and ``^`` (integer exponent).  Indices are 1-based.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .taylor import TM, cmul


class ParseError(ValueError):
    """Malformed expression text; ``column`` is 1-based within the expression."""

    def __init__(self, message, column, line=None):
        self.message = message
        self.column = column
        self.line = line
        where = f"column {column}" if line is None else f"line {line}, column {column}"
        super().__init__(f"{message} at {where}")


class SingularLocusError(ValueError):
    """A derivative was requested where the defining function is not differentiable."""


# ---------------------------------------------------------------------------
# jets


class Jet:
    """Batched value / gradient / Hessian over the 2n real coordinates."""

    __slots__ = ("v", "g", "H", "sing")

    def __init__(self, v, g, H, sing):
        self.v = v
        self.g = g
        self.H = H
        self.sing = sing

    @classmethod
    def constant(cls, c, like):
        n, d = like.g.shape
        return cls(np.full(n, float(c)), np.zeros((n, d)), np.zeros((n, d, d)),
                   np.zeros(n, dtype=bool))

    def __add__(self, o):
        if isinstance(o, Jet):
            return Jet(self.v + o.v, self.g + o.g, self.H + o.H, self.sing | o.sing)
        return Jet(self.v + o, self.g, self.H, self.sing)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.v, -self.g, -self.H, self.sing)

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, o):
        if not isinstance(o, Jet):
            c = float(o)
            return Jet(c * self.v, c * self.g, c * self.H, self.sing)
        v = self.v * o.v
        g = self.v[:, None] * o.g + o.v[:, None] * self.g
        outer = self.g[:, :, None] * o.g[:, None, :]
        H = (self.v[:, None, None] * o.H + o.v[:, None, None] * self.H
             + outer + outer.transpose(0, 2, 1))
        return Jet(v, g, H, self.sing | o.sing)

    __rmul__ = __mul__

    def sq(self):
        return self * self

    def rpow(self, p):
        """``self ** p`` for a nonnegative base whose gradient vanishes at zero
        (squared moduli).  At a zero base the one-sided limits are returned and
        the point is flagged when the derivative does not exist."""
        t = np.maximum(self.v, 0.0)
        zero = t <= 0.0
        ts = np.where(zero, 1.0, t)
        f = np.where(zero, 0.0, ts ** p)
        d1 = np.where(zero, 0.0, p * ts ** (p - 1.0))
        d2 = np.where(zero, 0.0, p * (p - 1.0) * ts ** (p - 2.0))
        g = d1[:, None] * self.g
        H = d1[:, None, None] * self.H + d2[:, None, None] * (self.g[:, :, None] * self.g[:, None, :])
        # first derivative of rho^(2p) exists at 0 iff 2p > 1, second iff 2p > 2
        sing = self.sing | (zero & (2.0 * p <= 2.0))
        return Jet(f, g, H, sing)


def _seed_jets(x):
    """x: (d, N) real coordinates -> list of coordinate jets."""
    d, n = x.shape
    out = []
    for i in range(d):
        g = np.zeros((n, d))
        g[:, i] = 1.0
        out.append(Jet(x[i].astype(float), g, np.zeros((n, d, d)), np.zeros(n, dtype=bool)))
    return out


def _constant_like(c, like):
    if isinstance(like, Jet):
        return Jet.constant(c, like)
    if isinstance(like, TM):
        return TM.constant(c, like.h)
    return np.full(np.shape(like), float(c))


def _sq(v):
    if isinstance(v, (Jet, TM)):
        return v.sq()
    return v * v


def _rpow(v, p):
    if isinstance(v, (Jet, TM)):
        return v.rpow(p)
    return np.maximum(v, 0.0) ** p


# ---------------------------------------------------------------------------
# nodes


class Node:
    def ev(self, xs):
        raise NotImplementedError

    def max_index(self) -> int:
        return 0

    def prefix(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.prefix()


def _fmt(c: float) -> str:
    return repr(float(c))


@dataclass(frozen=True)
class Const(Node):
    value: float

    def ev(self, xs):
        return _constant_like(self.value, xs[0])

    def prefix(self):
        return _fmt(self.value)


@dataclass(frozen=True)
class Var(Node):
    """Real coordinate: ``index`` 0-based into (x_1, y_1, x_2, ...)."""

    index: int

    def ev(self, xs):
        return xs[self.index]

    def max_index(self):
        return self.index // 2 + 1

    def prefix(self):
        j = self.index // 2 + 1
        return f"re({j})" if self.index % 2 == 0 else f"im({j})"


@dataclass(frozen=True)
class Sum(Node):
    left: Node
    right: Node

    def ev(self, xs):
        return self.left.ev(xs) + self.right.ev(xs)

    def max_index(self):
        return max(self.left.max_index(), self.right.max_index())

    def prefix(self):
        return f"+ {self.left.prefix()} {self.right.prefix()}"


@dataclass(frozen=True)
class Prod(Node):
    left: Node
    right: Node

    def ev(self, xs):
        if isinstance(self.left, Const):
            return self.right.ev(xs) * self.left.value
        if isinstance(self.right, Const):
            return self.left.ev(xs) * self.right.value
        return self.left.ev(xs) * self.right.ev(xs)

    def max_index(self):
        return max(self.left.max_index(), self.right.max_index())

    def prefix(self):
        return f"* {self.left.prefix()} {self.right.prefix()}"


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: int

    def ev(self, xs):
        b = self.base.ev(xs)
        k = self.exponent
        if k == 0:
            return _constant_like(1.0, xs[0])
        result = None
        sq = b
        while k:
            if k & 1:
                result = sq if result is None else result * sq
            k >>= 1
            if k:
                sq = _sq(sq)
        return result

    def max_index(self):
        return self.base.max_index()

    def prefix(self):
        return f"^ {self.base.prefix()} {self.exponent}"


@dataclass(frozen=True)
class Mono(Node):
    """Real (or imaginary) part of the holomorphic monomial prod z_j."""

    indices: tuple
    imag: bool = False

    def ev(self, xs):
        j0 = self.indices[0] - 1
        pr, pi = xs[2 * j0], xs[2 * j0 + 1]
        for j in self.indices[1:]:
            pr, pi = cmul(pr, pi, xs[2 * j - 2], xs[2 * j - 1])
        return pi if self.imag else pr

    def max_index(self):
        return max(self.indices)

    def prefix(self):
        tag = "im" if self.imag else "re"
        return f"{tag}({','.join(str(j) for j in self.indices)})"


@dataclass(frozen=True)
class Abs2(Node):
    j: int

    def ev(self, xs):
        return _sq(xs[2 * self.j - 2]) + _sq(xs[2 * self.j - 1])

    def max_index(self):
        return self.j

    def prefix(self):
        return f"abs2({self.j})"


@dataclass(frozen=True)
class AbsPow(Node):
    """|z_j|^m for real m >= 1; even integer powers stay polynomial."""

    j: int
    m: float

    def ev(self, xs):
        t = _sq(xs[2 * self.j - 2]) + _sq(xs[2 * self.j - 1])
        m = self.m
        if float(m).is_integer() and int(m) % 2 == 0:
            return Pow(_Leaf(t), int(m) // 2).ev(xs)
        return _rpow(t, 0.5 * m)

    def max_index(self):
        return self.j

    def prefix(self):
        m = self.m
        ms = str(int(m)) if float(m).is_integer() else repr(float(m))
        return f"absp({self.j},{ms})"


@dataclass(frozen=True)
class Norm(Node):
    """Euclidean norm |z| over all n coordinates (n fixed at evaluation)."""

    def ev(self, xs):
        t = None
        for v in xs:
            t = _sq(v) if t is None else t + _sq(v)
        return _rpow(t, 0.5)

    def prefix(self):
        return "norm"


@dataclass(frozen=True)
class _Leaf(Node):
    value: object

    def ev(self, xs):
        return self.value


@dataclass(frozen=True)
class SegmentDistance(Node):
    """Minus the distance from z_j to a closed segment [a, b] in C.

    Negative off the segment and zero on it, so ``{SegmentDistance < 0}`` is the
    slit complement.  Not differentiable; only float and Taylor-model
    evaluation are supported (the latter as a plain interval)."""

    j: int
    a: complex
    b: complex

    def ev(self, xs):
        x, y = xs[2 * self.j - 2], xs[2 * self.j - 1]
        if isinstance(x, Jet):
            raise SingularLocusError("segment distance has no derivatives")
        if isinstance(x, TM):
            return self._interval(x, y)
        w = (x + 1j * y - self.a)
        d = self.b - self.a
        s = np.clip((w * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
        return -np.abs(w - s * d)

    def _interval(self, x, y):
        # rotate so the segment is [0, L] on the real axis, enclose the box
        d = self.b - self.a
        L = abs(d)
        u = np.conj(d) / L
        xlo, xhi = x.bounds()
        ylo, yhi = y.bounds()
        pts = np.stack([xlo + 1j * ylo, xlo + 1j * yhi, xhi + 1j * ylo, xhi + 1j * yhi])
        pts = (pts - self.a) * u
        rlo, rhi = pts.real.min(axis=0), pts.real.max(axis=0)
        ilo, ihi = pts.imag.min(axis=0), pts.imag.max(axis=0)
        dx = np.maximum.reduce([np.zeros_like(rlo), rlo - L, -rhi])
        dy = np.where((ilo <= 0) & (ihi >= 0), 0.0, np.minimum(np.abs(ilo), np.abs(ihi)))
        dmin = np.hypot(dx, dy)
        # upper end of the distance: farthest corner from the segment
        cx = np.clip(pts.real, 0.0, L)
        dmax = np.abs(pts - cx).max(axis=0)
        return TM.from_interval(-dmax, -dmin, x.h)

    def max_index(self):
        return self.j

    def prefix(self):
        def c(v):
            return f"{v.real!r}{v.imag:+.17g}j"

        return f"seg({self.j},{c(self.a)},{c(self.b)})"


# ---------------------------------------------------------------------------
# convenience constructors


def const(c):
    return Const(float(c))


def add(*terms):
    out = terms[0]
    for t in terms[1:]:
        out = Sum(out, t)
    return out


def mul(*factors):
    out = factors[0]
    for f in factors[1:]:
        out = Prod(out, f)
    return out


def scale(c, node):
    return Prod(Const(float(c)), node)


def re_(*idx):
    if len(idx) == 1:
        return Var(2 * idx[0] - 2)
    return Mono(tuple(idx), False)


def im_(*idx):
    if len(idx) == 1:
        return Var(2 * idx[0] - 1)
    return Mono(tuple(idx), True)


# ---------------------------------------------------------------------------
# the field wrapper


class ScalarField:
    """A real-valued function of z in C^n given by an expression tree."""

    def __init__(self, root: Node, dim: int):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        if root.max_index() > dim:
            raise ValueError(f"expression uses z_{root.max_index()} but dimension is {dim}")
        self.root = root
        self.dim = dim

    def __repr__(self):
        return f"ScalarField({self.root.prefix()!r}, dim={self.dim})"

    def prefix(self) -> str:
        return self.root.prefix()

    def _coords(self, z):
        z = np.asarray(z, dtype=complex)
        single = z.ndim == 1
        if single:
            z = z[None, :]
        if z.shape[-1] != self.dim:
            raise ValueError(f"dimension mismatch: field has n={self.dim}, point has n={z.shape[-1]}")
        x = np.empty((2 * self.dim, z.shape[0]))
        x[0::2] = z.real.T
        x[1::2] = z.imag.T
        return x, single

    def __call__(self, z):
        x, single = self._coords(z)
        v = self.root.ev(list(x))
        v = np.broadcast_to(v, (x.shape[1],)).astype(float)
        return float(v[0]) if single else v

    def jet(self, z):
        """Value, real gradient (2n) and real Hessian (2n x 2n), batched."""
        x, single = self._coords(z)
        j = self.root.ev(_seed_jets(x))
        if single:
            return Jet(j.v[:1], j.g[:1], j.H[:1], j.sing[:1])
        return j

    def taylor(self, xs_tm: Sequence[TM]) -> TM:
        return self.root.ev(list(xs_tm))

    def real_gradient(self, z):
        j = self.jet(z)
        if np.any(j.sing):
            raise SingularLocusError("gradient requested on the singular locus")
        return j.g[0] if np.ndim(z) == 1 else j.g


def interleave(z):
    """Complex vector(s) (..., n) -> real coordinates (..., 2n)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def deinterleave(x):
    x = np.asarray(x, dtype=float)
    return x[..., 0::2] + 1j * x[..., 1::2]


def wirtinger_from_real(g):
    """Real gradient (2n) -> (d/dz_j) = (d/dx_j - i d/dy_j) / 2."""
    g = np.asarray(g)
    return 0.5 * (g[..., 0::2] - 1j * g[..., 1::2])


def complex_hessian_from_real(H):
    """Real Hessian -> matrix of d^2/dz_j dzbar_k and d^2/dz_j dz_k."""
    H = np.asarray(H)
    Hxx = H[..., 0::2, 0::2]
    Hyy = H[..., 1::2, 1::2]
    Hxy = H[..., 0::2, 1::2]
    Hyx = H[..., 1::2, 0::2]
    mixed = 0.25 * (Hxx + Hyy + 1j * (Hxy - Hyx))
    pure = 0.25 * (Hxx - Hyy - 1j * (Hxy + Hyx))
    return mixed, pure


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<func>re|im|abs2|absp|seg|const)\s*\((?P<args>[^()]*)\)"
    r"|(?P<norm>norm\b)"
    r"|(?P<op>[+*^])"
    r"|(?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
    r"|(?P<bad>\S+)"
    r")"
)


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        start = m.start(m.lastgroup)
        if m.group("bad") is not None:
            raise ParseError(f"unknown token {m.group('bad')!r}", start + 1)
        out.append((m, start + 1))
        pos = m.end()
    return out


def parse_expression(text: str) -> Node:
    """Parse the prefix-notation form described in the module docstring."""
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty expression", 1)
    i = 0

    def take():
        nonlocal i
        if i >= len(tokens):
            raise ParseError("unexpected end of expression", len(text) + 1)
        tok = tokens[i]
        i += 1
        return tok

    def ints(args, col, count=None):
        try:
            vals = [int(a) for a in args.split(",")]
        except ValueError:
            raise ParseError(f"bad index list {args!r}", col) from None
        if any(v < 1 for v in vals) or (count is not None and len(vals) != count):
            raise ParseError(f"bad index list {args!r}", col)
        return vals

    def node():
        m, col = take()
        if m.group("num") is not None:
            return Const(float(m.group("num")))
        if m.group("norm") is not None:
            return Norm()
        op = m.group("op")
        if op == "+":
            return Sum(node(), node())
        if op == "*":
            return Prod(node(), node())
        if op == "^":
            base = node()
            em, ecol = take()
            num = em.group("num")
            if num is None or not float(num).is_integer() or float(num) < 0:
                raise ParseError("exponent of ^ must be a nonnegative integer", ecol)
            return Pow(base, int(float(num)))
        func, args = m.group("func"), m.group("args")
        if func == "const":
            try:
                return Const(float(args))
            except ValueError:
                raise ParseError(f"bad constant {args!r}", col) from None
        if func in ("re", "im"):
            idx = ints(args, col)
            return re_(*idx) if func == "re" else im_(*idx)
        if func == "abs2":
            return Abs2(ints(args, col, 1)[0])
        if func == "absp":
            parts = [p.strip() for p in args.split(",")]
            if len(parts) != 2:
                raise ParseError("absp takes (j, m)", col)
            j = ints(parts[0], col, 1)[0]
            try:
                power = float(parts[1])
            except ValueError:
                raise ParseError(f"bad power {parts[1]!r}", col) from None
            if power < 1:
                raise ParseError("absp power must be >= 1", col)
            return AbsPow(j, power)
        if func == "seg":
            parts = [p.strip() for p in args.split(",")]
            if len(parts) != 3:
                raise ParseError("seg takes (j, a, b)", col)
            try:
                return SegmentDistance(ints(parts[0], col, 1)[0], complex(parts[1]), complex(parts[2]))
            except ValueError:
                raise ParseError("bad segment endpoint", col) from None
        raise ParseError("unrecognised token", col)  # pragma: no cover

    root = node()
    if i != len(tokens):
        raise ParseError("trailing tokens", tokens[i][1])
    return root


def parse_field(text: str, dim: int) -> ScalarField:
    return ScalarField(parse_expression(text), dim)


def is_smooth(node: Node) -> bool:
    """False if the tree contains a node without derivatives."""
    if isinstance(node, SegmentDistance):
        return False
    if isinstance(node, (Sum, Prod)):
        return is_smooth(node.left) and is_smooth(node.right)
    if isinstance(node, Pow):
        return is_smooth(node.base)
    return True
