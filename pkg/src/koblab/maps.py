"""Holomorphic maps given by complex expression trees.

Text form (prefix notation, one component per line or list entry)::

    z(j)            coordinate j (1-based)
    2.5  c(re,im)   real or complex constant
    + a b   - a b   * a b   / a b   ^ a k   (k a nonnegative integer)

Evaluation is forward mode: every node returns its value and its complex
gradient with respect to ``z``, so the Jacobian is exact up to rounding.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .expr import ParseError


class CNode:
    def ev(self, z: np.ndarray):
        """Return (value, gradient) for a batch ``z`` of shape (m, n)."""
        raise NotImplementedError


@dataclass(frozen=True)
class CConst(CNode):
    value: complex

    def ev(self, z):
        m, n = z.shape
        return np.full(m, complex(self.value)), np.zeros((m, n), dtype=complex)

    def prefix(self):
        c = complex(self.value)
        return repr(c.real) if c.imag == 0 else f"c({c.real!r},{c.imag!r})"


@dataclass(frozen=True)
class CVar(CNode):
    j: int

    def ev(self, z):
        g = np.zeros(z.shape, dtype=complex)
        g[:, self.j - 1] = 1.0
        return z[:, self.j - 1].copy(), g

    def prefix(self):
        return f"z({self.j})"


@dataclass(frozen=True)
class CBin(CNode):
    op: str
    left: CNode
    right: CNode

    def ev(self, z):
        a, da = self.left.ev(z)
        b, db = self.right.ev(z)
        if self.op == "+":
            return a + b, da + db
        if self.op == "-":
            return a - b, da - db
        if self.op == "*":
            return a * b, da * b[:, None] + db * a[:, None]
        if np.any(b == 0):
            raise ZeroDivisionError("map denominator vanishes")
        return a / b, (da * b[:, None] - db * a[:, None]) / (b * b)[:, None]

    def prefix(self):
        return f"{self.op} {self.left.prefix()} {self.right.prefix()}"


@dataclass(frozen=True)
class CPow(CNode):
    base: CNode
    k: int

    def ev(self, z):
        a, da = self.base.ev(z)
        if self.k == 0:
            return np.ones_like(a), np.zeros_like(da)
        v = a ** self.k
        return v, (self.k * a ** (self.k - 1))[:, None] * da

    def prefix(self):
        return f"^ {self.base.prefix()} {self.k}"


class HoloMapSpec:
    """A holomorphic map ``C^n -> C^p`` with exact Jacobian."""

    def __init__(self, components, dim: int, name: str = "map"):
        self.components = tuple(components)
        self.dim = dim
        self.name = name

    @property
    def target_dim(self):
        return len(self.components)

    def _batch(self, z):
        z = np.asarray(z, dtype=complex)
        single = z.ndim == 1
        zz = z[None, :] if single else z
        if zz.shape[1] != self.dim:
            raise ValueError("dimension mismatch")
        return zz, single

    def __call__(self, z):
        zz, single = self._batch(z)
        out = np.stack([c.ev(zz)[0] for c in self.components], axis=1)
        return out[0] if single else out

    def jacobian(self, z):
        """``J[i, j] = d f_i / d z_j``."""
        zz, single = self._batch(z)
        J = np.stack([c.ev(zz)[1] for c in self.components], axis=1)
        return J[0] if single else J

    def push(self, z, X):
        return self.jacobian(z) @ np.asarray(X, dtype=complex)

    def prefix(self):
        return [c.prefix() for c in self.components]

    @classmethod
    def linear(cls, M, name="linear"):
        M = np.asarray(M, dtype=complex)
        comps = []
        for row in M:
            terms = [CBin("*", CConst(complex(c)), CVar(j + 1)) for j, c in enumerate(row) if c != 0]
            node = terms[0] if terms else CConst(0j)
            for t in terms[1:]:
                node = CBin("+", node, t)
            comps.append(node)
        return cls(comps, M.shape[1], name)

    @classmethod
    def identity(cls, n):
        return cls([CVar(j + 1) for j in range(n)], n, "identity")


def ball_automorphism(a: float, n: int = 2) -> HoloMapSpec:
    """The involutive automorphism of the unit ball exchanging 0 and ``a e_1``
    (real ``0 <= a < 1``)."""
    if not 0 <= a < 1:
        raise ValueError("need 0 <= a < 1")
    s = np.sqrt(1.0 - a * a)
    den = CBin("-", CConst(1.0), CBin("*", CConst(a), CVar(1)))
    comps = [CBin("/", CBin("-", CConst(a), CVar(1)), den)]
    for j in range(2, n + 1):
        comps.append(CBin("/", CBin("*", CConst(-s), CVar(j)), den))
    return HoloMapSpec(comps, n, f"ball_aut_{a:g}")


def jacobian_fd(h: HoloMapSpec, z, step=1e-6):
    """Central finite-difference Jacobian (complex derivative along real axis)."""
    z = np.asarray(z, dtype=complex)
    J = np.zeros((h.target_dim, h.dim), dtype=complex)
    for j in range(h.dim):
        e = np.zeros(h.dim, dtype=complex)
        e[j] = step
        J[:, j] = (h(z + e) - h(z - e)) / (2 * step)
    return J


_TOK = re.compile(r"\s*(?:(?P<var>z\((?P<j>\d+)\))|(?P<c>c\((?P<cre>[^,()]+),(?P<cim>[^,()]+)\))"
                  r"|(?P<op>[-+*/^])(?=\s|$)|(?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
                  r"|(?P<bad>\S+))")


def parse_map_component(text: str) -> CNode:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOK.match(text, pos)
        if m is None or m.end() == pos:
            break
        col = m.start(m.lastgroup) + 1
        if m.group("bad"):
            raise ParseError(f"unknown token {m.group('bad')!r}", col)
        toks.append((m, col))
        pos = m.end()
    i = 0

    def node():
        nonlocal i
        if i >= len(toks):
            raise ParseError("unexpected end of expression", len(text) + 1)
        m, col = toks[i]
        i += 1
        if m.group("var"):
            j = int(m.group("j"))
            if j < 1:
                raise ParseError("coordinate index must be >= 1", col)
            return CVar(j)
        if m.group("c"):
            try:
                return CConst(complex(float(m.group("cre")), float(m.group("cim"))))
            except ValueError:
                raise ParseError("bad complex constant", col) from None
        if m.group("num"):
            return CConst(complex(float(m.group("num"))))
        op = m.group("op")
        if op == "^":
            base = node()
            if i >= len(toks) or not toks[i][0].group("num"):
                raise ParseError("exponent of ^ must be a nonnegative integer", len(text) + 1)
            em, ecol = toks[i]
            i += 1
            k = float(em.group("num"))
            if not k.is_integer() or k < 0:
                raise ParseError("exponent of ^ must be a nonnegative integer", ecol)
            return CPow(base, int(k))
        return CBin(op, node(), node())

    root = node()
    if i != len(toks):
        raise ParseError("trailing tokens", toks[i][1])
    return root


def parse_map(components, dim: int, name="map") -> HoloMapSpec:
    nodes = []
    for line, text in enumerate(components, start=1):
        try:
            nodes.append(parse_map_component(text))
        except ParseError as exc:
            raise ParseError(exc.message, exc.column, line) from None
    h = HoloMapSpec(nodes, dim, name)
    for nd in nodes:
        _check_indices(nd, dim)
    return h


def _check_indices(node, dim):
    if isinstance(node, CVar) and node.j > dim:
        raise ValueError(f"map uses z({node.j}) but dimension is {dim}")
    for child in ("left", "right", "base"):
        if hasattr(node, child):
            _check_indices(getattr(node, child), dim)


__all__ = [
    "HoloMapSpec",
    "ball_automorphism",
    "jacobian_fd",
    "parse_map",
    "parse_map_component",
]
