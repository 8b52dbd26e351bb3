"""First-order Taylor models over batches of two-variable boxes.

A model represents ``f(c + u) = a + b . u + E`` with ``|u_k| <= h_k`` and
``|E| <= e``.  Everything is vectorised over a leading batch axis so one call
encloses a function on thousands of cells at once.  The linear part keeps the
dependency between variables, so overestimation is second order in the box
size instead of first order as with plain intervals.
"""

from __future__ import annotations

import numpy as np


class TM:
    __slots__ = ("a", "b", "e", "h")

    def __init__(self, a, b, e, h):
        self.a = a
        self.b = b
        self.e = e
        self.h = h

    @classmethod
    def constant(cls, value, h):
        n = h.shape[0]
        return cls(np.full(n, float(value)), np.zeros((n, 2)), np.zeros(n), h)

    @classmethod
    def from_interval(cls, lo, hi, h):
        n = h.shape[0]
        return cls(0.5 * (lo + hi), np.zeros((n, 2)), 0.5 * (hi - lo), h)

    def spread(self):
        return (np.abs(self.b) * self.h).sum(axis=1)

    def bounds(self):
        w = self.spread() + self.e
        return self.a - w, self.a + w

    def upper(self):
        return self.a + self.spread() + self.e

    def __add__(self, other):
        if isinstance(other, TM):
            return TM(self.a + other.a, self.b + other.b, self.e + other.e, self.h)
        return TM(self.a + other, self.b, self.e, self.h)

    __radd__ = __add__

    def __neg__(self):
        return TM(-self.a, -self.b, self.e, self.h)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TM):
            c = float(other)
            return TM(c * self.a, c * self.b, abs(c) * self.e, self.h)
        w1, w2 = self.spread(), other.spread()
        a = self.a * other.a
        b = self.a[:, None] * other.b + other.a[:, None] * self.b
        e = (w1 * w2 + np.abs(self.a) * other.e + np.abs(other.a) * self.e
             + w1 * other.e + w2 * self.e + self.e * other.e)
        return TM(a, b, e, self.h)

    __rmul__ = __mul__

    def sq(self):
        # (a + L + E)^2 with L^2 in [0, w^2]: recentre the quadratic term.
        w = self.spread()
        a = self.a * self.a + 0.5 * w * w
        b = 2.0 * self.a[:, None] * self.b
        e = 0.5 * w * w + 2.0 * (np.abs(self.a) + w) * self.e + self.e * self.e
        return TM(a, b, e, self.h)

    def rpow(self, p):
        """``max(self, 0) ** p`` for real ``p > 0``."""
        lo, hi = self.bounds()
        lo = np.maximum(lo, 0.0)
        hi = np.maximum(hi, 0.0)
        out_lo = lo ** p
        out_hi = hi ** p
        a = np.clip(self.a, lo, hi)
        smooth = (lo > 1e-300) & (self.a > 0)
        res = TM.from_interval(out_lo, out_hi, self.h)
        if np.any(smooth):
            s = smooth
            fa = a[s] ** p
            d1 = p * a[s] ** (p - 1.0)
            if p >= 2.0 or p == 1.0:
                d2 = abs(p * (p - 1.0)) * hi[s] ** max(p - 2.0, 0.0)
            else:
                d2 = abs(p * (p - 1.0)) * lo[s] ** (p - 2.0)
            rad = self.spread()[s] + self.e[s]
            e = np.abs(d1) * self.e[s] + 0.5 * d2 * rad * rad
            b = d1[:, None] * self.b[s]
            # keep whichever enclosure is tighter
            w_tm = (np.abs(b) * self.h[s]).sum(axis=1) + e
            w_iv = res.e[s]
            take = w_tm < w_iv
            idx = np.nonzero(s)[0][take]
            res.a[idx] = fa[take]
            res.b[idx] = b[take]
            res.e[idx] = e[take]
        return res

    def reciprocal(self):
        """``1 / self``; cells whose range touches zero get an infinite remainder."""
        lo, hi = self.bounds()
        pos = lo > 0
        neg = hi < 0
        ok = pos | neg
        n = self.a.shape[0]
        a = np.zeros(n)
        b = np.zeros((n, 2))
        e = np.full(n, np.inf)
        if np.any(ok):
            s = ok
            ac = self.a[s]
            m = np.minimum(np.abs(lo[s]), np.abs(hi[s]))
            rad = self.spread()[s] + self.e[s]
            a[s] = 1.0 / ac
            d1 = -1.0 / (ac * ac)
            b[s] = d1[:, None] * self.b[s]
            e[s] = np.abs(d1) * self.e[s] + rad * rad / m ** 3
        return TM(a, b, e, self.h)


def polar_cells(r0, r1, t0, t1):
    """Taylor models of Re and Im of zeta over polar cells
    ``[r0, r1] x [t0, t1]``, with variables (radius offset, angle offset)."""
    rc = 0.5 * (r0 + r1)
    tc = 0.5 * (t0 + t1)
    dr = 0.5 * (r1 - r0)
    dt = 0.5 * (t1 - t0)
    h = np.stack([dr, dt], axis=1)
    c, s = np.cos(tc), np.sin(tc)
    e = 0.5 * rc * dt * dt + dr * dt
    re = TM(rc * c, np.stack([c, -rc * s], axis=1), e.copy(), h)
    im = TM(rc * s, np.stack([s, rc * c], axis=1), e.copy(), h)
    return re, im


def cmul(ar, ai, br, bi):
    return ar * br - ai * bi, ar * bi + ai * br
