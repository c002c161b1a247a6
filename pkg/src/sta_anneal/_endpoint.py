"""Cancellation-free evaluation of ratios of polynomial-angle expressions.

The design equations are 0/0 at both ends of the horizon (e.g. ``dtheta /
sin(phi)`` at ``s = 0``). Every factor is stored as

    F(s) = s**p0 * (1 - s)**p1 * g(s)

with integer orders ``p0, p1`` and a regular part ``g`` that has two
evaluation routes, one accurate on ``[0, 1)`` and one on ``(0, 1]``. The
endpoint zeros are divided out of the polynomials exactly, so products and
quotients cancel the orders symbolically and the limits come out to
machine precision.
"""

import numpy as np
from numpy.polynomial import Polynomial

_TOL = 1e-12
_FLIP = Polynomial([1.0, -1.0])  # s -> 1 - s


def _deflate(coef, tol=_TOL):
    """Strip (near-)zero low-order coefficients; return (order, remaining poly)."""
    coef = np.asarray(coef, dtype=float)
    scale = max(1.0, float(np.max(np.abs(coef)))) if coef.size else 1.0
    k = 0
    while k < coef.size and abs(coef[k]) <= tol * scale:
        k += 1
    if k == coef.size:
        return 0, Polynomial([0.0])
    return k, Polynomial(coef[k:])


def _at_one(p):
    """Coefficients of ``p(1 - u)`` as a polynomial in ``u``."""
    return p(_FLIP).coef


def _near_multiple(value, unit, scale):
    m = round(value / unit)
    if abs(value - m * unit) <= _TOL * scale:
        return int(m)
    return None


def _as_poly(p):
    return p if isinstance(p, Polynomial) else Polynomial(np.asarray(p, dtype=float))


def _sinc(x):
    return np.sinc(x / np.pi)


class Factored:
    """Function on ``[0, 1]`` with explicit endpoint orders."""

    __slots__ = ("p0", "p1", "g0", "g1")
    __array_ufunc__ = None  # keep numpy scalars from broadcasting over us

    def __init__(self, p0, p1, g0, g1):
        self.p0 = p0
        self.p1 = p1
        self.g0 = g0  # accurate for s < 1
        self.g1 = g1  # accurate for s > 0

    @classmethod
    def constant(cls, c):
        def g(s):
            return np.full_like(s, c, dtype=float)

        return cls(0, 0, g, g)

    @classmethod
    def poly(cls, p):
        p = _as_poly(p)
        p0, q0 = _deflate(p.coef)
        p1, q1 = _deflate(_at_one(p))

        def g0(s):
            return q0(s) / (1.0 - s) ** p1

        def g1(s):
            return q1(1.0 - s) / s**p0

        return cls(p0, p1, g0, g1)

    @classmethod
    def sin_of(cls, p, shift=0.0):
        """``sin(p(s) + shift)`` with zeros at ``s = 0, 1`` factored out."""
        p = _as_poly(p) + shift
        scale = max(1.0, float(np.max(np.abs(p.coef))))
        parts = []
        for at_end in (False, True):
            coef = _at_one(p) if at_end else p.coef
            m = _near_multiple(coef[0], np.pi, scale)
            if m is None:
                parts.append((0, None, None))
                continue
            coef = coef.copy()
            coef[0] -= m * np.pi
            order, q = _deflate(coef)
            parts.append((order, (-1.0) ** m, (Polynomial(coef), q)))
        (p0, sg0, pq0), (p1, sg1, pq1) = parts

        def near(s, sg, pq, u):
            if pq is None:
                return np.sin(p(s))
            full, red = pq
            x = full(u)
            return sg * _sinc(x) * red(u)

        def g0(s):
            return near(s, sg0, pq0, s) / (1.0 - s) ** p1

        def g1(s):
            return near(s, sg1, pq1, 1.0 - s) / s**p0

        return cls(p0, p1, g0, g1)

    @classmethod
    def cos_of(cls, p, shift=0.0):
        return cls.sin_of(p, shift + 0.5 * np.pi)

    def regular(self, s):
        s = np.asarray(s, dtype=float)
        out = np.empty_like(s)
        lo = s < 0.5
        with np.errstate(divide="ignore", invalid="ignore"):
            if np.any(lo):
                out[lo] = self.g0(s[lo])
            if np.any(~lo):
                out[~lo] = self.g1(s[~lo])
        return out

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            pre = np.power(s, float(self.p0)) * np.power(1.0 - s, float(self.p1))
            return pre * self.regular(s)

    def __mul__(self, other):
        if not isinstance(other, Factored):
            c = float(other)
            return Factored(self.p0, self.p1,
                            lambda s, g=self.g0: c * g(s), lambda s, g=self.g1: c * g(s))
        a, b = self, other
        return Factored(a.p0 + b.p0, a.p1 + b.p1,
                        lambda s: a.g0(s) * b.g0(s), lambda s: a.g1(s) * b.g1(s))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Factored):
            return self * (1.0 / float(other))
        a, b = self, other
        return Factored(a.p0 - b.p0, a.p1 - b.p1,
                        lambda s: a.g0(s) / b.g0(s), lambda s: a.g1(s) / b.g1(s))

    def __neg__(self):
        return self * -1.0

    def __add__(self, other):
        if not isinstance(other, Factored):
            other = Factored.constant(float(other))
        a, b = self, other
        q0, q1 = min(a.p0, b.p0), min(a.p1, b.p1)

        def g0(s):
            return (s ** (a.p0 - q0) * (1.0 - s) ** (a.p1 - q1) * a.g0(s)
                    + s ** (b.p0 - q0) * (1.0 - s) ** (b.p1 - q1) * b.g0(s))

        def g1(s):
            return (s ** (a.p0 - q0) * (1.0 - s) ** (a.p1 - q1) * a.g1(s)
                    + s ** (b.p0 - q0) * (1.0 - s) ** (b.p1 - q1) * b.g1(s))

        return Factored(q0, q1, g0, g1)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other if isinstance(other, Factored) else -float(other))

    def __rsub__(self, other):
        return (-self) + other
