"""Angle schedules for invariant-based inverse engineering.

Each schedule is a set of polynomials in the reduced time ``s = t / T``
giving the polar angle ``theta``, the azimuth ``phi`` and, for the rotating
transverse field, the field angle ``gamma``. The Bloch vector of the
invariant is ``n = (sin th cos ph, sin th sin ph, cos th)``.

Angles are stored exactly as designed for each model: the single-spin and
Ising families use opposite signs of ``phi``, and :mod:`sta_anneal.design`
applies the matching equations per kind.
"""

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from numpy.polynomial import Polynomial

from .errors import DivergentSchedule, RequiresLongitudinalField

PI = np.pi

KINDS = ("single", "ising", "rotating")
DIVERGENCE_GRID = 10_000


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the infinite-range transverse-field Ising model.

    Defaults follow the figure settings: ``J = Gamma0 = 1``, ``h = 0.1``,
    ``N = 4000``.
    """

    J: float = 1.0
    h: float = 0.1
    Gamma0: float = 1.0
    T: float = 10.0
    N: int = 4000

    def __post_init__(self):
        if not self.J >= 0:
            raise ValueError(f"J must be >= 0, got {self.J}")
        if not self.h >= 0:
            raise ValueError(f"h must be >= 0, got {self.h}")
        if not self.Gamma0 > 0:
            raise ValueError(f"Gamma0 must be > 0, got {self.Gamma0}")
        if not (self.T > 0 and np.isfinite(self.T)):
            raise ValueError(f"T must be a positive finite time, got {self.T}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        object.__setattr__(self, "N", int(self.N))

    def replace(self, **changes):
        d = dict(J=self.J, h=self.h, Gamma0=self.Gamma0, T=self.T, N=self.N)
        d.update(changes)
        return ModelParams(**d)


def _poly(coef):
    return Polynomial(np.asarray(coef, dtype=float))


_ZERO = Polynomial([0.0])


@dataclass(frozen=True)
class AngleSet:
    """Polynomial angles ``theta(s), phi(s), gamma(s)`` on the horizon ``T``.

    ``constants`` records the design constants the polynomials were built
    from (``Gamma0``, and ``h1`` or ``J``/``h``); :func:`verify_boundaries`
    uses them for the limit conditions.
    """

    kind: str
    T: float
    theta_poly: Polynomial
    phi_poly: Polynomial
    gamma_poly: Polynomial = field(default_factory=lambda: _ZERO)
    constants: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if not self.T > 0:
            raise ValueError("T must be positive")

    def s(self, t):
        return np.asarray(t, dtype=float) / self.T

    def theta(self, t):
        return self.theta_poly(self.s(t))

    def phi(self, t):
        return self.phi_poly(self.s(t))

    def gamma(self, t):
        return self.gamma_poly(self.s(t))

    def dtheta(self, t):
        return self.theta_poly.deriv()(self.s(t)) / self.T

    def dphi(self, t):
        return self.phi_poly.deriv()(self.s(t)) / self.T

    def dgamma(self, t):
        return self.gamma_poly.deriv()(self.s(t)) / self.T

    def bloch(self, t):
        """Unit vector of the invariant, shape ``(..., 3)``."""
        th, ph = self.theta(t), self.phi(t)
        return np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)

    def dbloch(self, t):
        th, ph = self.theta(t), self.phi(t)
        dth, dph = self.dtheta(t), self.dphi(t)
        return np.stack([
            dth * np.cos(th) * np.cos(ph) - dph * np.sin(th) * np.sin(ph),
            dth * np.cos(th) * np.sin(ph) + dph * np.sin(th) * np.cos(ph),
            -dth * np.sin(th),
        ], axis=-1)

    def site(self, xi):
        """Gauge image for a spin of sign ``xi``: ``theta -> xi theta + (1 - xi) pi/2``."""
        xi = float(xi)
        if abs(xi) != 1.0:
            raise ValueError("xi must be +1 or -1")
        return AngleSet(self.kind, self.T,
                        xi * self.theta_poly + (1.0 - xi) * PI / 2,
                        xi * self.phi_poly, xi * self.gamma_poly, dict(self.constants))


def _theta_quartic():
    # pi/2 - 2 pi s^3 + 3 pi/2 s^4: theta(T) = 0 with zero slope at both ends
    return _poly([PI / 2, 0.0, 0.0, -2 * PI, 1.5 * PI])


def single_spin_schedule(variant, Gamma0, h1, T):
    """Angles steering a single spin from the x axis (field Gamma0) to z (field h1)."""
    if not (Gamma0 > 0 and T > 0):
        raise ValueError("Gamma0 and T must be positive")
    consts = {"Gamma0": float(Gamma0), "h1": float(h1)}
    if variant == 1:
        c = 6 * PI / (Gamma0 * T)
        k = h1 * T / 3
        # s^2 [2 pi s (1 - 3s/4) + c (1 - s)^2 - k s (1 - s)]
        phi = _poly([0.0, 0.0, c, 2 * PI - 2 * c - k, -1.5 * PI + c + k])
        return AngleSet("single", float(T), _theta_quartic(), phi, constants=consts)
    if variant == 2:
        gt, ht = Gamma0 * T, h1 * T
        a3 = PI / 2 * gt - gt * ht / 9
        a4 = 2.5 * PI - PI * gt + 2 * gt * ht / 9
        a5 = -2 * PI + PI / 2 * gt - gt * ht / 9
        b3 = -PI + ht / 3
        theta = _poly([PI / 2, 0.0, 0.0, -a3, -a4, -a5])
        phi = _poly([0.0, 0.0, 3 * a3 / gt, b3])
        return AngleSet("single", float(T), theta, phi, constants=consts)
    raise ValueError(f"variant must be 1 or 2, got {variant!r}")


def ising_schedule(variant, params):
    """Mean-field angles for the transverse Ising model, (f, Gamma): (0, Gamma0) -> (1, 0).

    Raises
    ------
    RequiresLongitudinalField
        If ``params.h <= 0``.
    DivergentSchedule
        If ``sin(phi)`` vanishes or changes sign on the interior scan grid,
        where the designed transverse field would diverge.
    """
    if params.h <= 0:
        raise RequiresLongitudinalField("ising schedules require h > 0")
    T, G, jh = params.T, params.Gamma0, params.J + params.h
    consts = {"Gamma0": G, "J": params.J, "h": params.h}
    if variant == 1:
        c = 3 * PI / (G * T)
        k = 2 * jh * T / 3
        phi = -_poly([0.0, 0.0, c, 2 * PI - 2 * c - k, -1.5 * PI + c + k])
        angles = AngleSet("ising", T, _theta_quartic(), phi, constants=consts)
    elif variant == 2:
        gt, x = G * T, G * T * jh * T
        a3 = PI * gt - 4 * x / 9
        a4 = 2.5 * PI - 2 * PI * gt + 8 * x / 9
        a5 = -2 * PI + PI * gt - 4 * x / 9
        b = -PI + 2 * jh * T / 3
        theta = _poly([PI / 2, 0.0, 0.0, -a3, -a4, -a5])
        phi = -_poly([0.0, 0.0, 3 * a3 / (2 * gt), b])
        angles = AngleSet("ising", T, theta, phi, constants=consts)
    else:
        raise ValueError(f"variant must be 1 or 2, got {variant!r}")
    _check_azimuth(angles, variant)
    return angles


def _check_azimuth(angles, variant):
    s = np.arange(1, DIVERGENCE_GRID) / DIVERGENCE_GRID
    sp = np.sin(angles.phi_poly(s))
    ref = np.sign(sp[0])
    bad = np.nonzero(np.sign(sp) != ref)[0] if ref != 0 else np.array([0])
    if bad.size:
        t = float(s[bad[0]] * angles.T)
        raise DivergentSchedule(
            f"ising schedule {variant}: sin(phi) changes sign near t = {t:.6g} "
            f"(T = {angles.T:g}); the transverse field diverges there", t=t)


def rotating_schedule(params):
    """Angles for the rotating transverse field, (f, Gx, Gy): (0, Gamma0, 0) -> (1, 0, 0).

    ``gamma`` runs from 0 to pi/2 and ``phi`` vanishes at both ends. The
    quadratic coefficient of ``theta`` fixes ``Gamma(0) = Gamma0``; the cubic
    and quartic ones are the unique pair giving ``theta(T) = 0`` with zero
    slope.
    """
    if not (params.J > 0 and params.Gamma0 > 0):
        raise ValueError("rotating schedule requires J > 0 and Gamma0 > 0")
    T, G, J = params.T, params.Gamma0, params.J
    a = J / G
    g = J / (G**2 * T)
    theta = _poly([PI / 2, 0.0, -a, 2 * a - 2 * PI, 1.5 * PI - a])
    phi = (2.0 / 3.0) * J * T * _poly([0.0, 0.0, 0.0, 1.0, -1.0])
    gamma = _poly([0.0, g, 1.5 * PI - 2 * g, -PI + g])
    return AngleSet("rotating", T, theta, phi, gamma, constants={"Gamma0": G, "J": J})


@dataclass(frozen=True)
class DriveSample:
    """Hamiltonian coefficients at time ``t`` (scalars or equal-shape arrays).

    For the single-spin kind ``gamma_x`` is the x field and ``h_z`` the z
    field of ``H = h . S``. For the Ising kinds ``f`` multiplies the Ising
    part and ``h_z`` is zero (the longitudinal field enters as ``f h``).
    """

    t: float
    gamma_x: float
    gamma_y: float
    f: float
    h_z: float

    def as_array(self):
        return np.stack(np.broadcast_arrays(self.t, self.gamma_x, self.gamma_y, self.f, self.h_z), axis=-1)


@dataclass(frozen=True)
class DriveSchedule:
    """A drive as a vectorized function of time on ``[0, T]``.

    ``kind`` selects the Hamiltonian family: ``"single"`` for ``h(t) . S``,
    ``"ising"``/``"linear"`` for the transverse Ising model and
    ``"rotating"`` for the Ising model without longitudinal field.
    """

    kind: str
    T: float
    evaluate: Callable[[np.ndarray], DriveSample]
    angles: AngleSet | None = None

    def __call__(self, t):
        return self.evaluate(np.asarray(t, dtype=float))

    def table(self, samples=201):
        t = np.linspace(0.0, self.T, samples)
        return self(t).as_array()


def linear_drive(params):
    """Standard annealing schedule ``Gamma = Gamma0 (1 - t/T)``, ``f = t/T``."""
    T, G = params.T, params.Gamma0

    def evaluate(t):
        s = t / T
        zero = np.zeros_like(s)
        return DriveSample(t, G * (1.0 - s), zero, s, zero)

    return DriveSchedule("linear", T, evaluate)


@dataclass(frozen=True)
class Condition:
    name: str
    residual: float
    passed: bool


@dataclass(frozen=True)
class Report:
    kind: str
    conditions: tuple

    @property
    def ok(self):
        return all(c.passed for c in self.conditions)

    def failures(self):
        return [c for c in self.conditions if not c.passed]

    def __getitem__(self, name):
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def __str__(self):
        lines = [f"boundary report ({self.kind}): {'PASS' if self.ok else 'FAIL'}"]
        for c in self.conditions:
            lines.append(f"  {'ok  ' if c.passed else 'FAIL'} {c.name:<24s} residual={c.residual:.3e}")
        return "\n".join(lines)


BOUNDARY_TOL = 1e-8


def verify_boundaries(angles, kind=None, tol=BOUNDARY_TOL):
    """Check endpoint values, slopes and limit relations of an angle set.

    Failures are reported, never raised. Limit relations that need design
    constants are skipped when ``angles.constants`` lacks them.
    """
    kind = kind or angles.kind
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    T = angles.T
    th, ph, ga = angles.theta_poly, angles.phi_poly, angles.gamma_poly
    d = lambda p, k=1: p.deriv(k)  # noqa: E731
    consts = angles.constants
    checks = [
        ("theta(0)=pi/2", th(0.0) - PI / 2),
        ("phi(0)=0", ph(0.0)),
        ("theta(T)=0", th(1.0)),
        ("dtheta(T)=0", d(th)(1.0) / T),
    ]
    if kind in ("single", "ising"):
        checks += [
            ("dtheta(0)=0", d(th)(0.0) / T),
            ("d2theta(0)=0", d(th, 2)(0.0) / T**2),
            ("dphi(0)=0", d(ph)(0.0) / T),
        ]
    if kind == "single":
        checks.append(("phi(T)=pi/2", ph(1.0) - PI / 2))
        if "Gamma0" in consts:
            # Gamma = -dtheta / sin(phi) -> -theta'''(0) / (phi''(0) T)
            checks.append(("Gamma(0)=Gamma0", -d(th, 3)(0.0) / (d(ph, 2)(0.0) * T) - consts["Gamma0"]))
        if "h1" in consts:
            checks.append(("h_z(T)=h1", 3 * d(ph)(1.0) / T - consts["h1"]))
    elif kind == "ising":
        checks.append(("phi(T)=-pi/2", ph(1.0) + PI / 2))
        if "Gamma0" in consts:
            checks.append(("Gamma(0)=Gamma0", d(th, 3)(0.0) / (2 * d(ph, 2)(0.0) * T) - consts["Gamma0"]))
        if "J" in consts and "h" in consts:
            checks.append(("f(T)=1", -3 * d(ph)(1.0) / (2 * T * (consts["J"] + consts["h"])) - 1.0))
    else:
        checks += [
            ("gamma(0)=0", ga(0.0)),
            ("gamma(T)=pi/2", ga(1.0) - PI / 2),
            ("phi(T)=0", ph(1.0)),
            ("dphi(0)=0", d(ph)(0.0) / T),
        ]
        # Gamma = dtheta / (2 sin(phi - gamma)) -> theta''(0) / (2 T (phi' - gamma')(0))
        gamma_start = d(th, 2)(0.0) / (2 * T * (d(ph)(0.0) - d(ga)(0.0)))
        if "Gamma0" in consts:
            checks.append(("Gamma(0)=Gamma0", gamma_start - consts["Gamma0"]))
        if "J" in consts:
            J = consts["J"]
            # f = Gamma cos(phi - gamma) / (J sin th) - dphi / (2 J cos th)
            f0 = gamma_start / J + d(ph, 3)(0.0) / (2 * J * T * d(th, 2)(0.0))
            fT = (d(ga)(1.0) - d(ph)(1.0)) / (J * T) - d(ph)(1.0) / (2 * J * T)
            checks.append(("f(0)=0", f0))
            checks.append(("f(T)=1", fT - 1.0))
    conds = tuple(Condition(name, float(abs(r)), bool(abs(r) <= tol)) for name, r in checks)
    return Report(kind, conds)


def custom_angles(kind, T, theta, phi, gamma=(0.0,), **constants):
    """Angle set from user polynomial coefficients (ascending powers of ``s``)."""
    return AngleSet(kind, float(T), _poly(theta), _poly(phi), _poly(gamma), dict(constants))
