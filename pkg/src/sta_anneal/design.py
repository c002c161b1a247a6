"""Inverse engineering: Hamiltonian coefficients from prescribed angles.

Given the Bloch-vector angles of the dynamical invariant, the design
equations return the drive that makes the invariant an exact solution of
its equation of motion. All three families are 0/0 at ``t = 0`` and
``t = T``; the ratios are evaluated with the endpoint zeros divided out
exactly (see :mod:`sta_anneal._endpoint`), so boundary values are exact
limits rather than windowed approximations.
"""

from dataclasses import dataclass

import numpy as np

from ._endpoint import Factored
from .errors import RequiresLongitudinalField, SiteInconsistent, SingularDrive
from .schedules import AngleSet, DriveSample, DriveSchedule

SINGULAR_CAP = 1e6
SITE_RTOL = 1e-8


class _Factors:
    """Factored trig images of an angle set, built once per schedule."""

    def __init__(self, angles):
        T = angles.T
        th, ph, ga = angles.theta_poly, angles.phi_poly, angles.gamma_poly
        self.T = T
        self.sin_th = Factored.sin_of(th)
        self.cos_th = Factored.cos_of(th)
        self.sin_ph = Factored.sin_of(ph)
        self.cos_ph = Factored.cos_of(ph)
        self.dth = Factored.poly(th.deriv()) / T
        self.dph = Factored.poly(ph.deriv()) / T
        self.sin_pg = Factored.sin_of(ph - ga)
        self.cos_pg = Factored.cos_of(ph - ga)
        self.gamma = ga


def _check(t, **values):
    for name, v in values.items():
        v = np.asarray(v, dtype=float)
        bad = ~np.isfinite(v) | (np.abs(v) > SINGULAR_CAP)
        if np.any(bad):
            idx = np.flatnonzero(bad)[0]
            tt = float(np.broadcast_to(t, v.shape).flat[idx])
            raise SingularDrive(
                f"designed {name} is singular at t = {tt:.6g} (value {v.flat[idx]:.3g})",
                t=tt, value=float(v.flat[idx]))


def _scalarize(t, *arrays):
    if np.ndim(t) == 0:
        return (float(t),) + tuple(float(a) for a in arrays)
    return (t,) + arrays


def _single_coeffs(fac):
    gam = -fac.dth / fac.sin_ph
    hz = -fac.dth * fac.cos_th * fac.cos_ph / (fac.sin_th * fac.sin_ph) + fac.dph
    return gam, hz


def _mean_field_coeffs(fac, J, h):
    gam = fac.dth / (2.0 * fac.sin_ph)
    num = 2.0 * gam * fac.cos_th / fac.sin_th * fac.cos_ph - fac.dph
    f = num / (2.0 * (J * fac.cos_th + h))
    return gam, f


def _rotating_coeffs(fac, J):
    gam = fac.dth / (2.0 * fac.sin_pg)
    f = gam * fac.cos_pg / (J * fac.sin_th) - fac.dph / (2.0 * J * fac.cos_th)
    return gam, f


def _evaluator_single(angles):
    fac = _Factors(angles)
    gam, hz = _single_coeffs(fac)

    def evaluate(t):
        s = np.asarray(t, dtype=float) / angles.T
        g, z = gam(s), hz(s)
        _check(t, Gamma=g, h_z=z)
        zero = np.zeros_like(g)
        return DriveSample(*_scalarize(t, g, zero, zero, z))

    return evaluate


def _evaluator_mean_field(angles, J, h):
    if not h > 0:
        raise RequiresLongitudinalField(
            "mean-field design needs a finite longitudinal field h > 0 "
            "(the f denominator 2 (J cos theta + h) vanishes at t = 0)")
    fac = _Factors(angles)
    gam, f = _mean_field_coeffs(fac, J, h)

    def evaluate(t):
        s = np.asarray(t, dtype=float) / angles.T
        g, ff = gam(s), f(s)
        _check(t, Gamma=g, f=ff)
        zero = np.zeros_like(g)
        return DriveSample(*_scalarize(t, g, zero, ff, zero))

    return evaluate


def _evaluator_rotating(angles, J):
    if not J > 0:
        raise ValueError("rotating design requires J > 0")
    fac = _Factors(angles)
    gam, f = _rotating_coeffs(fac, J)

    def evaluate(t):
        s = np.asarray(t, dtype=float) / angles.T
        g, ff = gam(s), f(s)
        _check(t, Gamma=g, f=ff)
        ga = fac.gamma(s)
        return DriveSample(*_scalarize(t, g * np.cos(ga), g * np.sin(ga), ff, np.zeros_like(g)))

    return evaluate


def design_single_spin(angles, t):
    """Field ``(Gamma, 0, h_z)`` of ``H = h . S`` that carries the invariant along ``angles``.

    ``Gamma = -dtheta / sin(phi)`` and
    ``h_z = -dtheta cos(theta) cos(phi) / (sin(theta) sin(phi)) + dphi``.
    """
    return _evaluator_single(angles)(t)


def design_mean_field(angles, params, t):
    """Transverse field and Ising weight ``(Gamma, f)`` from the mean-field equations.

    ``Gamma = dtheta / (2 sin(phi))`` and
    ``f = (2 Gamma cot(theta) cos(phi) - dphi) / (2 (J cos(theta) + h))``.

    Raises
    ------
    RequiresLongitudinalField
        If ``params.h == 0``.
    SingularDrive
        If a coefficient is non-finite or exceeds ``SINGULAR_CAP``.
    """
    return _evaluator_mean_field(angles, params.J, params.h)(t)


def design_rotating(angles, params, t):
    """Rotating transverse field ``(Gamma cos(gamma), Gamma sin(gamma))`` and ``f``.

    Uses ``Gamma = dtheta / (2 sin(phi - gamma))`` and
    ``f = Gamma cos(phi - gamma) / (J sin(theta)) - dphi / (2 J cos(theta))``,
    the Bloch-equation solution with no longitudinal field.
    """
    return _evaluator_rotating(angles, params.J)(t)


_PROBE = 4001
_POLE_GRID = 10_000


def _scan_poles(angles, params):
    """Raise if a design denominator changes sign strictly inside ``(0, T)``.

    A sign change is a pole of the drive that a finite probe grid can step
    over without ever exceeding ``SINGULAR_CAP``.
    """
    T = angles.T
    t = np.arange(1, _POLE_GRID) / _POLE_GRID * T
    th, ph = angles.theta(t), angles.phi(t)
    dens = {"sin(theta)": np.sin(th)}
    if angles.kind == "rotating":
        dens["sin(phi - gamma)"] = np.sin(ph - angles.gamma(t))
        dens["cos(theta)"] = np.cos(th)
    else:
        dens["sin(phi)"] = np.sin(ph)
        if angles.kind == "ising":
            dens["J cos(theta) + h"] = params.J * np.cos(th) + params.h
    for name, v in dens.items():
        flips = np.flatnonzero(np.sign(v[1:]) != np.sign(v[:-1]))
        if flips.size:
            tt = float(t[flips[0] + 1])
            raise SingularDrive(f"{name} changes sign near t = {tt:.6g}; the designed drive "
                                f"has a pole there (T = {T:g})", t=tt, value=np.inf)


def design_schedule(angles, params=None):
    """Tabulation-ready drive for ``angles``, dispatching on ``angles.kind``.

    The design denominators are scanned for interior sign changes and the
    drive is probed on a uniform grid, so singular schedules fail here
    rather than mid-integration.

    Raises
    ------
    SingularDrive
        At the first interior pole or over-cap value; ``t`` names it.
    """
    _scan_poles(angles, params)
    if angles.kind == "single":
        evaluate = _evaluator_single(angles)
    elif angles.kind == "ising":
        evaluate = _evaluator_mean_field(angles, params.J, params.h)
    else:
        evaluate = _evaluator_rotating(angles, params.J)
    evaluate(np.linspace(0.0, angles.T, _PROBE))
    return DriveSchedule(angles.kind, angles.T, evaluate, angles)


@dataclass(frozen=True)
class CouplingMatrix:
    """General Ising couplings.

    The Ising part is ``-1/2 sum_ij J_ij sz_i sz_j - sum_i h_i sz_i`` with the
    unrestricted double sum, so the infinite-range model is ``J_ij = J / N``
    for every pair including ``i = j``.
    """

    J: np.ndarray
    h: np.ndarray
    xi: np.ndarray | None = None

    def __post_init__(self):
        J = np.asarray(self.J, dtype=float)
        h = np.asarray(self.h, dtype=float)
        if J.ndim != 2 or J.shape[0] != J.shape[1]:
            raise ValueError("J must be a square matrix")
        if h.shape != (J.shape[0],):
            raise ValueError("h must have one entry per site")
        if not np.allclose(J, J.T, rtol=0.0, atol=1e-14):
            raise ValueError("J must be symmetric")
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "h", h)
        if self.xi is not None:
            xi = np.asarray(self.xi, dtype=float)
            if xi.shape != h.shape or np.any(np.abs(xi) != 1.0):
                raise ValueError("xi must be a vector of +1/-1 signs, one per site")
            object.__setattr__(self, "xi", xi)

    @property
    def N(self):
        return self.h.shape[0]

    @classmethod
    def infinite_range(cls, N, J, h):
        return cls(np.full((N, N), J / N), np.full(N, float(h)), np.ones(N))


def mattis_couplings(xi, J, h, N=None):
    """Mattis model ``J_ij = J xi_i xi_j / N``, ``h_i = h xi_i``."""
    xi = np.asarray(xi, dtype=float)
    N = xi.size if N is None else N
    if xi.shape != (N,):
        raise ValueError(f"need {N} signs, got shape {xi.shape}")
    if np.any(np.abs(xi) != 1.0):
        raise ValueError("xi entries must be +1 or -1")
    return CouplingMatrix(J * np.outer(xi, xi) / N, h * xi, xi)


def mattis_angles(base, xi):
    """Per-site angle sets ``theta_i = xi_i theta + (1 - xi_i) pi/2``, ``phi_i = xi_i phi``."""
    return [base.site(x) for x in np.asarray(xi, dtype=float)]


def design_general_ising(angle_sets, couplings, t):
    """Common ``(Gamma, f)`` of the per-site mean-field equations.

    Each site ``i`` gives ``Gamma_i = dtheta_i / (2 sin(phi_i))`` and
    ``f_i = (2 Gamma_i cot(theta_i) cos(phi_i) - dphi_i)
    / (2 (sum_j J_ij cos(theta_j) + h_i))``. A schedule exists only if these
    agree across sites.

    Raises
    ------
    SiteInconsistent
        When any site differs from site 0 by more than ``SITE_RTOL``
        (relative to ``max(1, |value|)``); ``discrepancy`` carries the worst one.
    """
    if len(angle_sets) != couplings.N:
        raise ValueError("need one AngleSet per site")
    T = angle_sets[0].T
    facs = [_Factors(a) for a in angle_sets]
    s = np.asarray(t, dtype=float) / T
    cos_vals = np.array([fa.cos_th(s) for fa in facs])
    gams, fs = [], []
    for i, fa in enumerate(facs):
        gam = fa.dth / (2.0 * fa.sin_ph)
        num = 2.0 * gam * fa.cos_th / fa.sin_th * fa.cos_ph - fa.dph
        denom = 2.0 * (np.tensordot(couplings.J[i], cos_vals, axes=1) + couplings.h[i])
        gams.append(gam(s))
        fs.append(num(s) / denom)
    gams, fs = np.array(gams), np.array(fs)
    disc = 0.0
    for vals in (gams, fs):
        ref = vals[0]
        with np.errstate(invalid="ignore"):
            rel = np.abs(vals - ref) / np.maximum(1.0, np.abs(ref))
        disc = max(disc, float(np.nanmax(rel)) if rel.size else 0.0)
        if np.any(np.isnan(rel)):
            disc = np.inf
    if disc > SITE_RTOL:
        raise SiteInconsistent(
            f"site equations disagree (max relative discrepancy {disc:.3e}); "
            "no site-independent (Gamma, f) exists for these angles", discrepancy=disc)
    _check(t, Gamma=gams[0], f=fs[0])
    zero = np.zeros_like(gams[0])
    return DriveSample(*_scalarize(t, gams[0], zero, fs[0], zero))
