"""Numerical studies: T sweeps, perturbation stability and Mattis checks.

Independent runs fan out over a thread pool. The compiled propagator
releases the GIL, so threads give real parallelism; the worker count is
capped by the ``STA_THREADS`` environment variable (default 1).
"""

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .design import CouplingMatrix, design_general_ising, design_schedule, mattis_angles, mattis_couplings
from .quantum import evolve_full_hilbert, evolve_quantum
from .schedules import (ModelParams, ising_schedule, linear_drive, rotating_schedule,
                        single_spin_schedule)

SCHEDULES = ("single1", "single2", "ising1", "ising2", "rotating", "linear")
OMEGA_DEFAULT = 10.0 * math.pi

# Ising Schedule 1 polar angle; target trajectory for the linear drive
_TARGET = np.polynomial.Polynomial([math.pi / 2, 0.0, 0.0, -2.0 * math.pi, 1.5 * math.pi])


def max_workers():
    """Worker cap from ``STA_THREADS`` (at least 1)."""
    raw = os.environ.get("STA_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"STA_THREADS must be an integer, got {raw!r}") from None


def _map(fn, items, workers=None):
    workers = min(len(items), max_workers() if workers is None else max(1, int(workers)))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def build_drive(schedule, params, h1=1.0):
    """Drive and (if designed) angle set for a named schedule.

    ``single1``/``single2`` use ``params.Gamma0`` and the final field ``h1``;
    the Ising names use ``params``; ``rotating`` ignores ``params.h``.
    """
    if schedule in ("single1", "single2"):
        angles = single_spin_schedule(int(schedule[-1]), params.Gamma0, h1, params.T)
    elif schedule in ("ising1", "ising2"):
        angles = ising_schedule(int(schedule[-1]), params)
    elif schedule == "rotating":
        angles = rotating_schedule(params)
    elif schedule == "linear":
        return linear_drive(params), None
    else:
        raise ValueError(f"unknown schedule {schedule!r}; expected one of {SCHEDULES}")
    return design_schedule(angles, params), angles


def target_theta(angles, t, T):
    """Polar angle the magnetization should follow (``m = cos theta``)."""
    if angles is not None:
        return angles.theta(t)
    return _TARGET(np.asarray(t, dtype=float) / T)


# --- perturbations -------------------------------------------------------


@dataclass(frozen=True)
class PerturbationSpec:
    """Oscillating field ``sin(omega t / T) (h0_amp n0 + hp_amp np)``."""

    h0_amp: float = 0.0
    hp_amp: float = 0.0
    omega: float = OMEGA_DEFAULT

    def __post_init__(self):
        if not (self.h0_amp >= 0 and self.hp_amp >= 0):
            raise ValueError("perturbation amplitudes must be >= 0")
        if not (math.isfinite(self.h0_amp) and math.isfinite(self.hp_amp)):
            raise ValueError("perturbation amplitudes must be finite")
        if not math.isfinite(self.omega):
            raise ValueError("omega must be finite")

    @property
    def is_zero(self):
        return self.h0_amp == 0.0 and self.hp_amp == 0.0


def stable_directions(theta, phi):
    """The two stable directions: ``n`` and ``n0 = (sin th, 0, cos th)``."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    st, ct = np.sin(theta), np.cos(theta)
    n = np.stack([st * np.cos(phi), st * np.sin(phi), ct], axis=-1)
    n0 = np.stack([st, np.zeros_like(st), ct], axis=-1)
    return n, n0


def unstable_direction(theta, phi):
    """``(n x n0) / |n x n0|`` in closed form, finite at ``phi = 0``.

    The common factor ``2 sin th sin(phi/2)`` is divided out, leaving
    ``(cos th cos(phi/2), cos th sin(phi/2), -sin th cos(phi/2))`` normalized.
    """
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    st, ct = np.sin(theta), np.cos(theta)
    c2, s2 = np.cos(0.5 * phi), np.sin(0.5 * phi)
    v = np.stack([ct * c2, ct * s2, -st * c2], axis=-1)
    return v / np.sqrt(ct * ct + (st * c2) ** 2)[..., None]


def perturbation_field(angles, spec, t):
    """Field ``h(t)`` of shape ``(..., 3)`` in the ``phi = 0`` plane."""
    t = np.asarray(t, dtype=float)
    th = angles.theta(t)
    zero = np.zeros_like(th)
    _, n0 = stable_directions(th, zero)
    npert = unstable_direction(th, zero)
    env = np.sin(spec.omega * t / angles.T)[..., None]
    return env * (spec.h0_amp * n0 + spec.hp_amp * npert)


# --- stability -----------------------------------------------------------


@dataclass
class StabilityResult:
    t: np.ndarray
    m: np.ndarray
    dm2_literal: np.ndarray
    dm2_fluct: np.ndarray
    bloch: np.ndarray
    m_unperturbed: np.ndarray
    spec: PerturbationSpec
    T: float

    @property
    def deviation(self):
        return np.abs(self.m - self.m_unperturbed)

    @property
    def max_deviation(self):
        return float(np.max(self.deviation))

    @property
    def final_deviation(self):
        return float(self.deviation[-1])


def stability_run(params, schedule, spec, steps=None, samples=201, unperturbed=None, h1=1.0):
    """Quantum run under ``H(t) + h(t) . sum_i sigma_i`` next to the bare run.

    ``unperturbed`` may pass a precomputed bare :class:`QuantumRun` with the
    same ``samples`` to skip the second evolution.
    """
    drive, angles = build_drive(schedule, params, h1)
    if angles is None:
        raise ValueError("stability runs need a designed schedule (angles define the directions)")
    qp = params.replace(N=1) if angles.kind == "single" else params
    pert = None if spec.is_zero else (lambda t: perturbation_field(angles, spec, t))
    run = evolve_quantum(drive, qp, steps=steps, samples=samples, perturbation=pert)
    if unperturbed is None:
        unperturbed = run if pert is None else evolve_quantum(drive, qp, steps=steps, samples=samples)
    return StabilityResult(run.t, run.m, run.dm2_literal, run.dm2_fluct, run.bloch,
                           unperturbed.m, spec, params.T)


# --- T sweeps ------------------------------------------------------------


@dataclass
class SweepRow:
    T: float
    m_final: float
    max_dev_mean_field: float
    wall: float
    steps: int
    s: np.ndarray = field(repr=False)
    m: np.ndarray = field(repr=False)


@dataclass
class SweepResult:
    schedule: str
    N: int
    rows: list

    def pairwise_max_dm(self):
        """``max_s |m(s T) - m(s T')|`` over all pairs (0 for a single row)."""
        worst = 0.0
        for i, a in enumerate(self.rows):
            for b in self.rows[i + 1:]:
                worst = max(worst, float(np.max(np.abs(a.m - b.m))))
        return worst


def _sweep_one(schedule, params, steps, samples, h1):
    t0 = time.perf_counter()
    drive, angles = build_drive(schedule, params, h1)
    qp = params.replace(N=1) if schedule.startswith("single") else params
    run = evolve_quantum(drive, qp, steps=steps, samples=samples)
    dev = float(np.max(np.abs(run.m - np.cos(target_theta(angles, run.t, params.T)))))
    return SweepRow(params.T, float(run.m[-1]), dev, time.perf_counter() - t0, run.steps,
                    run.s, run.m)


def sweep_T(schedule, params, T_list, N=None, steps=None, samples=201, workers=None, h1=1.0):
    """Final magnetization and mean-field deviation for each horizon in ``T_list``.

    For the linear drive the reference is the Schedule-1 target ``cos theta(s)``.
    Errors from any member (e.g. :class:`DivergentSchedule`) propagate.
    """
    T_list = [float(T) for T in T_list]
    if not T_list:
        raise ValueError("T_list must be nonempty")
    base = params if N is None else params.replace(N=N)
    rows = _map(lambda T: _sweep_one(schedule, base.replace(T=T), steps, samples, h1), T_list,
                workers)
    return SweepResult(schedule, base.N, rows)


# --- Mattis --------------------------------------------------------------


@dataclass
class MattisResult:
    xi: np.ndarray
    t: np.ndarray
    sz: np.ndarray  # (samples, N) site magnetizations of the Mattis run
    m_ferro: np.ndarray
    gauge_error: float  # max |<sz_i> - xi_i m_ferro|
    design_error: float  # max relative gap, general vs mean-field design


def random_signs(N, seed):
    rng = np.random.default_rng(seed)
    return rng.choice(np.array([-1.0, 1.0]), size=N)


def mattis_run(params, xi=None, seed=None, schedule="ising1", steps=None, samples=201):
    """Full-Hilbert Mattis run against the ferromagnet under the same drive."""
    if xi is None:
        if seed is None:
            raise ValueError("mattis needs explicit signs xi or a seed")
        xi = random_signs(params.N, seed)
    xi = np.asarray(xi, dtype=float)
    p = params.replace(N=xi.size)
    drive, angles = build_drive(schedule, p)
    if angles is None or angles.kind != "ising":
        # the gauge flips sigma^y, so a rotating field breaks the equivalence
        raise ValueError("mattis runs need ising1 or ising2")
    mattis = mattis_couplings(xi, p.J, p.h)
    ferro = CouplingMatrix.infinite_range(p.N, p.J, p.h)
    rm = evolve_full_hilbert(mattis, drive, steps=steps, samples=samples)
    rf = evolve_full_hilbert(ferro, drive, steps=rm.steps, samples=samples)
    gauge = float(np.max(np.abs(rm.sz - xi[None, :] * rf.sz)))
    tt = np.linspace(0.0, p.T, 401)
    gen = design_general_ising(mattis_angles(angles, xi), mattis, tt)
    ref = drive(tt)
    design_err = 0.0
    for a, b in ((gen.gamma_x, ref.gamma_x), (gen.f, ref.f)):
        design_err = max(design_err, float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b)))))
    return MattisResult(xi, rm.t, rm.sz, rf.m, gauge, design_err)
