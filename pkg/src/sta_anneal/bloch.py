"""Mean-field (classical spin) dynamics of the designed drives.

Every family reduces to ``dn/dt = B(t, n_z) x n`` for the unit vector
``n = 2 <S> / N``. With the collective Hamiltonian written as
``a Sz^2 + b Sz + cx Sx + cy Sy`` the effective field is
``B = (cx, cy, b + a N n_z)``; for the Ising family this is
``-2 f (J n_z + h) e_z - 2 Gamma e_x``, and for a single spin ``B = h``.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NormDrift
from .quantum import drive_family, hamiltonian_coefficients

DEFAULT_STEPS = 10_000
MIN_STEPS = 1000
NORM_TOL = 1e-6


@dataclass
class BlochTrajectory:
    """RK4 trajectory of the mean-field spin, one row of ``n`` per step."""

    t: np.ndarray
    n: np.ndarray
    kind: str
    max_drift: float

    @property
    def s(self):
        return self.t / self.t[-1]

    @property
    def m(self):
        return self.n[:, 2]


def _field(drive, params, t, kind, perturbation):
    a, b, cx, cy = hamiltonian_coefficients(drive, params, t, perturbation, kind)
    N = 1 if params is None else params.N
    return cx, cy, b, a * N


def evolve_bloch(drive, params, kind=None, steps=DEFAULT_STEPS, n0=(1.0, 0.0, 0.0),
                 perturbation=None, renorm=True):
    """Classical RK4 from ``n(0) = n0`` (spins along +x by default).

    The self-consistent ``J n_z`` term is re-evaluated at every RK4 stage.
    ``|n|`` is restored after each step when ``renorm`` is set.

    Raises
    ------
    NormDrift
        If ``| |n| - 1 |`` exceeds ``NORM_TOL`` anywhere on the trajectory
        (only reachable with ``renorm=False`` or non-finite drives).
    """
    kind = drive_family(drive, kind)
    steps = int(steps)
    if steps < MIN_STEPS:
        raise ValueError(f"need at least {MIN_STEPS} steps, got {steps}")
    if params is None and kind != "single":
        raise ValueError("Ising families need ModelParams")
    T = drive.T
    dt = T / steps
    th = np.linspace(0.0, T, 2 * steps + 1)
    bx, by, bz, jz = (np.ascontiguousarray(v, dtype=np.float64)
                      for v in _field(drive, params, th, kind, perturbation))
    n0 = np.asarray(n0, dtype=np.float64)
    n0 = n0 / np.linalg.norm(n0)
    traj = kernels.bloch_rk4(n0, bx, by, bz, jz, dt, steps, renorm)
    drift = float(np.max(np.abs(np.linalg.norm(traj, axis=1) - 1.0)))
    if not drift <= NORM_TOL:
        raise NormDrift(f"|n| drifted by {drift:.3e} over {steps} steps", drift)
    return BlochTrajectory(np.arange(steps + 1) * dt, traj, kind, drift)


def bloch_residual(angles, drive, kind=None, t=None, params=None):
    """``|dn/dt - B x n|`` along the invariant's parametrized Bloch vector.

    Zero exactly when the drive solves the design equations at ``t``.
    ``params`` supplies ``J``, ``h`` for the Ising families; it defaults to
    the design constants recorded on ``angles``.
    """
    from .schedules import ModelParams

    kind = drive_family(drive, kind)
    if params is None:
        c = angles.constants
        params = ModelParams(J=c.get("J", 1.0), h=c.get("h", 0.0),
                             Gamma0=c.get("Gamma0", 1.0), T=angles.T, N=1)
    t = np.asarray(t, dtype=float)
    n = angles.bloch(t)
    bx, by, bz, jz = _field(drive, params, t, kind, None)
    B = np.stack(np.broadcast_arrays(bx, by, bz + jz * n[..., 2]), axis=-1)
    r = np.linalg.norm(angles.dbloch(t) - np.cross(B, n), axis=-1)
    return float(r) if r.ndim == 0 else r
