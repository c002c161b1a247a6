import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.sparse.linalg import eigsh

from sta_anneal import (CouplingMatrix, DimensionOverflow, DriveSample, DriveSchedule, ModelParams,
                        NormDrift, coherent_plus_x_state, collective_operators,
                        evolve_full_hilbert, evolve_quantum, linear_drive, observables)
from sta_anneal.experiments import build_drive, target_theta
from sta_anneal.quantum import hamiltonian_coefficients, symmetric_embedding

MINUS_X = np.array([1.0, -1.0]) / np.sqrt(2.0)


def constant_drive(T, gx=1.0, gy=0.0, f=0.0, kind="ising"):
    def evaluate(t):
        one = np.ones_like(t)
        return DriveSample(t, gx * one, gy * one, f * one, 0.0 * one)

    return DriveSchedule(kind, T, evaluate)


# --- states and operators --------------------------------------------------


def test_coherent_small_n():
    np.testing.assert_allclose(coherent_plus_x_state(1), [2**-0.5, 2**-0.5])
    np.testing.assert_allclose(coherent_plus_x_state(2), [0.5, 2**-0.5, 0.5])


@pytest.mark.parametrize("N", [1, 2, 5, 100, 4000])
def test_coherent_state_is_plus_x(N):
    psi = coherent_plus_x_state(N)
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-10)
    ob = observables(psi)
    assert ob.m == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(ob.bloch, [1.0, 0.0, 0.0], atol=1e-10)
    assert ob.dm2_fluct == pytest.approx(1.0 / N, rel=1e-10)


@pytest.mark.parametrize("N", [1, 4, 17, 32])
def test_coherent_is_ground_state_of_transverse_field(N):
    ops = collective_operators(N)
    H = (-2.0 * ops.Sx).toarray()
    w, v = np.linalg.eigh(H)
    assert w[0] == pytest.approx(-N, abs=1e-10)
    assert abs(np.vdot(v[:, 0], coherent_plus_x_state(N))) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("N", [1, 2, 9, 64])
def test_collective_algebra(N):
    ops = collective_operators(N)
    Sx, Sy, Sz = (o.toarray() for o in (ops.Sx, ops.Sy, ops.Sz))
    for A in (Sx, Sy, Sz, ops.Sz2.toarray()):
        np.testing.assert_allclose(A, A.conj().T, atol=1e-12)
    np.testing.assert_allclose(Sx @ Sy - Sy @ Sx, 1j * Sz, atol=1e-9)
    np.testing.assert_allclose(Sy @ Sz - Sz @ Sy, 1j * Sx, atol=1e-9)
    S = N / 2
    cas = Sx @ Sx + Sy @ Sy + Sz @ Sz
    np.testing.assert_allclose(cas, S * (S + 1) * np.eye(N + 1), atol=1e-8)
    np.testing.assert_allclose(ops.Sz2.toarray(), Sz @ Sz, atol=1e-12)


def test_observables_all_up():
    psi = np.zeros(11, complex)
    psi[-1] = 1.0
    ob = observables(psi)
    assert ob.m == 1.0 and ob.dm2_literal == 1.0 and ob.dm2_fluct == 0.0
    np.testing.assert_allclose(ob.bloch, [0, 0, 1], atol=1e-15)


def test_lowest_state_via_sparse_solver():
    N = 200
    ops = collective_operators(N)
    w, v = eigsh(-2.0 * ops.Sx, k=1, which="SA")
    assert abs(np.vdot(v[:, 0], coherent_plus_x_state(N))) == pytest.approx(1.0, abs=1e-8)


def test_dimension_overflow():
    with pytest.raises(DimensionOverflow):
        coherent_plus_x_state(10_001)
    with pytest.raises(DimensionOverflow):
        evolve_quantum(linear_drive(ModelParams(N=20_000)), ModelParams(N=20_000))
    with pytest.raises(DimensionOverflow):
        evolve_full_hilbert(CouplingMatrix.infinite_range(13, 1.0, 0.1), linear_drive(ModelParams()))


# --- coefficients ----------------------------------------------------------


def test_coefficient_map_ising():
    p = ModelParams(J=1.5, h=0.2, N=50, T=1.0)
    a, b, cx, cy = hamiltonian_coefficients(constant_drive(1.0, gx=0.7, gy=0.3, f=0.4), p, 0.5)
    assert a == pytest.approx(-2 * 1.5 * 0.4 / 50)
    assert b == pytest.approx(-2 * 0.4 * 0.2)
    assert (cx, cy) == pytest.approx((-1.4, -0.6))


def test_coefficient_map_rotating_drops_h():
    p = ModelParams(J=1.0, h=0.2, N=10, T=1.0)
    _, b, _, _ = hamiltonian_coefficients(constant_drive(1.0, f=1.0, kind="rotating"), p, 0.5)
    assert b == 0.0


def test_perturbation_adds_twice_field():
    p = ModelParams(N=10, T=1.0)
    drive = constant_drive(1.0, f=0.5)
    base = np.array(hamiltonian_coefficients(drive, p, 0.3))
    pert = np.array(hamiltonian_coefficients(drive, p, 0.3, perturbation=lambda t: np.array([0.1, 0.2, 0.3])))
    np.testing.assert_allclose(pert - base, [0.0, 0.6, 0.2, 0.4], atol=1e-15)


# --- dynamics --------------------------------------------------------------


def test_stationary_under_constant_transverse_field():
    run = evolve_quantum(constant_drive(3.0), ModelParams(N=300, T=3.0), samples=31)
    np.testing.assert_allclose(run.m, 0.0, atol=1e-10)
    np.testing.assert_allclose(run.bloch[:, 0], 1.0, atol=1e-10)
    assert run.t[-1] == pytest.approx(3.0)


def test_precession_matches_closed_form():
    # H = Sz from the +x state: the Bloch vector precesses as (cos t, sin t, 0)
    def evaluate(t):
        one = np.ones_like(t)
        return DriveSample(t, 0 * one, 0 * one, 0 * one, one)

    run = evolve_quantum(DriveSchedule("single", 4.0, evaluate), ModelParams(N=1, T=4.0), samples=41)
    np.testing.assert_allclose(run.bloch[:, 0], np.cos(run.t), atol=1e-9)
    np.testing.assert_allclose(run.bloch[:, 1], np.sin(run.t), atol=1e-9)


@pytest.mark.parametrize("N", [1, 2, 3, 6, 10])
@pytest.mark.parametrize("schedule", ["ising1", "rotating", "linear"])
def test_sector_equals_full_hilbert(N, schedule):
    h = 0.0 if schedule == "rotating" else 0.1
    p = ModelParams(T=5.0, N=N, h=h)
    drive, _ = build_drive(schedule, p)
    rq = evolve_quantum(drive, p, steps=4000, samples=41)
    rf = evolve_full_hilbert(CouplingMatrix.infinite_range(N, p.J, h), drive, steps=4000, samples=41)
    np.testing.assert_allclose(rq.m, rf.m, atol=1e-8)
    if N <= 6:
        V = symmetric_embedding(N)
        assert abs(np.vdot(V @ rq.state, rf.state)) == pytest.approx(1.0, abs=1e-8)


def test_sector_equals_full_hilbert_with_perturbation():
    N = 6
    p = ModelParams(T=5.0, N=N)
    drive, _ = build_drive("ising1", p)

    def pert(t):
        t = np.asarray(t, float)
        return np.stack([0.3 * np.sin(t), 0.2 * np.cos(t), 0.1 * t / 5], axis=-1)

    rq = evolve_quantum(drive, p, steps=4000, samples=41, perturbation=pert)
    rf = evolve_full_hilbert(CouplingMatrix.infinite_range(N, p.J, p.h), drive, steps=4000,
                             samples=41, perturbation=pert)
    np.testing.assert_allclose(rq.m, rf.m, atol=1e-8)


def test_full_hilbert_zero_drive_is_constant():
    def evaluate(t):
        z = np.zeros_like(t)
        return DriveSample(t, z, z, z, z)

    run = evolve_full_hilbert(CouplingMatrix.infinite_range(4, 1.0, 0.1),
                              DriveSchedule("ising", 2.0, evaluate), samples=11)
    np.testing.assert_allclose(run.state, np.full(16, 0.25), atol=1e-14)
    np.testing.assert_allclose(run.m, 0.0, atol=1e-14)


def test_norm_drift_raised_with_too_few_steps():
    p = ModelParams(N=2000, T=10.0)
    drive, _ = build_drive("ising1", p)
    with pytest.raises(NormDrift) as exc:
        evolve_quantum(drive, p, steps=200, samples=11, shift=False)
    assert not exc.value.drift <= 1e-6


def test_rk4_fourth_order():
    p = ModelParams(N=4, T=10.0)
    drive, _ = build_drive("ising1", p)
    ref = evolve_quantum(drive, p, steps=16000, samples=11).m[-1]
    e1 = abs(evolve_quantum(drive, p, steps=1000, samples=11).m[-1] - ref)
    e2 = abs(evolve_quantum(drive, p, steps=2000, samples=11).m[-1] - ref)
    assert 12.0 < e1 / e2 < 20.0


def test_auto_steps_reported_multiple_of_samples():
    p = ModelParams(N=100, T=5.0)
    drive, _ = build_drive("ising1", p)
    run = evolve_quantum(drive, p, samples=51)
    assert run.steps % 50 == 0
    assert np.max(np.abs(run.norm - 1)) < 1e-7


def test_mean_field_convergence_in_n():
    devs = []
    for N in (100, 400, 1600):
        p = ModelParams(N=N, T=10.0)
        drive, angles = build_drive("ising1", p)
        run = evolve_quantum(drive, p, samples=101)
        devs.append(np.max(np.abs(run.m - np.cos(target_theta(angles, run.t, p.T)))))
    assert devs[0] > devs[1] > devs[2]
    assert devs[2] < 0.01


@pytest.mark.parametrize("variant,T", [("single1", 1.0), ("single1", 5.0), ("single1", 20.0),
                                       ("single2", 1.0), ("single2", 5.0)])
def test_single_spin_reaches_ground_state(variant, T):
    p = ModelParams(T=T, N=1)
    drive, _ = build_drive(variant, p)
    run = evolve_quantum(drive, p, psi0=MINUS_X)
    fidelity = abs(run.state[0]) ** 2
    assert fidelity >= 1 - 1e-6
    assert run.m[-1] == pytest.approx(-1.0, abs=2e-6)


def test_single2_pole_at_long_horizon():
    from sta_anneal import SingularDrive

    with pytest.raises(SingularDrive):
        build_drive("single2", ModelParams(T=20.0, N=1))


@settings(max_examples=15, deadline=None)
@given(st.floats(0.5, 3.0), st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
def test_two_level_against_matrix_exponential(T, gx, hz):
    from scipy.linalg import expm

    def evaluate(t):
        one = np.ones_like(t)
        return DriveSample(t, gx * one, 0 * one, 0 * one, hz * one)

    run = evolve_quantum(DriveSchedule("single", T, evaluate), ModelParams(N=1, T=T), steps=2000,
                         samples=2)
    sx = np.array([[0, 1], [1, 0]]) / 2
    sz = np.diag([-0.5, 0.5])
    exact = expm(-1j * T * (gx * sx + hz * sz)) @ coherent_plus_x_state(1)
    assert abs(np.vdot(exact, run.state)) == pytest.approx(1.0, abs=1e-9)
