import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sta_anneal import ModelParams, PerturbationSpec, mattis_run, perturbation_field, stability_run
from sta_anneal.experiments import (build_drive, random_signs, stable_directions, sweep_T,
                                    unstable_direction)
from sta_anneal.quantum import evolve_quantum


def ising1(T=10.0, **kw):
    p = ModelParams(T=T, **kw)
    return p, *build_drive("ising1", p)


# --- perturbation geometry -------------------------------------------------


@settings(max_examples=200)
@given(st.floats(0.05, math.pi - 0.05), st.floats(0.05, 2 * math.pi - 0.05))
def test_unstable_direction_is_normalized_cross_product(theta, phi):
    n, n0 = stable_directions(theta, phi)
    c = np.cross(n, n0)
    np.testing.assert_allclose(unstable_direction(theta, phi), c / np.linalg.norm(c), atol=1e-9)


@settings(max_examples=100)
@given(st.floats(0.0, math.pi / 2))
def test_directions_orthonormal_in_phi_zero_plane(theta):
    _, n0 = stable_directions(theta, 0.0)
    npert = unstable_direction(theta, 0.0)
    assert np.linalg.norm(npert) == pytest.approx(1.0)
    assert np.dot(n0, npert) == pytest.approx(0.0, abs=1e-12)
    assert npert[1] == 0.0


def test_perturbation_field_examples():
    _, _, angles = ising1(T=10.0)
    spec = PerturbationSpec(4.0, 0.0)
    np.testing.assert_allclose(perturbation_field(angles, spec, 0.0), 0.0, atol=1e-15)
    # sin(10 pi t / T) = 1 at t = T / 20; theta there is close to pi/2
    h = perturbation_field(angles, spec, 0.5)
    th = angles.theta(0.5)
    np.testing.assert_allclose(h, 4.0 * np.array([np.sin(th), 0.0, np.cos(th)]), atol=1e-12)
    hp = perturbation_field(angles, PerturbationSpec(0.0, 4.0), 0.5)
    np.testing.assert_allclose(hp, 4.0 * unstable_direction(th, 0.0), atol=1e-12)
    assert perturbation_field(angles, spec, np.linspace(0, 10, 7)).shape == (7, 3)


def test_spec_validation():
    with pytest.raises(ValueError):
        PerturbationSpec(-1.0, 0.0)
    with pytest.raises(ValueError):
        PerturbationSpec(0.0, math.inf)
    assert PerturbationSpec().is_zero and not PerturbationSpec(0.0, 1e-9).is_zero


# --- stability -------------------------------------------------------------


def test_zero_perturbation_is_the_bare_run():
    p, _, _ = ising1(T=5.0, N=50)
    res = stability_run(p, "ising1", PerturbationSpec(), samples=51)
    assert res.max_deviation == 0.0
    bare = evolve_quantum(build_drive("ising1", p)[0], p, samples=51)
    np.testing.assert_array_equal(res.m, bare.m)


def test_deviation_linear_in_small_amplitude():
    p, _, _ = ising1(T=5.0, N=50)
    bare = evolve_quantum(build_drive("ising1", p)[0], p, samples=51)
    d = [stability_run(p, "ising1", PerturbationSpec(0.0, a), samples=51, unperturbed=bare).max_deviation
         for a in (1e-2, 1e-3)]
    assert d[0] / d[1] == pytest.approx(10.0, rel=0.05)


def test_stability_ordering_small_n():
    p, _, _ = ising1(T=10.0, N=400)
    bare = evolve_quantum(build_drive("ising1", p)[0], p, samples=101)
    stable = stability_run(p, "ising1", PerturbationSpec(4.0, 0.0), samples=101, unperturbed=bare)
    unstable = stability_run(p, "ising1", PerturbationSpec(0.0, 4.0), samples=101, unperturbed=bare)
    assert stable.final_deviation < 0.05 < 1.0 < unstable.final_deviation


def test_linear_drive_rejected_for_stability():
    with pytest.raises(ValueError):
        stability_run(ModelParams(N=10), "linear", PerturbationSpec(1.0, 0.0))


def test_single_spin_stability_uses_one_spin():
    res = stability_run(ModelParams(T=5.0, N=4000), "single1", PerturbationSpec(0.5, 0.0), samples=21)
    assert np.all(np.isfinite(res.m)) and res.m.shape == (21,)


# --- sweeps ----------------------------------------------------------------


def test_linear_without_ising_term_stays_transverse():
    p = ModelParams(J=0.0, h=0.0, T=5.0, N=30)
    res = sweep_T("linear", p, [5.0])
    # f multiplies a vanishing Ising part, so only the x field acts
    assert abs(res.rows[0].m_final) < 1e-10


def test_linear_needs_long_horizon():
    res = sweep_T("linear", ModelParams(N=200), [1.0, 100.0])
    short, long_ = res.rows
    assert short.m_final < 0.5 < 0.9 < long_.m_final


def test_sweep_threads_deterministic(monkeypatch):
    p = ModelParams(N=100)
    serial = sweep_T("ising1", p, [3.0, 5.0, 8.0], samples=41, workers=1)
    monkeypatch.setenv("STA_THREADS", "3")
    threaded = sweep_T("ising1", p, [3.0, 5.0, 8.0], samples=41)
    for a, b in zip(serial.rows, threaded.rows):
        np.testing.assert_array_equal(a.m, b.m)
        assert a.steps == b.steps
    assert serial.pairwise_max_dm() == threaded.pairwise_max_dm()


def test_sweep_t_independence_small_n():
    res = sweep_T("ising1", ModelParams(N=400), [5.0, 10.0], samples=101)
    assert res.pairwise_max_dm() < 0.03  # finite-size gap, shrinks as 1/N
    assert all(r.m_final > 0.95 for r in res.rows)


def test_bad_thread_count(monkeypatch):
    monkeypatch.setenv("STA_THREADS", "many")
    with pytest.raises(ValueError):
        sweep_T("ising1", ModelParams(N=10), [2.0, 3.0])


def test_unknown_schedule():
    with pytest.raises(ValueError):
        build_drive("quadratic", ModelParams())


# --- Mattis ----------------------------------------------------------------


@pytest.mark.parametrize("seed", [0, 7])
def test_mattis_gauge(seed):
    res = mattis_run(ModelParams(T=5.0, N=6), seed=seed, samples=41)
    assert res.gauge_error < 1e-10
    assert res.design_error < 1e-10
    np.testing.assert_array_equal(res.xi, random_signs(6, seed))


def test_mattis_explicit_signs_and_rejections():
    res = mattis_run(ModelParams(T=3.0), xi=[1, -1, -1, 1], samples=11)
    assert res.sz.shape == (11, 4)
    np.testing.assert_allclose(res.sz[-1], res.xi * res.m_ferro[-1], atol=1e-10)
    with pytest.raises(ValueError):
        mattis_run(ModelParams(T=3.0))
    with pytest.raises(ValueError):
        mattis_run(ModelParams(T=3.0, h=0.0), xi=[1, -1], schedule="rotating")
