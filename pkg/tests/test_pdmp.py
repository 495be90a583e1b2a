import math

import numpy as np
import pytest
from scipy.integrate import quad

from planarswitch import _kernels, exact, pdmp
from planarswitch.angular import radial_rate
from planarswitch.planar import NotHurwitzError

ROT = exact.rotations(1.0, 3.0)
JOR = exact.jordan(2.0)


def test_system_validation():
    A0, A1 = ROT.matrices()
    with pytest.raises(NotHurwitzError, match="A0 not Hurwitz"):
        pdmp.SwitchedSystem(np.diag([1.0, -1.0]), A1, 0.5, 1.0)
    with pytest.raises(ValueError):
        pdmp.SwitchedSystem(A0, A1, 1.0, 1.0)
    with pytest.raises(ValueError):
        pdmp.SwitchedSystem(A0, A1, 0.5, 0.0)
    sys_ = pdmp.system_from_matrices(A0.ravel().tolist(), A1, 0.25, 2.0)
    assert np.allclose(sys_.rates, [0.5, 1.5])


def test_kernel_matches_python_steps():
    sys_ = ROT.system(3.0)
    rng = np.random.default_rng(0)
    draws = rng.standard_exponential(500)
    state = np.array([0.0, 0.4, 0.0, 0.0, 0.0, 0.0])
    used, done = _kernels.run_until(sys_.mats, sys_.rates, state, draws, 1e9)
    assert used == 500 and not done
    st = pdmp.TrajectoryState(0.0, 0.4, 0, 0.0)
    for d in draws:
        st = pdmp.step(st, sys_, hold=d / sys_.rates[st.i])
    assert state[0] == pytest.approx(st.log_r, rel=1e-12, abs=1e-10)
    assert state[3] == pytest.approx(st.t, rel=1e-12)
    assert abs((state[1] - st.theta + math.pi) % (2 * math.pi) - math.pi) < 1e-9
    assert int(state[2]) == st.i and state[5] == 500


def test_horizon_is_cut_exactly():
    sys_ = JOR.system(1.0)
    state = np.array([0.0, 0.3, 0.0, 0.0, 0.0, 0.0])
    _, done = _kernels.run_until(sys_.mats, sys_.rates, state, np.full(10, 100.0), 5.0)
    assert done and state[3] == 5.0


def test_log_radius_is_the_integral_of_the_radial_rate():
    sys_ = ROT.system(2.0)
    states, holds = pdmp.trajectory(sys_, 0.2, 0, horizon=1000.0, seed=4)
    total = 0.0
    for st, h in zip(states[:-1], holds):
        A = sys_.matrix(st.i)
        total += quad(lambda s: radial_rate(A, pdmp.flow_from_angle(A, st.theta, s)[1]), 0.0, h,
                      epsabs=1e-12, epsrel=1e-12, limit=200)[0]
    assert states[-1].t == pytest.approx(1000.0)
    assert total == pytest.approx(states[-1].log_r, rel=1e-6)


def test_minus_identity_gives_exactly_minus_one():
    sys_ = pdmp.SwitchedSystem(-np.eye(2), -np.eye(2), 0.3, 5.0)
    est = pdmp.simulate_chi(sys_, theta0=0.0, horizon=100.0, replicas=4)
    assert est.value == pytest.approx(-1.0, abs=1e-12)
    assert est.std_error < 1e-12


def test_reproducible_and_seed_sensitive():
    sys_ = ROT.system(2.0)
    a = pdmp.simulate_chi(sys_, horizon=2000, replicas=4, seed=7)
    b = pdmp.simulate_chi(sys_, horizon=2000, replicas=4, seed=7)
    c = pdmp.simulate_chi(sys_, horizon=2000, replicas=4, seed=8)
    assert a.per_replica == b.per_replica
    assert a.per_replica != c.per_replica


def test_replica_streams_do_not_depend_on_replica_count():
    sys_ = ROT.system(2.0)
    a = pdmp.simulate_chi(sys_, horizon=1000, replicas=3, seed=1)
    b = pdmp.simulate_chi(sys_, horizon=1000, replicas=6, seed=1)
    assert b.per_replica[:3] == a.per_replica


def test_single_replica_flagged():
    est = pdmp.simulate_chi(ROT.system(1.0), horizon=100, replicas=1)
    assert est.single_replica and est.std_error == 0.0
    with pytest.raises(ValueError):
        pdmp.simulate_chi(ROT.system(1.0), horizon=0)
    with pytest.raises(ValueError):
        pdmp.replicate_ci([])


def test_time_in_state_one_matches_weights():
    A0, A1 = ROT.matrices()
    sys_ = pdmp.SwitchedSystem(A0, A1, 0.25, 4.0)
    est = pdmp.simulate_chi(sys_, horizon=2e4, replicas=8)
    # state 1 is left at rate beta * 0.75, so it holds a quarter of the time
    assert est.frac_state1 == pytest.approx(0.25, abs=0.01)


def test_standard_error_scales_with_replica_count():
    sys_ = ROT.system(2.0)
    r16 = pdmp.simulate_chi(sys_, horizon=1000, replicas=16, seed=5)
    r64 = pdmp.simulate_chi(sys_, horizon=1000, replicas=64, seed=5)
    assert r64.std_error / r16.std_error == pytest.approx(0.5, rel=0.3)


def test_burn_in_is_capped_and_validated():
    sys_ = pdmp.SwitchedSystem(-np.eye(2), -np.eye(2), 0.5, 1.0)
    # burn-in capped at a tenth of the horizon, the radial rate is -1 throughout
    assert pdmp.simulate_chi(sys_, theta0=0.0, horizon=10.0, replicas=2, burn_in=50.0).value == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        pdmp.simulate_chi(sys_, horizon=10.0, burn_in=-1.0)


def test_standard_error_shrinks_with_horizon():
    sys_ = ROT.system(2.0)
    short = pdmp.simulate_chi(sys_, horizon=500, replicas=32, seed=2)
    long = pdmp.simulate_chi(sys_, horizon=8000, replicas=32, seed=2)
    # sqrt(16) = 4 expected; allow for the noise in the spread estimates
    assert 2.0 < short.std_error / long.std_error < 8.0


def test_estimate_agrees_with_quadrature_at_moderate_horizon():
    beta = 2.0
    est = pdmp.simulate_chi(ROT.system(beta), horizon=2e4, replicas=16, seed=11)
    assert abs(est.value - exact.chi_exact(ROT, beta)) <= 4 * est.std_error


def test_occupation_histogram_is_a_distribution():
    h = pdmp.occupation_histogram(ROT.system(2.0), horizon=500, bins=16, seed=3)
    assert h.weights.shape == (2, 16)
    assert h.weights.sum() == pytest.approx(1.0)
    assert h.samples == pytest.approx(500 / 0.05, abs=2)


def test_jordan_path_stays_in_the_invariant_quarter():
    h = pdmp.occupation_histogram(JOR.system(2.0), theta0=math.pi / 4, horizon=2000, bins=8, seed=3)
    assert h.weights[:, 4:].sum() == 0.0


def test_total_variation():
    assert pdmp.total_variation([0.5, 0.5], [1.0, 0.0]) == 0.5
