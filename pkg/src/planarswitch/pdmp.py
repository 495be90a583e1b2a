"""Event-driven simulation of the switched flow ``X' = A_{I_t} X``.

``I_t`` jumps from state ``i`` at rate ``beta * lambda_i`` with
``lambda_0 = lam`` and ``lambda_1 = 1 - lam``.  Between jumps the flow is
applied exactly through the closed-form exponential, and the radius is only
ever tracked as ``log ||X_t||``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np

from . import _kernels
from .angular import NoHyperbolicSplit, averaged_profile
from .planar import as_mat2, expm2, require_hurwitz

_CHUNK = 1 << 16


@dataclass(frozen=True)
class SwitchedSystem:
    A0: np.ndarray
    A1: np.ndarray
    lam: float
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "A0", require_hurwitz(self.A0, "A0"))
        object.__setattr__(self, "A1", require_hurwitz(self.A1, "A1"))
        if not 0.0 < self.lam < 1.0:
            raise ValueError(f"lambda must lie in (0, 1), got {self.lam}")
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be positive, got {self.beta}")

    @property
    def weights(self):
        """``(lambda_0, lambda_1)``."""
        return (self.lam, 1.0 - self.lam)

    @property
    def rates(self) -> np.ndarray:
        return self.beta * np.array(self.weights)

    @property
    def mats(self) -> np.ndarray:
        return np.stack([self.A0, self.A1])

    def matrix(self, i: int) -> np.ndarray:
        return self.A0 if i == 0 else self.A1

    def with_beta(self, beta: float) -> "SwitchedSystem":
        return replace(self, beta=beta)

    def default_theta0(self) -> float:
        try:
            return averaged_profile(self.A0, self.A1, self.lam).theta_plus + 0.1
        except NoHyperbolicSplit:
            return 0.1


@dataclass(frozen=True)
class TrajectoryState:
    log_r: float
    theta: float
    i: int
    t: float


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    std_error: float
    horizon: float
    replicas: int
    seed: int
    per_replica: tuple = field(default=(), repr=False)
    single_replica: bool = False
    frac_state1: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "std_error": self.std_error,
            "horizon": self.horizon,
            "replicas": self.replicas,
            "seed": self.seed,
            "single_replica": self.single_replica,
            "frac_state1": self.frac_state1,
        }


def replica_generators(seed: int, replicas: int) -> List[np.random.Generator]:
    """Independent streams; stream ``r`` depends only on ``(seed, r)``."""
    children = np.random.SeedSequence(int(seed)).spawn(int(replicas))
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def flow_from_angle(A, theta: float, t: float):
    """``(log ||exp(tA) e_theta||, angle of exp(tA) e_theta in [0, 2pi))``."""
    y = expm2(A, t) @ np.array([math.cos(theta), math.sin(theta)])
    r = math.hypot(y[0], y[1])
    return math.log(r), math.atan2(y[1], y[0]) % (2 * math.pi)


def step(state: TrajectoryState, sys: SwitchedSystem, rng=None, hold: Optional[float] = None) -> TrajectoryState:
    """One holding interval followed by a switch.

    The holding time is ``Exp(beta * lambda_i)``, drawn from ``rng`` unless
    given explicitly.
    """
    if hold is None:
        hold = rng.exponential() / sys.rates[state.i]
    dl, theta = flow_from_angle(sys.matrix(state.i), state.theta, hold)
    return TrajectoryState(state.log_r + dl, theta, 1 - state.i, state.t + hold)


def trajectory(sys: SwitchedSystem, theta0: float, i0: int, horizon: float, seed: int = 0):
    """Jump-time skeleton of one path up to ``horizon``.

    Returns ``(states, holds)``: the state right after each switch (and the
    final truncated state) plus the holding times actually used.
    """
    rng = replica_generators(seed, 1)[0]
    st = TrajectoryState(0.0, theta0 % (2 * math.pi), i0, 0.0)
    states, holds = [st], []
    while st.t < horizon:
        h = rng.exponential() / sys.rates[st.i]
        if st.t + h >= horizon:
            h = horizon - st.t
            dl, th = flow_from_angle(sys.matrix(st.i), st.theta, h)
            st = TrajectoryState(st.log_r + dl, th, st.i, horizon)
        else:
            st = step(st, sys, hold=h)
        states.append(st)
        holds.append(h)
    return states, holds


def replicate_ci(values: Sequence[float], horizon: float = float("nan"), seed: int = 0) -> LyapunovEstimate:
    """Mean and standard error across independent replicas.

    With fewer than two replicas the standard error is reported as zero and
    ``single_replica`` is set.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("no replica values")
    if v.size < 2:
        return LyapunovEstimate(float(v[0]), 0.0, horizon, 1, seed, tuple(v), True)
    se = float(np.std(v, ddof=1) / math.sqrt(v.size))
    return LyapunovEstimate(float(v.mean()), se, horizon, int(v.size), seed, tuple(v))


def _check_run_args(horizon, replicas):
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    if replicas < 1:
        raise ValueError("replicas must be at least 1")


def _chunk_size(sys, horizon):
    expected = horizon * float(sys.rates.max()) + 64
    return int(min(_CHUNK, expected))


def simulate_chi(
    sys: SwitchedSystem,
    theta0: Optional[float] = None,
    i0: int = 0,
    horizon: float = 1e5,
    replicas: int = 32,
    seed: int = 0,
    burn_in: float = 100.0,
) -> LyapunovEstimate:
    """Monte Carlo estimate of ``lim log ||X_t|| / t``.

    Each replica runs its own exact trajectory to ``horizon`` and contributes
    ``(log ||X_horizon|| - log ||X_b||) / (horizon - b)`` where the burn-in
    ``b = min(burn_in, horizon / 10)`` discards the start-up transient.
    """
    _check_run_args(horizon, replicas)
    if burn_in < 0:
        raise ValueError("burn_in must be non-negative")
    if theta0 is None:
        theta0 = sys.default_theta0()
    b = min(float(burn_in), 0.1 * horizon)
    mats, rates = sys.mats, sys.rates
    chunk = _chunk_size(sys, horizon)
    vals, fracs = [], []
    for rng in replica_generators(seed, replicas):
        state = np.array([0.0, theta0 % (2 * math.pi), float(i0), 0.0, 0.0, 0.0])
        log_b = 0.0
        for stop in ((b, horizon) if b > 0 else (horizon,)):
            done = False
            # the holding time cut at the burn-in restarts afresh, which is exact by memorylessness
            while not done:
                draws = rng.standard_exponential(chunk)
                _, done = _kernels.run_until(mats, rates, state, draws, float(stop))
            if stop == b:
                log_b = state[0]
        vals.append((state[0] - log_b) / (horizon - b))
        fracs.append(state[4] / horizon)
    est = replicate_ci(vals, horizon, seed)
    return replace(est, frac_state1=float(np.mean(fracs)))


@dataclass(frozen=True)
class OccupationHistogram:
    """Fraction of sampled time spent in each (angle bin, state) cell.

    ``weights[i, k]`` covers ``theta mod pi`` in ``[edges[k], edges[k+1])``
    while in state ``i``; the array sums to one.
    """

    edges: np.ndarray
    weights: np.ndarray
    samples: int


def occupation_histogram(
    sys: SwitchedSystem,
    theta0: Optional[float] = None,
    i0: int = 0,
    horizon: float = 1e5,
    bins: int = 64,
    dt_sample: float = 0.05,
    seed: int = 0,
) -> OccupationHistogram:
    """Empirical angular occupation measure folded onto ``[0, pi)``.

    The path is sampled every ``dt_sample`` time units using the exact flow
    inside each holding interval.
    """
    if bins < 2:
        raise ValueError("bins must be >= 2")
    if not dt_sample > 0:
        raise ValueError("dt_sample must be positive")
    _check_run_args(horizon, 1)
    if theta0 is None:
        theta0 = sys.default_theta0()
    rng = replica_generators(seed, 1)[0]
    hist = np.zeros((2, bins))
    state = np.array([0.0, theta0 % (2 * math.pi), float(i0), 0.0, 0.0, 0.0, 0.0])
    chunk = _chunk_size(sys, horizon)
    done = False
    while not done:
        draws = rng.standard_exponential(chunk)
        _, done = _kernels.occupy_until(sys.mats, sys.rates, state, draws, float(horizon),
                                        float(dt_sample), bins, hist)
    total = hist.sum()
    return OccupationHistogram(np.linspace(0.0, math.pi, bins + 1), hist / total, int(total))


def total_variation(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def system_from_matrices(A0, A1, lam: float, beta: float) -> SwitchedSystem:
    return SwitchedSystem(as_mat2(A0), as_mat2(A1), float(lam), float(beta))
