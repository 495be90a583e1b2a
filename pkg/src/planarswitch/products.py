"""Random matrix products driven by the switched flow.

Sampling the flow only at switching times gives ``Z_k = U_k ... U_1 X_0`` with
``U_l = exp(S_l A_{i_l})`` and ``S_l ~ Exp(beta * lambda_{i_l})``.  Two laws for
the index sequence are supported:

``alternating``
    ``i_l`` flips every step starting from ``i_1 = 0``; this is exactly the
    embedded chain of the switched flow.  The per-step exponent tends to
    ``chi(beta) / (2 lam (1 - lam) beta)``.
``iid-halfsum``
    ``i_l`` uniform in ``{0, 1}`` independently.  Runs of equal indices merge
    into one exponential holding time at half the rate, so the exponent tends
    to ``chi(beta / 2) / (2 lam (1 - lam) beta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .pdmp import SwitchedSystem, TrajectoryState, replica_generators, replicate_ci, step
from .planar import eigen2, expm2

VARIANTS = ("alternating", "iid-halfsum")
_BLOCK = 1 << 18


@dataclass(frozen=True)
class ProductEstimate:
    value: float
    std_error: float
    steps: int
    seed: int
    variant: str
    # same exponent read off the operator norm of the full product
    matrix_value: float = float("nan")
    replicas: int = 1
    per_replica: tuple = field(default=(), repr=False)
    trace_steps: Optional[np.ndarray] = field(default=None, repr=False)
    trace_values: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "std_error": self.std_error,
            "steps": self.steps,
            "seed": self.seed,
            "variant": self.variant,
            "matrix_value": self.matrix_value,
            "replicas": self.replicas,
        }


def per_step_scale(sys: SwitchedSystem) -> float:
    """Mean holding time per step, ``1 / (2 lam (1 - lam) beta)``."""
    return 1.0 / (2.0 * sys.lam * (1.0 - sys.lam) * sys.beta)


def sample_factor(sys: SwitchedSystem, i: int, rng: np.random.Generator) -> np.ndarray:
    """``exp(S A_i)`` with ``S ~ Exp(beta * lambda_i)``."""
    s = rng.standard_exponential() / sys.rates[i]
    return expm2(sys.matrix(i), s)


def spectral_radius(M) -> float:
    return max(abs(z) for z in eigen2(M).eigenvalues)


def _index_block(variant, rng, start, n):
    if variant == "alternating":
        return ((start + np.arange(n)) % 2).astype(np.int64)
    return rng.integers(0, 2, size=n).astype(np.int64)


def _walk(sys, variant, k, rng, theta0, renorm_every, trace_every):
    mats, rates = sys.mats, sys.rates
    carry = np.array([math.cos(theta0), math.sin(theta0), 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0])
    ntrace = k // trace_every if trace_every > 0 else 0
    trace = np.empty(max(ntrace, 1))
    written = 0
    done = 0
    while done < k:
        n = min(_BLOCK, k - done)
        idx = _index_block(variant, rng, done, n)
        holds = rng.standard_exponential(n) / rates[idx]
        written += _kernels.product_walk(mats, carry, idx, holds, renorm_every,
                                         trace[written:], trace_every)
        done += n
    logv, logp = _kernels.carried_logs(carry)
    return logv / k, logp / k, trace[:written]


def product_lyapunov(
    sys: SwitchedSystem,
    variant: str = "alternating",
    k: int = 100_000,
    replicas: int = 16,
    seed: int = 0,
    theta0: float = 0.0,
    renorm_every: int = 1,
    trace_every: int = 0,
) -> ProductEstimate:
    """Per-step top Lyapunov exponent of the product, averaged over replicas.

    Each replica carries a unit vector through ``k`` factors (renormalised
    every ``renorm_every`` steps) and reports ``log |Z_k| / k``.  The full
    matrix product is carried alongside with a norm correction every 1000
    steps; its exponent is returned as ``matrix_value``.  With
    ``trace_every > 0`` the running estimate of replica 0 is recorded every
    that many steps.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if int(k) < 1:
        raise ValueError("k must be at least 1")
    if int(replicas) < 1:
        raise ValueError("replicas must be at least 1")
    if int(renorm_every) < 1:
        raise ValueError("renorm_every must be at least 1")
    k = int(k)
    vals, mvals = [], []
    trace = None
    for r, rng in enumerate(replica_generators(seed, replicas)):
        v, m, tr = _walk(sys, variant, k, rng, theta0, int(renorm_every),
                         int(trace_every) if r == 0 else 0)
        vals.append(v)
        mvals.append(m)
        if r == 0:
            trace = tr
    est = replicate_ci(vals, seed=seed)
    steps = None
    if trace_every > 0:
        steps = trace_every * np.arange(1, trace.size + 1)
    return ProductEstimate(
        value=est.value,
        std_error=est.std_error,
        steps=k,
        seed=seed,
        variant=variant,
        matrix_value=float(np.mean(mvals)),
        replicas=int(replicas),
        per_replica=est.per_replica,
        trace_steps=steps,
        trace_values=trace if trace_every > 0 else None,
    )


@dataclass(frozen=True)
class EmbeddedChainReport:
    k: int
    max_discrepancy: float
    final_log_norm: float
    jump_time: float
    mean_holding: float
    expected_mean_holding: float
    holding_std_error: float

    @property
    def passed(self) -> bool:
        return self.max_discrepancy <= 1e-9

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "max_discrepancy": self.max_discrepancy,
            "final_log_norm": self.final_log_norm,
            "T_k": self.jump_time,
            "T_k_over_k": self.mean_holding,
            "expected_T_k_over_k": self.expected_mean_holding,
            "holding_std_error": self.holding_std_error,
            "passed": self.passed,
        }


def embedded_chain_check(sys: SwitchedSystem, k: int = 1000, seed: int = 0,
                         theta0: float = 0.0) -> EmbeddedChainReport:
    """Compare the flow sampled at jump times with the explicit matrix product.

    One path of the switched flow is stepped jump by jump from ``e_theta0`` in
    state 0.  The same holding times build ``P_l = U_l P_{l-1}`` as explicit
    2x2 matrices (rescaled, with the scale kept in log form); after each jump
    ``log |P_l e_theta0|`` is compared with the path's ``log ||X_{T_l}||``.
    """
    if int(k) < 1:
        raise ValueError("k must be at least 1")
    k = int(k)
    rng = replica_generators(seed, 1)[0]
    holds = rng.standard_exponential(k) / sys.rates[np.arange(k) % 2]
    x0 = np.array([math.cos(theta0), math.sin(theta0)])
    st = TrajectoryState(0.0, theta0 % (2 * math.pi), 0, 0.0)
    P = np.eye(2)
    log_scale = 0.0
    worst = 0.0
    for l in range(k):
        i = st.i
        st = step(st, sys, hold=float(holds[l]))
        P = expm2(sys.matrix(i), float(holds[l])) @ P
        s = float(np.abs(P).max())
        P /= s
        log_scale += math.log(s)
        z = P @ x0
        worst = max(worst, abs(log_scale + math.log(math.hypot(z[0], z[1])) - st.log_r))
    scale = per_step_scale(sys)
    # per-step variance of a hold alternating between the two exponential laws
    var = 0.5 * sum(1.0 / r ** 2 for r in sys.rates)
    return EmbeddedChainReport(
        k=k,
        max_discrepancy=worst,
        final_log_norm=st.log_r,
        jump_time=st.t,
        mean_holding=st.t / k,
        expected_mean_holding=scale,
        holding_std_error=math.sqrt(var / k),
    )
