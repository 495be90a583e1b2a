"""Quadratic Lyapunov certificates for slow switching.

With ``V_i(x) = <x, M_i x>`` and ``A_i^T M_i + M_i A_i = -I`` each flow
satisfies ``d/dt V_i <= -2 rho V_i``.  Jumps out of state ``i`` (rate
``beta lambda_i``) can inflate ``V`` by at most the factor
``kappa_i = max_x V_{1-i}(x) / V_i(x)``, so the generator of the switched flow
obeys ``L V(x, i) <= (-2 rho + beta lambda_i (kappa_i - 1)) V(x, i)``.  Below
``beta_1 = rho / max_i [lambda_i (kappa_i - 1)]_+`` this is at most ``-rho V``,
``V(X_t, I_t) e^{rho t}`` is a supermartingale and the exponent is negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .planar import as_mat2, mat_to_list, require_hurwitz, solve_lyapunov


def _require_spd(M, name):
    M = as_mat2(M)
    if abs(M[0, 1] - M[1, 0]) > 1e-12 * max(1.0, float(np.abs(M).max())):
        raise ValueError(f"{name} is not symmetric")
    if not (M[0, 0] > 0 and M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0] > 0):
        raise ValueError(f"{name} is not positive definite")
    return M


def gen_eig_max(M, N) -> float:
    """Largest ``g`` with ``det(M - g N) = 0``, i.e. ``max_x <x,Mx> / <x,Nx>``."""
    M = _require_spd(M, "M")
    N = _require_spd(N, "N")
    # det(M - gN) = det(N) g^2 - c g + det(M)
    dn = N[0, 0] * N[1, 1] - N[0, 1] * N[1, 0]
    dm = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    c = M[0, 0] * N[1, 1] + M[1, 1] * N[0, 0] - 2.0 * M[0, 1] * N[0, 1]
    disc = max(c * c - 4.0 * dn * dm, 0.0)
    # larger root directly; both roots are positive so there is no cancellation
    return float((c + math.sqrt(disc)) / (2.0 * dn))


@dataclass(frozen=True)
class ContractionCertificate:
    M0: np.ndarray
    M1: np.ndarray
    rho: float
    kappa0: float
    kappa1: float
    beta1: float
    lam: float = 0.5

    @property
    def weights(self):
        return (self.lam, 1.0 - self.lam)

    @property
    def jump_penalty(self) -> float:
        """``max_i [lambda_i (kappa_i - 1)]_+``."""
        l0, l1 = self.weights
        return max(l0 * (self.kappa0 - 1.0), l1 * (self.kappa1 - 1.0), 0.0)

    def decay_bound(self, beta: float) -> float:
        """Certified rate ``rho - beta * jump_penalty`` (positive below ``beta1``)."""
        return self.rho - beta * self.jump_penalty

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "kappa0": self.kappa0,
            "kappa1": self.kappa1,
            "beta1": self.beta1 if math.isfinite(self.beta1) else "inf",
            "lambda": self.lam,
            "M0": mat_to_list(self.M0),
            "M1": mat_to_list(self.M1),
        }


def small_beta_certificate(A0, A1, lam: float) -> ContractionCertificate:
    A0 = require_hurwitz(A0, "A0")
    A1 = require_hurwitz(A1, "A1")
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")
    M0 = solve_lyapunov(A0)
    M1 = solve_lyapunov(A1)
    # symmetrise away round-off before the SPD checks
    M0 = 0.5 * (M0 + M0.T)
    M1 = 0.5 * (M1 + M1.T)
    rho = min(1.0 / (2.0 * float(np.linalg.eigvalsh(M)[-1])) for M in (M0, M1))
    k0 = gen_eig_max(M1, M0)
    k1 = gen_eig_max(M0, M1)
    cert = ContractionCertificate(M0, M1, rho, k0, k1, math.inf, lam)
    pen = cert.jump_penalty
    # penalties at round-off level mean the two norms coincide
    beta1 = math.inf if pen <= 1e-12 else rho / pen
    return ContractionCertificate(M0, M1, rho, k0, k1, beta1, lam)


def drift_ratios(cert: ContractionCertificate, A0, A1, lam: float, beta: float, thetas) -> np.ndarray:
    """``(L V)(x, i) / V(x, i)`` for unit vectors at ``thetas``; shape ``(2, n)``."""
    As = (as_mat2(A0), as_mat2(A1))
    Ms = (cert.M0, cert.M1)
    X = np.stack([np.cos(thetas), np.sin(thetas)])
    V = [np.sum(X * (M @ X), axis=0) for M in Ms]
    out = np.empty((2, X.shape[1]))
    for i, w in enumerate((lam, 1.0 - lam)):
        flow = 2.0 * np.sum((Ms[i] @ X) * (As[i] @ X), axis=0)
        out[i] = (flow + beta * w * (V[1 - i] - V[i])) / V[i]
    return out


def certificate_drift_check(cert: ContractionCertificate, A0, A1, lam: float, beta: float,
                            samples: int = 10_000) -> float:
    """Largest drift ratio over ``samples`` evenly spaced directions in ``[0, pi)``.

    The quadratic forms are even, so half a turn covers every direction.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if samples < 1:
        raise ValueError("samples must be at least 1")
    thetas = np.pi * np.arange(samples) / samples
    return float(drift_ratios(cert, A0, A1, lam, beta, thetas).max())
