"""Exact linear algebra for real 2x2 matrices.

Matrices are plain ``numpy`` arrays of shape ``(2, 2)``.  Everything here is
closed form: spectra from the trace/determinant discriminant, the matrix
exponential from the Cayley-Hamilton identity, Lyapunov equations as a 3x3
linear solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

TIE_TOL = 1e-12
_SERIES_CUTOFF = 1e-4


class NotHurwitzError(ValueError):
    """A matrix that should be Hurwitz is not."""


def as_mat2(x) -> np.ndarray:
    """Coerce nested lists, flat row-major 4-sequences or arrays to a 2x2 float array."""
    a = np.asarray(x, dtype=float)
    if a.shape == (4,):
        a = a.reshape(2, 2)
    if a.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def trace(A: np.ndarray) -> float:
    return float(A[0, 0] + A[1, 1])


def det(A: np.ndarray) -> float:
    return float(A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0])


def _half_disc(A: np.ndarray) -> float:
    # m^2 - det(A) with m = tr/2, written to avoid cancellation
    h = 0.5 * (A[0, 0] - A[1, 1])
    return float(h * h + A[0, 1] * A[1, 0])


@dataclass(frozen=True)
class Spectrum:
    """Eigen-structure of a real 2x2 matrix.

    ``eigenvalues`` holds two reals sorted in decreasing order, or the pair
    ``(re + i*im, re - i*im)`` with ``im > 0`` for the complex case.
    ``angles`` are the directions in ``[0, pi)`` of eigenvectors matching
    ``eigenvalues`` (one entry for a defective repeated eigenvalue, empty
    for a complex pair).
    """

    kind: str  # "real-distinct" | "real-repeated" | "complex-pair"
    eigenvalues: Tuple[complex, complex]
    angles: Tuple[float, ...]
    scalar: bool = False

    @property
    def real_parts(self) -> Tuple[float, float]:
        return (self.eigenvalues[0].real, self.eigenvalues[1].real)


def _line_angle(vx: float, vy: float) -> float:
    ang = math.atan2(vy, vx) % math.pi
    return 0.0 if ang >= math.pi else ang


def _eigvec_angle(A: np.ndarray, lam: float) -> float:
    # kernel of A - lam I from whichever row is better conditioned
    r1 = (A[0, 1], lam - A[0, 0])
    r2 = (lam - A[1, 1], A[1, 0])
    v = r1 if math.hypot(*r1) >= math.hypot(*r2) else r2
    return _line_angle(*v)


def eigen2(A) -> Spectrum:
    A = as_mat2(A)
    m = 0.5 * trace(A)
    disc = _half_disc(A)
    scale = max(1.0, float(np.max(np.abs(A)))) ** 2
    if abs(disc) <= TIE_TOL * scale:
        scalar = A[0, 1] == 0.0 and A[1, 0] == 0.0 and A[0, 0] == A[1, 1]
        if scalar:
            return Spectrum("real-repeated", (complex(m), complex(m)), (0.0, 0.5 * math.pi), True)
        return Spectrum("real-repeated", (complex(m), complex(m)), (_eigvec_angle(A, m),))
    if disc < 0:
        w = math.sqrt(-disc)
        return Spectrum("complex-pair", (complex(m, w), complex(m, -w)), ())
    s = math.sqrt(disc)
    # larger-magnitude root first, the other from the product to dodge cancellation
    big = m + math.copysign(s, m) if m != 0 else s
    small = det(A) / big
    hi, lo = (big, small) if big > small else (small, big)
    return Spectrum(
        "real-distinct",
        (complex(hi), complex(lo)),
        (_eigvec_angle(A, hi), _eigvec_angle(A, lo)),
    )


def is_hurwitz(A) -> bool:
    A = as_mat2(A)
    return trace(A) < 0 and det(A) > 0


def require_hurwitz(A, name: str = "A") -> np.ndarray:
    A = as_mat2(A)
    if not is_hurwitz(A):
        raise NotHurwitzError(f"{name} not Hurwitz")
    return A


def convex_combination(A0, A1, lam: float) -> np.ndarray:
    """Return ``(1 - lam) A0 + lam A1``."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lam must lie in [0, 1], got {lam}")
    return (1.0 - lam) * as_mat2(A0) + lam * as_mat2(A1)


@dataclass(frozen=True)
class CriterionReport:
    lhs: float
    rhs: float
    holds: bool
    boundary: bool
    lambda_window: Optional[Tuple[float, float]]

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "holds": self.holds,
            "boundary": self.boundary,
            "lambda_window": list(self.lambda_window) if self.lambda_window else None,
        }


def saddle_criterion(A0, A1) -> CriterionReport:
    """Check whether some convex combination of two Hurwitz matrices is a saddle.

    Uses ``det((1-l)A0 + l A1) = (1-l)^2 det A0 + l(1-l) L + l^2 det A1`` with
    ``L = Tr A0 Tr A1 - Tr(A0 A1)``.  With ``x = l / (1 - l)`` this is a
    quadratic in ``x`` with positive end coefficients, so a negative value is
    reachable exactly when ``L < -2 sqrt(det A0 det A1)``; the window of such
    ``l`` comes from the two positive roots in ``x``.
    """
    A0 = require_hurwitz(A0, "A0")
    A1 = require_hurwitz(A1, "A1")
    d0, d1 = det(A0), det(A1)
    lhs = trace(A0) * trace(A1) - trace(A0 @ A1)
    rhs = -2.0 * math.sqrt(d0 * d1)
    boundary = abs(lhs - rhs) <= TIE_TOL * max(1.0, abs(rhs))
    holds = (lhs < rhs) and not boundary
    window = None
    if holds:
        # roots of d1 x^2 + lhs x + d0 = 0, both positive since lhs < 0
        q = -0.5 * (lhs - math.sqrt(lhs * lhs - 4.0 * d0 * d1))
        x_hi, x_lo = q / d1, d0 / q
        window = (x_lo / (1.0 + x_lo), x_hi / (1.0 + x_hi))
    return CriterionReport(lhs, rhs, holds, boundary, window)


def lambda_window_scan(A0, A1, grid_size: int = 2049) -> Optional[Tuple[float, float]]:
    """Brute-force the set ``{l in (0,1) : det(A_l) < 0}``.

    Evaluates the determinant of the actual blended matrices on a uniform grid,
    bisects every sign change, and if no sign change shows up refines the grid
    minimum with a bounded scalar search so that windows narrower than the grid
    spacing are not missed.
    """
    from scipy.optimize import bisect, minimize_scalar

    A0 = require_hurwitz(A0, "A0")
    A1 = require_hurwitz(A1, "A1")
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")

    def f(lam):
        return det(convex_combination(A0, A1, lam))

    lams = np.linspace(0.0, 1.0, grid_size)
    blend = (1.0 - lams)[:, None, None] * A0 + lams[:, None, None] * A1
    vals = blend[:, 0, 0] * blend[:, 1, 1] - blend[:, 0, 1] * blend[:, 1, 0]
    neg = vals < 0
    if not neg.any():
        j = int(np.argmin(vals))
        lo, hi = lams[max(j - 1, 0)], lams[min(j + 1, grid_size - 1)]
        res = minimize_scalar(f, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-14})
        if res.fun >= 0:
            return None
        mid = float(res.x)
        return (bisect(f, lo, mid, xtol=1e-15), bisect(f, mid, hi, xtol=1e-15))
    idx = np.flatnonzero(neg)
    i0, i1 = idx[0], idx[-1]
    left = bisect(f, lams[i0 - 1], lams[i0], xtol=1e-15)
    right = bisect(f, lams[i1], lams[i1 + 1], xtol=1e-15)
    return (left, right)


def expm2(A, t=1.0) -> np.ndarray:
    """Closed-form ``exp(t A)`` for a 2x2 matrix.

    With ``m = Tr(A)/2`` and ``N = A - m I`` one has ``N^2 = delta^2 I`` where
    ``delta^2 = m^2 - det A``, so ``exp(tA) = e^{mt} (c(t) I + s(t) N)`` with
    hyperbolic or trigonometric ``c, s`` depending on the sign of ``delta^2``.
    ``t`` may be an array; the result then has shape ``t.shape + (2, 2)``.
    """
    A = as_mat2(A)
    t_arr = np.asarray(t, dtype=float)
    tt = np.atleast_1d(t_arr)
    m = 0.5 * trace(A)
    d2 = _half_disc(A)
    delta = math.sqrt(abs(d2))
    N = A - m * np.eye(2)

    c = np.empty_like(tt)
    s = np.empty_like(tt)
    small = delta * np.abs(tt) < _SERIES_CUTOFF
    if small.any():
        ts = tt[small]
        x = d2 * ts * ts
        emt = np.exp(m * ts)
        c[small] = emt * (1 + x / 2 + x * x / 24 + x ** 3 / 720)
        s[small] = emt * ts * (1 + x / 6 + x * x / 120 + x ** 3 / 5040)
    big = ~small
    if big.any():
        tb = tt[big]
        if d2 > 0:
            # factor out the dominant exponential: no overflow, no cancellation
            lead = np.exp((m + delta) * tb)
            tail = np.exp(-2.0 * delta * tb)
            c[big] = 0.5 * lead * (1.0 + tail)
            s[big] = lead * (-np.expm1(-2.0 * delta * tb)) / (2.0 * delta)
        else:
            emt = np.exp(m * tb)
            c[big] = emt * np.cos(delta * tb)
            s[big] = emt * np.sin(delta * tb) / delta
    out = c[:, None, None] * np.eye(2) + s[:, None, None] * N
    if t_arr.ndim == 0:
        return out[0]
    return out.reshape(t_arr.shape + (2, 2))


def solve_lyapunov(A, Q=None) -> np.ndarray:
    """Solve ``A^T M + M A = -Q`` for symmetric ``M``.

    The unknowns ``(m11, m12, m22)`` satisfy a 3x3 linear system; one step of
    iterative refinement is applied to the solution.
    """
    A = require_hurwitz(A, "A")
    Q = np.eye(2) if Q is None else as_mat2(Q)
    if not np.allclose(Q, Q.T, rtol=0, atol=1e-14 * max(1.0, np.abs(Q).max())):
        raise ValueError("Q must be symmetric")
    a, b, c, d = A[0, 0], A[0, 1], A[1, 0], A[1, 1]
    K = np.array([
        [2 * a, 2 * c, 0.0],
        [b, a + d, c],
        [0.0, 2 * b, 2 * d],
    ])
    rhs = -np.array([Q[0, 0], Q[0, 1], Q[1, 1]])
    x = np.linalg.solve(K, rhs)
    x = x + np.linalg.solve(K, rhs - K @ x)
    return np.array([[x[0], x[1]], [x[1], x[2]]])


def lyapunov_residual(A, M, Q=None) -> float:
    A, M = as_mat2(A), as_mat2(M)
    Q = np.eye(2) if Q is None else as_mat2(Q)
    return float(np.max(np.abs(A.T @ M + M @ A + Q)))


def mat_to_list(A: np.ndarray) -> list:
    return [[float(A[0, 0]), float(A[0, 1])], [float(A[1, 0]), float(A[1, 1])]]


def flat(A: Sequence) -> Tuple[float, float, float, float]:
    A = as_mat2(A)
    return float(A[0, 0]), float(A[0, 1]), float(A[1, 0]), float(A[1, 1])
