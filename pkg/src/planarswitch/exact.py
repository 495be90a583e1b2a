"""Closed-form angular invariant measures for two explicit switched pairs.

``rotations(a, b)``::

    A0 = [[-1, a b], [-a/b, -1]]      A1 = [[-1, -a/b], [a b, -1]]

``jordan(b)``::

    A0 = [[-1, 2b], [0, -1]]          A1 = [[-1, 0], [2b, -1]]

both switched with ``lambda = 1/2``.  In each case the stationary law of the
angular process has density ``exp(beta v(theta)) / (C |d_i(theta)|)`` for an
explicit potential ``v``, and the Lyapunov exponent is the integral of the
radial rate against it.  Integrals are done by adaptive quadrature
(``scipy.integrate.quad_vec``) with the exponent shifted by its maximum so
that large ``beta`` does not overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.integrate import quad_vec
from scipy.optimize import brentq
from scipy.special import k0e, k1e

from .pdmp import SwitchedSystem

PI = math.pi
_EXP_FLOOR = -745.0
# peak width below which quadrature is replaced by the Laplace limit
_LAPLACE_WIDTH = 1e-7


class NoTransition(ValueError):
    """The exponent never changes sign in beta."""


@dataclass(frozen=True)
class ExactModel:
    family: str
    b: float
    a: float = 1.0

    def __post_init__(self):
        if self.family not in ("rotations", "jordan"):
            raise ValueError(f"unknown family {self.family!r}")
        if not (self.a > 0 and self.b > 0):
            raise ValueError("family parameters must be positive")

    lam = 0.5

    def matrices(self) -> Tuple[np.ndarray, np.ndarray]:
        a, b = self.a, self.b
        if self.family == "rotations":
            return (np.array([[-1.0, a * b], [-a / b, -1.0]]),
                    np.array([[-1.0, -a / b], [a * b, -1.0]]))
        return (np.array([[-1.0, 2 * b], [0.0, -1.0]]),
                np.array([[-1.0, 0.0], [2 * b, -1.0]]))

    def system(self, beta: float) -> SwitchedSystem:
        A0, A1 = self.matrices()
        return SwitchedSystem(A0, A1, self.lam, beta)

    @property
    def support(self) -> Tuple[float, float]:
        return (0.0, 2 * PI) if self.family == "rotations" else (0.0, PI / 2)

    # -- ingredients ---------------------------------------------------
    @property
    def _rot_c(self) -> float:
        return (self.b * self.b - 1.0) / (2.0 * self.b)

    def drift(self, theta, i: int):
        a, b = self.a, self.b
        c2, s2 = np.cos(theta) ** 2, np.sin(theta) ** 2
        if self.family == "rotations":
            return -(a / b) * c2 - a * b * s2 if i == 0 else a * b * c2 + (a / b) * s2
        return -2 * b * s2 if i == 0 else 2 * b * c2

    def radial(self, theta):
        """Radial rate; identical for both states in these families."""
        amp = self.a * self._rot_c if self.family == "rotations" else self.b
        return amp * np.sin(2 * theta) - 1.0

    def potential(self, theta):
        if self.family == "rotations":
            return v_rotation(theta, self.a, self.b)
        return v_jordan(theta, self.b)

    @property
    def peak(self) -> float:
        """Angle in the support where the potential is largest."""
        if self.family == "rotations" and self.b < 1:
            return 3 * PI / 4
        return PI / 4

    @property
    def v_max(self) -> float:
        if self.family == "rotations":
            return math.atan(abs(self._rot_c)) / (2 * self.a)
        return -1.0 / (2 * self.b)

    def peak_width(self, beta: float) -> float:
        """``1 / sqrt(beta |v''(peak)|)``, infinite for a flat potential."""
        if self.family == "rotations":
            c = abs(self._rot_c)
            curv = 2 * c / (self.a * (1 + c * c))
        else:
            curv = 2.0 / self.b
        if beta <= 0 or curv == 0:
            return math.inf
        return 1.0 / math.sqrt(beta * curv)


def rotations(a: float, b: float) -> ExactModel:
    return ExactModel("rotations", b=float(b), a=float(a))


def jordan(b: float) -> ExactModel:
    return ExactModel("jordan", b=float(b))


def v_rotation(theta, a: float, b: float):
    """Potential of the rotations family.

    Equal to ``(arctan(b tan t) - arctan(tan t / b)) / (2a)`` away from
    ``t = pi/2 + k pi``; the difference of the two arguments is taken as the
    argument of ``(cos t + i b sin t)(b cos t - i sin t)``, whose real part is
    the constant ``b > 0``, so the result is smooth and pi-periodic.
    """
    return np.arctan((b * b - 1.0) / (2.0 * b) * np.sin(2 * np.asarray(theta))) / (2.0 * a)


def v_jordan(theta, b: float):
    th = np.asarray(theta, dtype=float)
    if np.any((th <= 0) | (th >= PI / 2)):
        raise ValueError("the Jordan potential is defined on (0, pi/2) only")
    return -1.0 / (2.0 * b * np.sin(2 * th))


def chi_jordan_bessel(b: float, beta: float) -> float:
    """Jordan-family exponent via modified Bessel functions.

    Substituting ``u = 1 / sin(2 theta)`` turns both integrals into Laplace
    transforms of ``(u^2 - 1)^{-1/2}`` and ``u (u^2 - 1)^{-1/2}``, i.e.
    ``K0`` and ``K1`` at ``k = beta / (2b)``; the exponent is
    ``-1 + b K0(k) / K1(k)``.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    k = beta / (2.0 * b)
    return -1.0 + b * k0e(k) / k1e(k)


# -- quadrature --------------------------------------------------------
def _breakpoints(model: ExactModel, beta: float, lo: float, hi: float):
    pts = set()
    if model.family == "rotations":
        pts.update(PI / 4 + j * PI / 2 for j in range(4))
        centres = [model.peak, model.peak + PI]
    else:
        pts.add(PI / 4)
        centres = [PI / 4]
        k = beta / (2 * model.b)
        # the mass near the walls sits where sin(2 theta) is of order k
        for j in range(-1, 6):
            s = k * 10.0 ** j
            if s < 1:
                th = 0.5 * math.asin(s)
                pts.update((th, PI / 2 - th))
    w = model.peak_width(beta)
    if math.isfinite(w):
        for cen in centres:
            for m in (1, 4, 16):
                pts.update((cen - m * w, cen + m * w))
    return sorted(p for p in pts if lo < p < hi)


def _domain(model: ExactModel, beta: float) -> Tuple[float, float]:
    if model.family == "rotations":
        return model.support
    if beta <= 0:
        raise ValueError("the Jordan normaliser diverges at beta = 0; beta must be positive")
    k = beta / (2 * model.b)
    # beyond this, beta (v - v_max) < -745 and the weight is exactly zero in floats
    th = 0.5 * math.asin(k / (k - _EXP_FLOOR))
    return th, PI / 2 - th


def state_weights(model: ExactModel, beta: float, theta):
    """Unnormalised per-state weights ``exp(beta (v - v_max)) / |d_i|``; shape ``(2, n)``."""
    th = np.asarray(theta, dtype=float)
    if model.family == "jordan":
        inside = (th > 0) & (th < PI / 2)
        safe = np.where(inside, th, PI / 4)
        e = np.where(inside, np.exp(beta * (v_jordan(safe, model.b) - model.v_max)), 0.0)
        d0 = np.abs(model.drift(safe, 0))
        d1 = np.abs(model.drift(safe, 1))
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.stack([np.where(e > 0, e / d0, 0.0), np.where(e > 0, e / d1, 0.0)])
    e = np.exp(beta * (model.potential(th) - model.v_max))
    return np.stack([e / np.abs(model.drift(th, 0)), e / np.abs(model.drift(th, 1))])


def integrate(model: ExactModel, beta: float, g: Callable, epsrel: float = 1e-12):
    """``int sum_i g(theta, i) w_i(theta) d theta`` over the support.

    ``g(theta)`` must return an array of shape ``(m, 2)`` (m integrands,
    one column per state); the result has shape ``(m,)``.  Weights are the
    shifted ones of :func:`state_weights`.
    """
    lo, hi = _domain(model, beta)

    def fn(th):
        w = state_weights(model, beta, th)
        return np.asarray(g(th)) @ w

    val, _ = quad_vec(fn, lo, hi, epsabs=0.0, epsrel=epsrel, norm="max",
                      points=_breakpoints(model, beta, lo, hi), limit=4000)
    return np.atleast_1d(val)


@dataclass(frozen=True)
class DensityEvaluation:
    """Invariant density on a grid.

    ``weights[i]`` are the unnormalised values ``exp(beta v) / |d_i|`` scaled
    by ``exp(-shift)``; ``c_beta`` is the normaliser on the same scale, so
    ``weights / c_beta`` is the probability density and
    ``log C(beta) = log(c_beta) + shift``.
    """

    model: ExactModel
    beta: float
    theta: np.ndarray
    weights: np.ndarray
    c_beta: float
    shift: float
    support: Tuple[float, float]

    @property
    def log_c(self) -> float:
        return math.log(self.c_beta) + self.shift

    @property
    def pdf(self) -> np.ndarray:
        return self.weights / self.c_beta

    def pdf_at(self, theta, i: int):
        return state_weights(self.model, self.beta, theta)[i] / self.c_beta

    def total_mass(self) -> float:
        return float(integrate(self.model, self.beta, lambda th: np.ones((1, 2)))[0] / self.c_beta)

    def folded_bin_masses(self, bins: int) -> np.ndarray:
        """Mass of ``(theta mod pi, i)`` per bin of ``[0, pi)``; shape ``(2, bins)``."""
        edges = np.linspace(0.0, PI, bins + 1)
        out = np.zeros((2, bins))
        reps = 2 if self.model.family == "rotations" else 1
        lo_s, hi_s = _domain(self.model, self.beta)
        for k in range(bins):
            for r in range(reps):
                lo = max(edges[k] + r * PI, lo_s)
                hi = min(edges[k + 1] + r * PI, hi_s)
                if hi <= lo:
                    continue
                val, _ = quad_vec(lambda th: state_weights(self.model, self.beta, th), lo, hi,
                                  epsabs=0.0, epsrel=1e-10, norm="max")
                out[:, k] += val
        return out / self.c_beta


def density(model: ExactModel, beta: float, n: int = 512) -> DensityEvaluation:
    if model.family == "rotations" and beta < 0:
        raise ValueError("beta must be non-negative")
    lo, hi = _domain(model, beta)
    shift = beta * model.v_max
    c = float(integrate(model, beta, lambda th: np.ones((1, 2)))[0])
    s_lo, s_hi = model.support
    h = (s_hi - s_lo) / n
    grid = s_lo + h * (np.arange(n) + 0.5)
    return DensityEvaluation(model, beta, grid, state_weights(model, beta, grid), c, shift, model.support)


def _moments(model: ExactModel, beta: float, *fs):
    def g(th):
        return np.array([[1.0, 1.0]] + [[f(th), f(th)] for f in fs], dtype=float)

    vals = integrate(model, beta, g)
    return vals[1:] / vals[0]


def chi_exact(model: ExactModel, beta: float) -> float:
    """Lyapunov exponent: the radial rate averaged against the invariant density."""
    return chi_exact_report(model, beta)[0]


def chi_exact_report(model: ExactModel, beta: float) -> Tuple[float, str]:
    """``(chi, method)`` with method ``"quadrature"`` or ``"laplace"``."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if model.peak_width(beta) < _LAPLACE_WIDTH:
        return float(model.radial(model.peak)), "laplace"
    return float(_moments(model, beta, model.radial)[0]), "quadrature"


@dataclass(frozen=True)
class ChiLimits:
    chi_at_zero: float
    chi_at_infinity: float
    zero_is_analytic_limit: bool


def chi_limits(model: ExactModel) -> ChiLimits:
    """Limits of the exponent as beta tends to 0 and to infinity.

    For the rotations family the large-beta limit is the radial rate at the
    maximum of the potential, ``a |b^2 - 1| / (2b) - 1``.  For the Jordan
    family the value at zero is a limit (the normaliser diverges there).
    """
    if model.family == "rotations":
        return ChiLimits(-1.0, model.a * abs(model.b ** 2 - 1) / (2 * model.b) - 1.0, False)
    return ChiLimits(-1.0, model.b - 1.0, True)


def has_transition(model: ExactModel) -> bool:
    if model.family == "jordan":
        return model.b > 1
    # chi is unchanged under b -> 1/b (conjugation by a reflection)
    return max(model.b, 1 / model.b) > 1 + math.sqrt(1 + model.a ** 2)


def beta_c(model: ExactModel, tol: float = 1e-10) -> float:
    """Rate at which the exponent changes sign.

    Brackets the root on a doubling grid, then refines with Brent's method;
    the exponent is increasing in beta, so the root is unique.
    """
    if not has_transition(model):
        if model.family == "jordan":
            raise NoTransition(f"no transition: b <= 1 (b = {model.b})")
        raise NoTransition(f"no transition: b <= 1+sqrt(1+a^2) (a = {model.a}, b = {model.b})")
    f = lambda x: chi_exact(model, x)
    lo, hi = 1.0, 1.0
    while f(lo) >= 0:
        lo /= 2
        if lo < 1e-12:
            raise NoTransition("exponent non-negative down to beta = 1e-12")
    while f(hi) <= 0:
        hi *= 2
        if hi > 1e12:
            raise NoTransition("exponent non-positive up to beta = 1e12")
    root = brentq(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
    if abs(f(root)) > tol:
        raise RuntimeError(f"root refinement stalled: |chi(beta_c)| = {abs(f(root))}")
    return float(root)


def chi_derivative(model: ExactModel, beta: float) -> float:
    """d chi / d beta as the covariance of radial rate and potential."""
    v = model.potential
    e_a, e_v, e_av = _moments(model, beta, model.radial, v, lambda th: model.radial(th) * v(th))
    return float(e_av - e_a * e_v)


def chi_derivative_sign(model: ExactModel, beta: float) -> int:
    cov = chi_derivative(model, beta)
    if abs(cov) <= 1e-13:
        return 0
    return 1 if cov > 0 else -1


def _central_diff(f, th, i, h=1e-3):
    return (-f(th + 2 * h, i) + 8 * f(th + h, i) - 8 * f(th - h, i) + f(th - 2 * h, i)) / (12 * h)


def stationarity_residual(model: ExactModel, beta: float, f: Callable, df: Optional[Callable] = None) -> float:
    """Average of ``L_beta f`` under the invariant density (zero if stationary).

    ``L_beta f(theta, i) = d_i(theta) f'(theta, i) + beta lambda_i (f(theta, 1-i) - f(theta, i))``.
    ``f(theta, i)`` takes an array of angles; ``df`` defaults to a fourth-order
    central difference.
    """
    if df is None:
        df = lambda th, i: _central_diff(f, th, i)
    rate = beta * model.lam

    def gen(th, i):
        return model.drift(th, i) * df(th, i) + rate * (f(th, 1 - i) - f(th, i))

    def g(th):
        return np.array([[1.0, 1.0], [gen(th, 0), gen(th, 1)]], dtype=float)

    vals = integrate(model, beta, g)
    return float(vals[1] / vals[0])
