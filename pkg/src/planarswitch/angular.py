"""Dynamics of the direction ``e_theta = (cos theta, sin theta)`` under linear flows.

For ``x' = A x`` written as ``x = r e_theta`` the angle obeys
``theta' = d(theta) = <A e_theta, e_{theta + pi/2}>`` and the log-radius grows
at rate ``<A e_theta, e_theta>``.  Both are pi-periodic.  This module also
locates the zeros of these drifts and sorts a switched pair into the
qualitative cases that decide whether the angular process is ergodic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .planar import as_mat2, convex_combination, det, eigen2

PI = math.pi
ZERO_TOL = 1e-10


class NoHyperbolicSplit(ValueError):
    """The averaged matrix does not have real eigenvalues of opposite sign."""


class DegenerateConfiguration(ValueError):
    """A drift vanishes where the averaged field has a zero (numerically)."""


def angular_drift(A, theta):
    A = as_mat2(A)
    c, s = np.cos(theta), np.sin(theta)
    return (A[1, 1] - A[0, 0]) * s * c + A[1, 0] * c * c - A[0, 1] * s * s


def radial_rate(A, theta):
    A = as_mat2(A)
    c, s = np.cos(theta), np.sin(theta)
    return A[0, 0] * c * c + (A[0, 1] + A[1, 0]) * s * c + A[1, 1] * s * s


@dataclass(frozen=True)
class CircleZeros:
    """Zeros of the angular drift on one period ``[0, pi)``.

    Each entry of ``zeros`` is ``(angle, kind)`` with kind ``"sign-changing"``
    or ``"touching"``.
    """

    zeros: Tuple[Tuple[float, str], ...]
    is_identically_zero: bool = False

    @property
    def angles(self) -> List[float]:
        return [z[0] for z in self.zeros]


def _sign_probe(A, theta, h=1e-3):
    left = angular_drift(A, theta - h)
    right = angular_drift(A, theta + h)
    return "sign-changing" if left * right < 0 else "touching"


def circle_zeros(A, tol: float = ZERO_TOL) -> CircleZeros:
    A = as_mat2(A)
    spec = eigen2(A)
    if spec.scalar:
        return CircleZeros((), True)
    if spec.kind == "complex-pair":
        return CircleZeros(())
    out = []
    for ang in sorted(spec.angles):
        if abs(angular_drift(A, ang)) > tol * max(1.0, float(np.abs(A).max())):
            raise DegenerateConfiguration(f"eigen-angle {ang} is not a drift zero")
        out.append((ang, _sign_probe(A, ang)))
    return CircleZeros(tuple(out))


@dataclass(frozen=True)
class AveragedProfile:
    """Saddle structure of ``A_lam = (1 - lam) A0 + lam A1``.

    ``theta_plus`` is the expanding eigendirection (attracting on the circle),
    ``theta_minus`` the contracting one, both in ``[0, pi)``.  The averaged
    drift is positive on ``(theta_minus, theta_plus)`` and negative on
    ``(theta_plus, theta_minus + pi)`` when ``theta_plus`` is read in
    ``(theta_minus, theta_minus + pi)``; see :meth:`lifted_plus`.
    """

    theta_minus: float
    theta_plus: float
    lambda_plus: float
    lambda_minus: float
    lam: float

    @property
    def lifted_plus(self) -> float:
        tp = self.theta_plus
        return tp if tp > self.theta_minus else tp + PI

    def lift(self, theta: float) -> float:
        """Representative of ``theta`` (mod pi) in ``[theta_minus, theta_minus + pi)``."""
        return self.theta_minus + (theta - self.theta_minus) % PI


def averaged_profile(A0, A1, lam: float) -> AveragedProfile:
    Al = convex_combination(A0, A1, lam)
    if det(Al) >= 0:
        raise NoHyperbolicSplit(f"A_lambda at lambda={lam} has no eigenvalues of opposite sign")
    spec = eigen2(Al)
    hi, lo = spec.eigenvalues[0].real, spec.eigenvalues[1].real
    return AveragedProfile(
        theta_minus=spec.angles[1],
        theta_plus=spec.angles[0],
        lambda_plus=hi,
        lambda_minus=-lo,
        lam=lam,
    )


@dataclass(frozen=True)
class CaseReport:
    label: str
    verdict: str
    invariant_interval: Optional[Tuple[float, float]]
    swapped: bool
    degenerate: bool
    profile: AveragedProfile
    # zeros lifted to (theta_minus, theta_minus + pi), after any swap
    zeros0: Tuple[float, ...] = field(default=())
    zeros1: Tuple[float, ...] = field(default=())

    def to_dict(self) -> dict:
        p = self.profile
        return {
            "label": self.label,
            "verdict": self.verdict,
            "invariant_interval": list(self.invariant_interval) if self.invariant_interval else None,
            "swapped": self.swapped,
            "degenerate": self.degenerate,
            "theta_minus": p.theta_minus,
            "theta_plus": p.theta_plus,
            "lambda_plus": p.lambda_plus,
            "lambda_minus": p.lambda_minus,
            "lambda": p.lam,
            "zeros_d0": list(self.zeros0),
            "zeros_d1": list(self.zeros1),
        }


def _lifted_zeros(A, prof: AveragedProfile) -> Tuple[Tuple[float, ...], bool]:
    cz = circle_zeros(A)
    if cz.is_identically_zero:
        raise DegenerateConfiguration("drift vanishes identically")
    zs = []
    touching = False
    for ang, kind in cz.zeros:
        z = prof.lift(ang)
        if kind == "touching":
            touching = True
            zs.extend([z, z])  # coincident pair
        else:
            zs.append(z)
    return tuple(sorted(zs)), touching


def classify(A0, A1, lam: float, tol: float = ZERO_TOL) -> CaseReport:
    """Sort a switched pair into the qualitative cases of its angular process.

    Orientation is normalised so that ``d0 < 0 < d1`` at the attracting
    direction ``theta_plus`` of the averaged field; when the inputs come the
    other way round the two matrices are swapped (and ``lam -> 1 - lam``),
    which is reported in ``swapped``.  Touching zeros count as a coincident
    pair.  Cases ``e`` and ``f`` carry an arc invariant under both flows, which
    splits the angular process into two recurrent classes.
    """
    A0, A1 = as_mat2(A0), as_mat2(A1)
    prof = averaged_profile(A0, A1, lam)
    tp = prof.lifted_plus
    scale = max(1.0, float(np.abs(A0).max()), float(np.abs(A1).max()))
    for th in (prof.theta_minus, tp):
        if abs(angular_drift(A0, th)) < tol * scale or abs(angular_drift(A1, th)) < tol * scale:
            raise DegenerateConfiguration("a drift vanishes at a zero of the averaged field")

    swapped = False
    if angular_drift(A0, tp) > 0:
        A0, A1, lam = A1, A0, 1.0 - lam
        swapped = True
        prof = averaged_profile(A0, A1, lam)
        tp = prof.lifted_plus

    z0, t0 = _lifted_zeros(A0, prof)
    z1, t1 = _lifted_zeros(A1, prof)
    degenerate = t0 or t1
    lo, hi = prof.theta_minus, prof.theta_minus + PI

    def inside(zs, a, b):
        return all(a < z < b for z in zs)

    interval = None
    if not z0 and not z1:
        label = "ergodic-no-zeros"
    elif not z1:
        label = "a"
    elif not z0:
        label = "b"
    elif inside(z0, lo, tp) and inside(z1, tp, hi):
        label = "e"
        interval = (z0[-1], z1[0])
    elif inside(z0, lo, tp) and inside(z1, z0[0], z0[-1]):
        label = "d"
    elif inside(z1, tp, hi) and inside(z0, z1[0], z1[-1]):
        label = "c"
    elif z1[0] < z0[0] < tp < z1[-1] < z0[-1]:
        label = "f"
        interval = (z0[0], z1[-1])
    else:
        raise DegenerateConfiguration(f"zero layout fits no case: d0 {z0}, d1 {z1}")

    if interval is not None:
        start = interval[0] % PI
        if PI - start < 1e-12:
            start = 0.0
        interval = (start, start + (interval[1] - interval[0]))
    verdict = "two-recurrent-classes" if interval else "unique-invariant-measure"
    return CaseReport(label, verdict, interval, swapped, degenerate, prof, z0, z1)
