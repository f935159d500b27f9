"""Admissible coupling/dilation regions.

``s`` is ``arg beta`` and ``t`` the (imaginary) dilation angle.  All tests
use strict inequalities; boundary points are non-members.  Functions that
take a complex ``beta`` also accept ``arg_beta`` so that couplings on other
sheets of the Riemann surface (``arg beta > pi``) can be described.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

#: offset used to move a real-axis coupling direction off the boundary
THETA_OFFSET = 1e-3


@dataclass(frozen=True)
class RegionSpec:
    k: int
    delta: float
    R: float = 1.0
    B_delta: float = 1.0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not 0 < self.delta < math.pi / 4:
            raise ValueError("delta must lie in (0, pi/4)")
        if self.R <= 0 or self.B_delta <= 0:
            raise ValueError("R and B_delta must be positive")


def admissibility_conditions(s: float, t: float, k: int) -> tuple[bool, bool]:
    """The two strict conditions on the ``x^(2k+1)`` and ``x^2`` coefficients.

    Returns ``(0 < s + (2k+3) t < pi, 0 < s + (2k-1) t < pi)``.
    """
    a = s + (2 * k + 3) * t
    b = s + (2 * k - 1) * t
    return (0 < a < math.pi, 0 < b < math.pi)


def in_parallelogram_P(s: float, t: float, k: int) -> bool:
    c1 = 0 < (2 * k - 1) * t + s < math.pi
    c2 = 0 < (2 * k + 3) * t + s < math.pi
    return c1 and c2


def theta_line(arg_beta: float, k: int) -> float:
    """Straight path through P along which the ``x^(2k+1)`` coefficient of
    the dilated operator is purely imaginary."""
    return -arg_beta / (2 * k + 1) + math.pi / (2 * (2 * k + 1))


@dataclass(frozen=True)
class ThetaChoice:
    theta: float
    flagged: bool
    offset: float = 0.0

    def __float__(self):
        return self.theta


def choose_theta(arg_beta: float, k: int, eps: float = THETA_OFFSET) -> ThetaChoice:
    """Dilation angle for a coupling direction.

    Interior directions get the straight-line value.  The real-axis
    directions ``arg beta = 0`` and ``arg beta = pi`` (the distributional
    cases) are shifted by ``eps`` in the direction that corresponds to
    approaching from ``Im beta > 0`` and are flagged; the shifts are mirror
    images of each other so ``theta(pi) = -theta(0)``.
    """
    theta = theta_line(arg_beta, k)
    tol = 1e-12
    if abs(arg_beta) <= tol:
        return ThetaChoice(theta - eps, True, -eps)
    if abs(arg_beta - math.pi) <= tol:
        return ThetaChoice(theta + eps, True, eps)
    upper = (2 * k + 3) * math.pi / 4
    lower = -(2 * k - 1) * math.pi / 4
    if not lower < arg_beta < upper:
        # outside the sector the line leaves P; clip toward the interior
        return ThetaChoice(theta - math.copysign(eps, theta), True, -math.copysign(eps, theta))
    return ThetaChoice(theta, False)


def _polar(beta, arg_beta):
    r = abs(beta)
    s = cmath.phase(beta) if arg_beta is None else float(arg_beta)
    return r, s


def sector_membership(beta, region: RegionSpec, arg_beta: float | None = None) -> bool:
    """Strict membership of ``beta`` in the sector ``S(delta)``."""
    r, s = _polar(beta, arg_beta)
    if r == 0:
        return False
    k, d = region.k, region.delta
    return r < region.B_delta and -(2 * k - 1) * math.pi / 4 + d < s < (2 * k + 3) * math.pi / 4 - d


def nevanlinna_membership(beta, q, R: float, variant: str = "upper",
                          arg_beta: float | None = None) -> bool:
    """Is ``beta`` in the disk ``Re z^{-1/q} >= 1/R``?

    ``variant='upper'`` uses ``z = beta`` on the principal branch.
    ``variant='lower'`` uses the adapted variable ``z = beta e^{-i pi}``, with
    its argument taken literally as ``arg beta - pi``.
    """
    if beta == 0:
        raise ValueError("beta must be nonzero")
    q = float(Fraction(q))
    r, s = _polar(beta, arg_beta)
    if variant == "lower":
        s = s - math.pi
    elif variant != "upper":
        raise ValueError("variant must be 'upper' or 'lower'")
    # z^{-1/q} = r^{-1/q} e^{-i s/q}
    return r ** (-1 / q) * math.cos(s / q) >= 1 / R


def nevanlinna_disk_form(beta, q, R: float, variant: str = "upper",
                         arg_beta: float | None = None) -> bool:
    """Same region written as ``|z^{1/q} - R/2| <= R/2``."""
    if beta == 0:
        raise ValueError("beta must be nonzero")
    q = float(Fraction(q))
    r, s = _polar(beta, arg_beta)
    if variant == "lower":
        s = s - math.pi
    w = r ** (1 / q) * cmath.exp(1j * s / q)
    return abs(w - R / 2) <= R / 2


def half_plane_Pi(s: float, t: float, k: int) -> tuple[float, float]:
    """Argument range ``[lo, hi]`` of the half-plane holding the numerical range."""
    hi = s + (2 * k + 1) * t
    return hi - math.pi, hi


def angular_violation(z: complex, s: float, t: float, k: int) -> float:
    """How far (radians) ``z`` lies outside the half-plane; negative inside."""
    lo, hi = half_plane_Pi(s, t, k)
    mid = 0.5 * (lo + hi)
    if z == 0:
        return -math.pi / 2
    ang = cmath.phase(z * cmath.exp(-1j * mid))
    return abs(ang) - math.pi / 2
