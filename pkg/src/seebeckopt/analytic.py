"""Closed-form results for the box-constrained maximization of ``F``.

The maximizer lies in a one-parameter family: ``s_lo`` up to ``x0``, then
``q / (1 - x)``, then ``s_hi`` from ``x1`` on, with ``x0 = 1 - q/s_lo`` and
``x1 = 1 - q/s_hi`` so the profile is continuous. Over that family
``F = f(q)``, which peaks at ``q = s_lo / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .profile import Constant, Hyperbolic, PiecewiseProfile, ProfileError, Segment, SeebeckBounds


@dataclass(frozen=True)
class ThreeSegmentParams:
    q: float
    x0: float
    x1: float
    bounds: SeebeckBounds

    @classmethod
    def from_q(cls, q: float, bounds: SeebeckBounds) -> "ThreeSegmentParams":
        _check_q(q, bounds)
        return cls(q, 1.0 - q / bounds.s_lo, 1.0 - q / bounds.s_hi, bounds)


def _check_q(q: float, bounds: SeebeckBounds) -> None:
    if not (math.isfinite(q) and 0.0 < q <= bounds.s_lo):
        raise ProfileError(f"q must lie in (0, s_lo] = (0, {bounds.s_lo}], got {q}")


def three_segment_profile(q: float, bounds: SeebeckBounds) -> PiecewiseProfile:
    p = ThreeSegmentParams.from_q(q, bounds)
    return PiecewiseProfile(
        (
            Segment(0.0, p.x0, Constant(bounds.s_lo)),
            Segment(p.x0, p.x1, Hyperbolic(q)),
            Segment(p.x1, 1.0, Constant(bounds.s_hi)),
        )
    )


def optimal_q(bounds: SeebeckBounds) -> float:
    return bounds.s_lo / 2.0


def optimal_profile(bounds: SeebeckBounds) -> PiecewiseProfile:
    """The maximizer: breakpoints at 1/2 and ``1 - s_lo / (2 s_hi)``."""
    if bounds.degenerate:
        return PiecewiseProfile.constant(bounds.s_lo)
    return three_segment_profile(optimal_q(bounds), bounds)


def analytic_integrals(q: float, bounds: SeebeckBounds) -> tuple[float, float]:
    """``(int S, int (1 - x) S^2)`` for the three-segment profile with parameter ``q``."""
    _check_q(q, bounds)
    L = bounds.log_ratio
    return bounds.s_lo + q * L, bounds.s_lo * bounds.s_lo / 2.0 + q * q * L


def f_of_q(q: float, bounds: SeebeckBounds) -> float:
    _check_q(q, bounds)
    s0, L = bounds.s_lo, bounds.log_ratio
    total = s0 + q * L
    return total * total / (s0 * s0 + 2.0 * q * q * L)


def df_dq(q: float, bounds: SeebeckBounds) -> float:
    _check_q(q, bounds)
    s0, L = bounds.s_lo, bounds.log_ratio
    denom = s0 * s0 + 2.0 * q * q * L
    return 2.0 * (s0 + q * L) * L * s0 * (s0 - 2.0 * q) / (denom * denom)


def f_difference(a: float, b: float, bounds: SeebeckBounds) -> float:
    """``f(a) - f(b)`` in factored form.

    Subtracting two nearly equal values of ``f`` near its peak loses all
    significant digits; here the difference is assembled from offsets to the
    peak, so its sign is reliable down to ``|a - b| ~ eps * s_lo``.
    """
    _check_q(a, bounds)
    _check_q(b, bounds)
    s0, L = bounds.s_lo, bounds.log_ratio
    u, v = a - s0 / 2.0, b - s0 / 2.0
    cross = -(u + v) * s0 * (2.0 + L) - 4.0 * L * u * v
    da = s0 * s0 + 2.0 * a * a * L
    db = s0 * s0 + 2.0 * b * b * L
    return L * s0 * (a - b) * cross / (da * db)


def f_max(bounds: SeebeckBounds) -> float:
    return 1.0 + 0.5 * bounds.log_ratio
