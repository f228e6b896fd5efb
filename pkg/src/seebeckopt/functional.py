"""The cooling functional ``F[S] = (1/2)(int S)^2 / int (1 - x) S^2``.

``F`` is homogeneous of degree zero in ``S``. The maximum cooling temperature
is ``dT_max = (1/2) * zt2 * F``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .profile import Constant, Perturbation, PiecewiseProfile, SampledProfile


class EvalScheme(enum.Enum):
    """How ``int (1 - x) S^2`` is discretized for a sampled profile.

    ``PAPER`` weights cell ``j`` by its left endpoint, ``(1 - j/N) / N``.
    ``EXACT`` integrates ``1 - x`` exactly over the cell, which makes the
    result the true integral of the piecewise-constant profile.
    """

    PAPER = "paper"
    EXACT = "exact"


@dataclass(frozen=True)
class FunctionalValue:
    """Both integrals of ``F`` and their ratio.

    ``ratio`` is stored rather than derived: evaluators may compute it more
    accurately than ``numerator / denominator`` of the rounded parts.
    """

    numerator: float
    denominator: float
    ratio: float = math.nan

    def __post_init__(self):
        if math.isnan(self.ratio):
            object.__setattr__(self, "ratio", self.numerator / self.denominator)

    def as_dict(self) -> dict:
        return {"numerator": self.numerator, "denominator": self.denominator, "ratio": self.ratio}


@dataclass(frozen=True)
class Zt2Parameter:
    zt2: float

    def __post_init__(self):
        z = float(self.zt2)
        if not (math.isfinite(z) and z >= 0):
            raise ValueError(f"zt2 must be finite and >= 0, got {z}")
        object.__setattr__(self, "zt2", z)


def cell_weights(n: int, scheme: EvalScheme = EvalScheme.EXACT) -> np.ndarray:
    """Weights ``w_j`` with ``int (1 - x) S^2 dx = sum_j w_j y_j^2``."""
    j = np.arange(n, dtype=float)
    if scheme is EvalScheme.PAPER:
        return (n - j) / (n * n)
    if scheme is EvalScheme.EXACT:
        # ((1 - j/n)^2 - (1 - (j+1)/n)^2) / 2, formed from integers
        return (2.0 * (n - j) - 1.0) / (2.0 * n * n)
    raise ValueError(f"unknown scheme {scheme!r}")


_SPLITTER = 134217729.0  # 2**27 + 1


def _two_prod(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Dekker's product: ``a * b == p + e`` exactly (barring overflow)."""
    p = a * b
    ca, cb = _SPLITTER * a, _SPLITTER * b
    a_hi, b_hi = ca - (ca - a), cb - (cb - b)
    a_lo, b_lo = a - a_hi, b - b_hi
    e = ((a_hi * b_hi - p) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo
    return p, e


def _sum2(terms) -> tuple[float, float]:
    """Exact-sum as an unevaluated pair ``hi + lo``."""
    terms = list(terms)
    hi = math.fsum(terms)
    terms.append(-hi)
    return hi, math.fsum(terms)


def _ratio_dd(num: tuple[float, float], den: tuple[float, float], factor: int) -> float:
    """``(num_hi + num_lo)^2 / (factor * (den_hi + den_lo))``, correctly rounded."""
    n = Fraction(num[0]) + Fraction(num[1])
    d = Fraction(den[0]) + Fraction(den[1])
    return float(n * n / (factor * d))


def _integer_weights(n: int, scheme: EvalScheme) -> tuple[np.ndarray, int, int]:
    """Integer weights ``k_j``, their scale and the ratio factor.

    ``w_j = k_j / scale`` and ``F = (sum y)^2 / (factor * sum k_j y_j^2)``.
    """
    j = np.arange(n, dtype=float)
    if scheme is EvalScheme.PAPER:
        return n - j, n * n, 2
    if scheme is EvalScheme.EXACT:
        return 2.0 * (n - j) - 1.0, 2 * n * n, 1
    raise ValueError(f"unknown scheme {scheme!r}")


def _integrals(y: np.ndarray, scheme: EvalScheme) -> tuple[float, float, np.ndarray]:
    n = y.size
    w = cell_weights(n, scheme)
    return float(np.sum(y)) / n, float(np.dot(w, y * y)), w


def eval_sampled(sp: SampledProfile, scheme: EvalScheme = EvalScheme.EXACT) -> FunctionalValue:
    """Evaluate ``F`` of a sampled profile under ``scheme``.

    Sums are carried exactly (``fsum`` over error-free products), so the
    ratio is correctly rounded and scale invariance holds to about one ulp.
    """
    y = sp.values
    n = y.size
    k, den_scale, factor = _integer_weights(n, scheme)
    sq, sq_err = _two_prod(y, y)
    a, b = _two_prod(k, sq)
    c, d = _two_prod(k, sq_err)
    total = _sum2(y)
    weighted = _sum2(np.concatenate((a, b, c, d)))
    mean = total[0] / n
    return FunctionalValue(
        numerator=0.5 * mean * mean,
        denominator=weighted[0] / den_scale,
        ratio=_ratio_dd(total, weighted, factor),
    )


def segment_integrals(seg) -> tuple[float, float]:
    """Exact ``(int S, int (1 - x) S^2)`` over one segment."""
    a, b = seg.start, seg.end
    if isinstance(seg.kind, Constant):
        c = seg.kind.value
        return c * (b - a), c * c * (b - a) * (2.0 - a - b) / 2.0
    q = seg.kind.q
    log_span = math.log((1.0 - a) / (1.0 - b))
    return q * log_span, q * q * log_span


def eval_piecewise(pw: PiecewiseProfile) -> FunctionalValue:
    """Evaluate ``F`` exactly by closed-form segment integrals."""
    parts = [segment_integrals(s) for s in pw.segments]
    total = math.fsum(p[0] for p in parts)
    weighted = math.fsum(p[1] for p in parts)
    return FunctionalValue(0.5 * total * total, weighted)


def eval_double_integral(sp: SampledProfile) -> FunctionalValue:
    """Evaluate the un-normalized double-integral form on the sample grid.

    Both inner integrals ``int_0^x`` are cumulative left sums, so the result
    agrees with :func:`eval_sampled` only to first order in ``1/N``.
    """
    y = sp.values
    n = y.size
    inner = np.concatenate(([0.0], np.cumsum(y)[:-1])) / n
    inner_sq = np.concatenate(([0.0], np.cumsum(y * y)[:-1])) / n
    return FunctionalValue(float(np.dot(y, inner)) / n, float(np.sum(inner_sq)) / n)


def gateaux_derivative(
    sp: SampledProfile, dp: Perturbation, scheme: EvalScheme = EvalScheme.EXACT
) -> float:
    """``d/de F[S + e dS]`` at ``e = 0`` for the discretized functional."""
    if sp.n_cells != dp.n_cells:
        raise ValueError(f"length mismatch: profile has {sp.n_cells} cells, perturbation {dp.n_cells}")
    y, d = sp.values, dp.values
    mean, denom, w = _integrals(y, scheme)
    num = 0.5 * mean * mean
    d_mean = float(np.sum(d)) / y.size
    d_weighted = float(np.dot(w, y * d))
    return (mean * d_mean * denom - num * 2.0 * d_weighted) / (denom * denom)


def discrete_gradient(sp: SampledProfile, scheme: EvalScheme = EvalScheme.EXACT) -> np.ndarray:
    """Partial derivatives ``dF/dy_j`` of the discretized functional."""
    y = sp.values
    mean, denom, w = _integrals(y, scheme)
    return _gradient(y, mean, denom, w)


def _gradient(y: np.ndarray, mean: float, denom: float, w: np.ndarray) -> np.ndarray:
    # A/N * D - (A^2/2) * 2 w_j y_j, over D^2
    return mean * (denom / y.size - mean * w * y) / (denom * denom)


def delta_t_max(f_value: float, zt2: Zt2Parameter | float) -> float:
    if not isinstance(zt2, Zt2Parameter):
        zt2 = Zt2Parameter(zt2)
    if f_value < 0:
        raise ValueError(f"functional value must be >= 0, got {f_value}")
    return 0.5 * zt2.zt2 * f_value
