"""Numerical maximization of ``F`` and first-order optimality checks.

The projected gradient ascent here knows nothing about the closed-form
solution; it is the independent check on :mod:`seebeckopt.analytic`.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import analytic
from .functional import EvalScheme, _gradient, cell_weights, eval_sampled
from .profile import (
    ProfileError,
    SampledProfile,
    SeebeckBounds,
    cell_midpoints,
    monotone_rearrange,
    sample_piecewise,
)

log = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class InitMode(enum.Enum):
    CONSTANT_MID = "mid"
    RANDOM = "random"
    ANALYTIC_WARM_START = "warm"


@dataclass(frozen=True)
class OptimizerOptions:
    n_cells: int = 2000
    max_iters: int = 50000
    grad_tol: float = 1e-8
    step_init: float = 1.0
    backtrack_factor: float = 0.5
    armijo_c: float = 1e-4
    seed: int = 0
    init_mode: InitMode = InitMode.CONSTANT_MID
    scheme: EvalScheme = EvalScheme.EXACT
    kkt_tol: float = 1e-2

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < 2:
            raise ValueError(f"n_cells must be an integer >= 2, got {self.n_cells}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError(f"max_iters must be an integer >= 1, got {self.max_iters}")
        if not (math.isfinite(self.grad_tol) and self.grad_tol > 0):
            raise ValueError(f"grad_tol must be > 0, got {self.grad_tol}")
        if not (math.isfinite(self.step_init) and self.step_init > 0):
            raise ValueError(f"step_init must be > 0, got {self.step_init}")
        if not 0 < self.backtrack_factor < 1:
            raise ValueError(f"backtrack_factor must be in (0, 1), got {self.backtrack_factor}")
        if not 0 < self.armijo_c < 1:
            raise ValueError(f"armijo_c must be in (0, 1), got {self.armijo_c}")
        object.__setattr__(self, "init_mode", InitMode(self.init_mode))
        object.__setattr__(self, "scheme", EvalScheme(self.scheme))


@dataclass(frozen=True)
class KktReport:
    max_interior_deviation: float
    lower_active_violations: int
    upper_active_violations: int
    q_estimate: float
    n_interior: int = 0
    n_lower: int = 0
    n_upper: int = 0
    tol: float = 0.0

    @property
    def passed(self) -> bool:
        return (
            self.max_interior_deviation <= self.tol
            and self.lower_active_violations == 0
            and self.upper_active_violations == 0
        )

    def as_dict(self) -> dict:
        return {
            "max_interior_deviation": self.max_interior_deviation,
            "lower_active_violations": self.lower_active_violations,
            "upper_active_violations": self.upper_active_violations,
            "q_estimate": self.q_estimate,
            "n_interior": self.n_interior,
            "n_lower": self.n_lower,
            "n_upper": self.n_upper,
            "tol": self.tol,
            "passed": self.passed,
        }


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    profile: SampledProfile
    f_value: float
    iterations: int
    projected_grad_norm: float
    converged: bool
    kkt: KktReport
    f_history: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))

    def __eq__(self, other):
        if not isinstance(other, OptimizationResult):
            return NotImplemented
        return (
            self.profile == other.profile
            and self.f_value == other.f_value
            and self.iterations == other.iterations
            and self.projected_grad_norm == other.projected_grad_norm
            and self.converged == other.converged
            and self.kkt == other.kkt
            and np.array_equal(self.f_history, other.f_history)
        )


def initial_profile(bounds: SeebeckBounds, opts: OptimizerOptions) -> SampledProfile:
    n = opts.n_cells
    if opts.init_mode is InitMode.CONSTANT_MID:
        y = np.full(n, 0.5 * (bounds.s_lo + bounds.s_hi))
    elif opts.init_mode is InitMode.RANDOM:
        rng = np.random.default_rng(opts.seed)
        y = rng.uniform(bounds.s_lo, bounds.s_hi, n)
    else:
        y = sample_piecewise(analytic.optimal_profile(bounds), n).values
    return monotone_rearrange(SampledProfile(np.clip(y, bounds.s_lo, bounds.s_hi)))


def _ratio_change(y, dy, mean, denom, w) -> float:
    """``F(y + dy) - F(y)`` from the increments of both integrals.

    Differencing two evaluated ratios would bottom out at ``eps * F``; near
    convergence the per-step gain is far smaller than that.
    """
    num = 0.5 * mean * mean
    d_mean = float(np.sum(dy)) / y.size
    d_denom = float(np.dot(w, dy * (2.0 * y + dy)))
    d_num = d_mean * (mean + 0.5 * d_mean)
    return (d_num * denom - num * d_denom) / (denom * (denom + d_denom))


def _readonly(y: np.ndarray) -> np.ndarray:
    v = y.view()
    v.setflags(write=False)
    return v


def _projected_step(y, g, bounds, scale):
    return np.clip(y + scale * g, bounds.s_lo, bounds.s_hi) - y


def projected_gradient_ascent(
    bounds: SeebeckBounds,
    opts: OptimizerOptions | None = None,
    callback: Callable[[int, np.ndarray, float], None] | None = None,
) -> OptimizationResult:
    """Maximize the discretized ``F`` over ``s_lo <= y_j <= s_hi``.

    Steps follow ``y <- clip(y + a * d)`` with ``d = N * s_lo^2 * grad F``
    (the function-space gradient made dimensionless), ``a`` chosen by Armijo
    backtracking along the projection arc. The stopping test uses the RMS of
    the unit-step projected move divided by ``s_lo``.

    ``callback(iteration, y, f)`` sees the starting point and every accepted
    iterate; ``y`` is a read-only view.
    """
    opts = opts or OptimizerOptions()
    n = opts.n_cells
    lo, hi = bounds.s_lo, bounds.s_hi
    w = cell_weights(n, opts.scheme)
    scale = n * lo * lo
    min_step = opts.step_init * 1e-20

    y = initial_profile(bounds, opts).values.copy()
    mean, denom = float(np.sum(y)) / n, float(np.dot(w, y * y))
    f = 0.5 * mean * mean / denom
    history = [f]
    if callback is not None:
        callback(0, _readonly(y), f)
    alpha = opts.step_init
    converged = False
    iterations = 0
    pg_norm = math.inf

    for iterations in range(opts.max_iters + 1):
        g = _gradient(y, mean, denom, w)
        pg_norm = math.sqrt(float(np.mean(_projected_step(y, g, bounds, scale) ** 2))) / lo
        if pg_norm <= opts.grad_tol:
            converged = True
            break
        if iterations == opts.max_iters:
            break

        while True:
            dy = np.clip(y + alpha * scale * g, lo, hi) - y
            gain = _ratio_change(y, dy, mean, denom, w)
            if gain >= opts.armijo_c * float(np.dot(g, dy)) and gain >= 0.0:
                break
            alpha *= opts.backtrack_factor
            if alpha < min_step:
                log.warning("line search stalled at iteration %d (|pg| = %.3g)", iterations, pg_norm)
                dy = None
                break
        if dy is None:
            break

        y = y + dy
        mean, denom = float(np.sum(y)) / n, float(np.dot(w, y * y))
        f += gain
        history.append(f)
        if callback is not None:
            callback(iterations + 1, _readonly(y), f)
        alpha = min(alpha / opts.backtrack_factor, opts.step_init * 1e6)

    profile = SampledProfile(y)
    kkt = verify_kkt(profile, bounds, tol=opts.kkt_tol)
    hist = np.array(history)
    hist.setflags(write=False)
    return OptimizationResult(
        profile=profile,
        f_value=eval_sampled(profile, EvalScheme.EXACT).ratio,
        iterations=iterations,
        projected_grad_norm=pg_norm,
        converged=converged,
        kkt=kkt,
        f_history=hist,
    )


def golden_section_max(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float,
    better: Callable[[float, float], bool] | None = None,
    max_iters: int = 500,
) -> tuple[float, int]:
    """Golden-section search for the maximizer of a unimodal ``func`` on ``[lo, hi]``.

    ``better(a, b)`` decides whether ``a`` beats ``b``; by default it compares
    ``func`` values. Returns the bracket midpoint and the iteration count.
    """
    if better is None:
        def better(a, b):
            return func(a) > func(b)

    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    it = 0
    while b - a > tol and it < max_iters:
        if better(c, d):
            b, d = d, c
            c = b - INV_PHI * (b - a)
        else:
            a, c = c, d
            d = a + INV_PHI * (b - a)
        it += 1
    return 0.5 * (a + b), it


def maximize_f_over_q(bounds: SeebeckBounds, tol: float = 1e-8) -> tuple[float, float]:
    """Golden-section search for the best ``q`` in ``(0, s_lo]``."""
    if not (math.isfinite(tol) and tol > 0):
        raise ValueError(f"tol must be > 0, got {tol}")
    s0 = bounds.s_lo
    if bounds.degenerate:
        q = analytic.optimal_q(bounds)
        return q, analytic.f_of_q(q, bounds)
    q, _ = golden_section_max(
        lambda q: analytic.f_of_q(q, bounds),
        1e-12 * s0,
        s0,
        tol * s0,
        better=lambda a, b: analytic.f_difference(a, b, bounds) > 0,
    )
    return q, analytic.f_of_q(q, bounds)


def verify_kkt(sp: SampledProfile, bounds: SeebeckBounds, tol: float) -> KktReport:
    """Check first-order optimality of ``sp`` under the box constraint.

    Interior cells must satisfy ``(1 - x_j) y_j = D/A``; cells resting on
    ``s_lo`` need ``(1 - x_j) s_lo >= D/A`` and cells on ``s_hi`` need
    ``(1 - x_j) s_hi <= D/A``, each up to a relative ``tol``. Cells at both
    bounds (equal bounds) are pinned and carry no sign condition.
    """
    y = sp.values
    lo, hi = bounds.s_lo, bounds.s_hi
    slack = 4 * np.finfo(float).eps * hi
    bad = np.flatnonzero((y < lo - slack) | (y > hi + slack))
    if bad.size:
        j = int(bad[0])
        raise ProfileError(f"value at index {j} = {y[j]} outside [{lo}, {hi}]", j)

    fv = eval_sampled(sp, EvalScheme.EXACT)
    mean = float(np.sum(y)) / y.size
    q_est = fv.denominator / mean
    lever = 1.0 - cell_midpoints(y.size)

    tol_active = 1e-6 * (hi - lo)
    at_lo = y <= lo + tol_active
    at_hi = y >= hi - tol_active
    lower = at_lo & ~at_hi
    upper = at_hi & ~at_lo
    interior = ~(at_lo | at_hi)

    dev = np.abs(lever[interior] * y[interior] - q_est) / q_est
    return KktReport(
        max_interior_deviation=float(dev.max()) if dev.size else 0.0,
        lower_active_violations=int(np.count_nonzero(lever[lower] * lo < q_est * (1.0 - tol))),
        upper_active_violations=int(np.count_nonzero(lever[upper] * hi > q_est * (1.0 + tol))),
        q_estimate=q_est,
        n_interior=int(np.count_nonzero(interior)),
        n_lower=int(np.count_nonzero(lower)),
        n_upper=int(np.count_nonzero(upper)),
        tol=tol,
    )


def exchange_improves(
    sp: SampledProfile, j: int, k: int, scheme: EvalScheme = EvalScheme.EXACT
) -> tuple[float, float]:
    """Change in ``(denominator, ratio)`` from swapping cells ``j < k``."""
    n = sp.n_cells
    if not (0 <= j < k < n):
        raise IndexError(f"need 0 <= j < k < {n}, got j={j}, k={k}")
    y = sp.values
    swapped = y.copy()
    swapped[j], swapped[k] = y[k], y[j]
    # the swap permutes the sum; a correctly rounded sum is order-free
    assert math.fsum(swapped) == math.fsum(y)

    fv = eval_sampled(sp, scheme)
    w = cell_weights(n, scheme)
    d_denom = float((w[j] - w[k]) * (y[k] * y[k] - y[j] * y[j]))
    d_ratio = -fv.numerator * d_denom / (fv.denominator * (fv.denominator + d_denom))
    return d_denom, d_ratio
