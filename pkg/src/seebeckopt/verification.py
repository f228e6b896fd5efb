"""Self-check suite: numerical confirmation of every optimality argument.

Each check returns a :class:`Check` with the measured error and the limit it
was held to. Checks limited by round-off use the caller's ``tol``; checks
limited by discretization keep their own fixed limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import analytic
from .functional import EvalScheme, discrete_gradient, eval_sampled
from .optimizer import (
    OptimizerOptions,
    exchange_improves,
    maximize_f_over_q,
    projected_gradient_ascent,
    verify_kkt,
)
from .profile import SampledProfile, SeebeckBounds, monotone_rearrange, sample_piecewise

FD_REL_TOL = 1e-6
KKT_SAMPLED_TOL = 5e-3
KKT_OPTIMIZER_TOL = 1e-2
OPTIMIZER_REL_TOL = 2e-3


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    error: float
    limit: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"[{status}] {self.name}: error={self.error:.3e} limit={self.limit:.3e}"
        return f"{text} ({self.detail})" if self.detail else text


def _check(name, error, limit, detail="") -> Check:
    return Check(name, bool(error <= limit), float(error), float(limit), detail)


def fd_gradient(sp: SampledProfile, scheme: EvalScheme, rel_step: float = 1e-6) -> np.ndarray:
    """Central differences of ``eval_sampled`` with step ``rel_step * y_j``."""
    y = sp.values
    g = np.empty_like(y)
    for j in range(y.size):
        h = rel_step * y[j]
        up, dn = y.copy(), y.copy()
        up[j] += h
        dn[j] -= h
        g[j] = (eval_sampled(SampledProfile(up), scheme).ratio - eval_sampled(SampledProfile(dn), scheme).ratio) / (
            up[j] - dn[j]
        )
    return g


def gradient_fd_error(sp: SampledProfile, scheme: EvalScheme) -> float:
    """Largest FD mismatch relative to the gradient's max-norm."""
    g = discrete_gradient(sp, scheme)
    return float(np.max(np.abs(g - fd_gradient(sp, scheme))) / np.max(np.abs(g)))


def check_scale_invariance(bounds, rng, tol) -> Check:
    worst = 0.0
    for _ in range(20):
        y = rng.uniform(bounds.s_lo, max(bounds.s_hi, bounds.s_lo * 2), int(rng.integers(2, 200)))
        base = eval_sampled(SampledProfile(y)).ratio
        for c in (1e-3, 1.0, 1e3):
            worst = max(worst, abs(eval_sampled(SampledProfile(c * y)).ratio - base) / base)
    opt = analytic.optimal_profile(bounds)
    for c in (1e-3, 1e3):
        for a, b in zip(analytic.optimal_profile(bounds.scaled(c)).breakpoints, opt.breakpoints):
            worst = max(worst, abs(a - b))
    return _check("scale invariance", worst, tol, "ratio(c*S) vs ratio(S), breakpoints under bound scaling")


def check_rearrangement(rng) -> Check:
    worst = 0.0
    for _ in range(200):
        sp = SampledProfile(rng.uniform(0.5, 5.0, int(rng.integers(2, 9))))
        for scheme in EvalScheme:
            gain = eval_sampled(monotone_rearrange(sp), scheme).ratio - eval_sampled(sp, scheme).ratio
            worst = max(worst, -gain)
            n = sp.n_cells
            for j in range(n):
                for k in range(j + 1, n):
                    if sp.values[j] > sp.values[k]:
                        worst = max(worst, -exchange_improves(sp, j, k, scheme)[1])
    return _check("rearrangement never lowers F", worst, 0.0, "sorted profiles and pairwise exchanges")


def check_gradient(rng) -> Check:
    worst = 0.0
    for _ in range(10):
        sp = SampledProfile(rng.uniform(0.5, 5.0, int(rng.integers(2, 60))))
        for scheme in EvalScheme:
            worst = max(worst, gradient_fd_error(sp, scheme))
    return _check("gradient vs central differences", worst, FD_REL_TOL)


def check_euler(rng, tol) -> Check:
    worst = 0.0
    for _ in range(20):
        sp = SampledProfile(rng.uniform(0.5, 5.0, int(rng.integers(2, 500))))
        g = discrete_gradient(sp)
        worst = max(worst, abs(float(np.dot(g, sp.values))) / float(np.dot(np.abs(g), sp.values)))
    return _check("Euler relation sum g_j y_j = 0", worst, tol)


def check_continuity(bounds, rng, tol) -> Check:
    worst = 0.0
    qs = [analytic.optimal_q(bounds), bounds.s_lo, *rng.uniform(0.01, 1.0, 20) * bounds.s_lo]
    for q in qs:
        p = analytic.ThreeSegmentParams.from_q(float(q), bounds)
        pw = analytic.three_segment_profile(float(q), bounds)
        if p.x0 > 0:
            worst = max(worst, abs(pw.left_limit(p.x0) - bounds.s_lo) / bounds.s_lo)
        worst = max(worst, abs(pw.right_limit(p.x0) - bounds.s_lo) / bounds.s_lo)
        if p.x1 > 0:
            worst = max(worst, abs(pw.left_limit(p.x1) - bounds.s_hi) / bounds.s_hi)
        worst = max(worst, abs(pw.right_limit(p.x1) - bounds.s_hi) / bounds.s_hi)
    return _check("continuity at x0 and x1", worst, tol)


def check_stationarity(bounds, tol) -> Check:
    q = analytic.optimal_q(bounds)
    slope = abs(analytic.df_dq(q, bounds)) * bounds.s_lo
    grid = np.linspace(0.0, bounds.s_lo, 2001)[1:]
    best = analytic.f_of_q(q, bounds)
    excess = max(0.0, max(analytic.f_of_q(float(x), bounds) for x in grid) - best)
    mid = analytic.optimal_profile(bounds)
    dev = 0.0
    if not bounds.degenerate:
        x0, x1 = mid.breakpoints
        xs = np.linspace(x0, x1, 52)[1:-1]
        dev = float(np.max(np.abs((1 - xs) * mid(xs) - q))) / q
    return _check("stationarity of f(q) and (1-x)S = q", max(slope, excess, dev), tol)


def check_q_star(bounds, tol) -> Check:
    q, _ = maximize_f_over_q(bounds, tol=max(tol, 1e-10))
    err = abs(q - bounds.s_lo / 2) / bounds.s_lo
    return _check("golden-section q* = s_lo/2", err, tol, f"q*={q:.12g}")


def check_kkt_sampled(bounds, n) -> Check:
    rep = verify_kkt(sample_piecewise(analytic.optimal_profile(bounds), max(n, 4000)), bounds, KKT_SAMPLED_TOL)
    q_err = abs(rep.q_estimate - bounds.s_lo / 2) / bounds.s_lo
    err = max(rep.max_interior_deviation, q_err)
    violations = rep.lower_active_violations + rep.upper_active_violations
    return _check(
        "KKT at sampled closed-form optimum",
        err if violations == 0 else math.inf,
        KKT_SAMPLED_TOL,
        f"q_estimate={rep.q_estimate:.9g}, violations={violations}",
    )


def check_optimizer(bounds, n) -> tuple[Check, Check]:
    res = projected_gradient_ascent(bounds, OptimizerOptions(n_cells=n, kkt_tol=KKT_OPTIMIZER_TOL))
    fmax = analytic.f_max(bounds)
    err = abs(res.f_value - fmax) / fmax
    agree = _check(
        "optimizer reproduces f_max",
        err if res.converged else math.inf,
        OPTIMIZER_REL_TOL,
        f"f={res.f_value:.10f}, f_max={fmax:.10f}, iterations={res.iterations}",
    )
    kkt = res.kkt
    kkt_err = kkt.max_interior_deviation
    if kkt.lower_active_violations or kkt.upper_active_violations:
        kkt_err = math.inf
    return agree, _check("KKT at optimizer output", kkt_err, KKT_OPTIMIZER_TOL)


def run_checks(bounds: SeebeckBounds, n: int = 2000, tol: float = 1e-8, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    return [
        check_scale_invariance(bounds, rng, tol),
        check_rearrangement(rng),
        check_gradient(rng),
        check_euler(rng, tol),
        check_continuity(bounds, rng, tol),
        check_stationarity(bounds, tol),
        check_q_star(bounds, tol),
        check_kkt_sampled(bounds, n),
        *check_optimizer(bounds, n),
    ]
