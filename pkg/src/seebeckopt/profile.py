"""Seebeck profiles on the normalized rod coordinate x in [0, 1].

Two representations are provided:

* :class:`SampledProfile` -- piecewise constant on ``N`` uniform cells,
  ``values[j]`` holding the profile on ``(j/N, (j+1)/N)``.
* :class:`PiecewiseProfile` -- an exact list of constant and hyperbolic
  (``q / (1 - x)``) segments tiling ``[0, 1]``.

All objects are immutable; numpy arrays stored on them are read-only.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np


class ProfileError(ValueError):
    """Invalid profile data. ``index`` names the offending entry when known."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


def _frozen_array(values: Iterable[float]) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SeebeckBounds:
    """Box constraint ``s_lo <= S(x) <= s_hi``; ``s_lo == s_hi`` is allowed."""

    s_lo: float
    s_hi: float

    def __post_init__(self):
        lo, hi = float(self.s_lo), float(self.s_hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ProfileError(f"bounds must be finite, got ({lo}, {hi})")
        if lo <= 0:
            raise ProfileError(f"s_lo must be > 0, got {lo}")
        if hi < lo:
            raise ProfileError(f"s_hi must be >= s_lo, got s_lo={lo}, s_hi={hi}")
        object.__setattr__(self, "s_lo", lo)
        object.__setattr__(self, "s_hi", hi)

    @property
    def ratio(self) -> float:
        return self.s_hi / self.s_lo

    @property
    def log_ratio(self) -> float:
        return math.log(self.s_hi / self.s_lo)

    @property
    def degenerate(self) -> bool:
        return self.s_lo == self.s_hi

    def scaled(self, c: float) -> "SeebeckBounds":
        return SeebeckBounds(c * self.s_lo, c * self.s_hi)


@dataclass(frozen=True, eq=False)
class SampledProfile:
    """Piecewise-constant profile on ``n_cells`` uniform cells."""

    values: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.values)
        if arr.ndim != 1 or arr.size == 0:
            raise ProfileError("profile needs at least one cell")
        bad = np.flatnonzero(~np.isfinite(arr) | (arr <= 0))
        if bad.size:
            j = int(bad[0])
            raise ProfileError(f"value at index {j} must be finite and > 0, got {arr[j]}", j)
        object.__setattr__(self, "values", arr)

    @property
    def n_cells(self) -> int:
        return self.values.size

    @property
    def midpoints(self) -> np.ndarray:
        return cell_midpoints(self.n_cells)

    def __len__(self) -> int:
        return self.n_cells

    def __eq__(self, other):
        if not isinstance(other, SampledProfile):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def scaled(self, c: float) -> "SampledProfile":
        return SampledProfile(c * self.values)


@dataclass(frozen=True, eq=False)
class Perturbation:
    """Direction ``dS`` on the same grid as a :class:`SampledProfile`; any sign."""

    values: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.values)
        if arr.ndim != 1 or arr.size == 0:
            raise ProfileError("perturbation needs at least one cell")
        bad = np.flatnonzero(~np.isfinite(arr))
        if bad.size:
            j = int(bad[0])
            raise ProfileError(f"perturbation value at index {j} is not finite", j)
        object.__setattr__(self, "values", arr)

    @property
    def n_cells(self) -> int:
        return self.values.size

    @classmethod
    def unit(cls, n: int, j: int) -> "Perturbation":
        e = np.zeros(n)
        e[j] = 1.0
        return cls(e)


def cell_midpoints(n: int) -> np.ndarray:
    return (np.arange(n) + 0.5) / n


@dataclass(frozen=True)
class Constant:
    value: float

    def __call__(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.value)


@dataclass(frozen=True)
class Hyperbolic:
    """``S(x) = q / (1 - x)``."""

    q: float

    def __call__(self, x):
        return self.q / (1.0 - np.asarray(x, dtype=float))


SegmentKind = Union[Constant, Hyperbolic]


@dataclass(frozen=True)
class Segment:
    start: float
    end: float
    kind: SegmentKind

    @property
    def length(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class PiecewiseProfile:
    """Exact profile made of abutting segments covering ``[0, 1]``.

    Zero-length segments are dropped on construction. A point shared by two
    segments is evaluated on the right-hand one (the last segment owns 1).
    """

    segments: tuple[Segment, ...]

    def __post_init__(self):
        segs = tuple(s for s in self.segments if s.end != s.start)
        if not segs:
            raise ProfileError("piecewise profile has no segments of positive length")
        if segs[0].start != 0.0:
            raise ProfileError(f"first segment must start at 0, got {segs[0].start}", 0)
        if segs[-1].end != 1.0:
            raise ProfileError(f"last segment must end at 1, got {segs[-1].end}", len(segs) - 1)
        for i, s in enumerate(segs):
            if not (math.isfinite(s.start) and math.isfinite(s.end)) or s.start > s.end:
                raise ProfileError(f"segment {i} has from={s.start} > to={s.end}", i)
            if i and segs[i - 1].end != s.start:
                raise ProfileError(
                    f"segments {i - 1} and {i} do not abut: to={segs[i - 1].end}, from={s.start}", i
                )
            if isinstance(s.kind, Constant):
                v = s.kind.value
                if not (math.isfinite(v) and v > 0):
                    raise ProfileError(f"segment {i} constant value must be finite and > 0, got {v}", i)
            elif isinstance(s.kind, Hyperbolic):
                q = s.kind.q
                if not (math.isfinite(q) and q > 0):
                    raise ProfileError(f"segment {i} hyperbolic q must be finite and > 0, got {q}", i)
                if not s.end < 1.0:
                    raise ProfileError(f"segment {i} is hyperbolic and must end before x = 1", i)
            else:
                raise ProfileError(f"segment {i} has unknown kind {s.kind!r}", i)
        object.__setattr__(self, "segments", segs)

    @classmethod
    def constant(cls, value: float) -> "PiecewiseProfile":
        return cls((Segment(0.0, 1.0, Constant(value)),))

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(s.start for s in self.segments[1:])

    def _starts(self) -> list[float]:
        return [s.start for s in self.segments]

    def segment_index(self, x: float) -> int:
        return max(0, bisect.bisect_right(self._starts(), x) - 1)

    def __call__(self, x):
        """Evaluate at scalar or array ``x``."""
        xs = np.asarray(x, dtype=float)
        idx = np.searchsorted(np.array(self._starts()), xs, side="right") - 1
        idx = np.clip(idx, 0, len(self.segments) - 1)
        out = np.empty_like(xs)
        for i, seg in enumerate(self.segments):
            mask = idx == i
            if np.any(mask):
                out[mask] = seg.kind(xs[mask])
        return out if out.ndim else float(out)

    def left_limit(self, x: float) -> float:
        """Value approached from below, using the segment with ``start < x <= end``."""
        for seg in self.segments:
            if seg.start < x <= seg.end:
                return float(seg.kind(x))
        raise ValueError(f"no left limit at x={x}")

    def right_limit(self, x: float) -> float:
        """Value approached from above, using the segment with ``start <= x < end``."""
        for seg in self.segments:
            if seg.start <= x < seg.end:
                return float(seg.kind(x))
        raise ValueError(f"no right limit at x={x}")

    def scaled(self, c: float) -> "PiecewiseProfile":
        def scale(kind):
            return Constant(c * kind.value) if isinstance(kind, Constant) else Hyperbolic(c * kind.q)

        return PiecewiseProfile(tuple(Segment(s.start, s.end, scale(s.kind)) for s in self.segments))

    def value_range(self) -> tuple[float, float]:
        """Smallest and largest value over the closed segments."""
        lo, hi = math.inf, -math.inf
        for s in self.segments:
            if isinstance(s.kind, Constant):
                a = b = s.kind.value
            else:
                a, b = s.kind.q / (1.0 - s.start), s.kind.q / (1.0 - s.end)
            lo, hi = min(lo, a, b), max(hi, a, b)
        return lo, hi


def make_sampled(
    values: Sequence[float],
    bounds: SeebeckBounds | None = None,
    enforce_bounds: bool = False,
) -> SampledProfile:
    """Build a :class:`SampledProfile`, optionally checking the box constraint.

    Raises :class:`ProfileError` carrying the index of the first bad value.
    """
    sp = SampledProfile(values)
    if enforce_bounds:
        if bounds is None:
            raise ProfileError("enforce_bounds requires bounds")
        bad = np.flatnonzero((sp.values < bounds.s_lo) | (sp.values > bounds.s_hi))
        if bad.size:
            j = int(bad[0])
            raise ProfileError(
                f"value at index {j} = {sp.values[j]} outside [{bounds.s_lo}, {bounds.s_hi}]", j
            )
    return sp


def sample_piecewise(pw: PiecewiseProfile, n: int) -> SampledProfile:
    """Sample ``pw`` at the midpoints of ``n`` uniform cells."""
    if int(n) != n or n < 1:
        raise ProfileError(f"number of cells must be a positive integer, got {n}")
    return SampledProfile(pw(cell_midpoints(int(n))))


def monotone_rearrange(sp: SampledProfile) -> SampledProfile:
    """Sort the cell values non-decreasingly (stable)."""
    return SampledProfile(np.sort(sp.values, kind="stable"))
