"""JSON profile documents and CSV formatting.

A document is either::

    {"kind": "piecewise",
     "segments": [{"from": 0, "to": 0.5, "type": "constant", "value": 1},
                  {"from": 0.5, "to": 0.75, "type": "hyperbolic", "q": 0.5},
                  {"from": 0.75, "to": 1, "type": "constant", "value": 2}],
     "bounds": {"s0": 1, "s1": 2}}

or ``{"kind": "sampled", "values": [...], "bounds": {...}}``. ``bounds`` is
optional; unknown fields are rejected.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError

from .profile import (
    Constant,
    Hyperbolic,
    PiecewiseProfile,
    ProfileError,
    SampledProfile,
    Segment,
    SeebeckBounds,
    make_sampled,
)

# relative slack for bound checks on hyperbolic end values, which are
# recomputed from rounded breakpoints
BOUND_SLACK = 1e-12


class DocumentError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", strict=True, populate_by_name=True)


class BoundsDoc(_Strict):
    s0: float
    s1: float


class ConstantSegmentDoc(_Strict):
    start: float = Field(alias="from")
    to: float
    type: Literal["constant"]
    value: float


class HyperbolicSegmentDoc(_Strict):
    start: float = Field(alias="from")
    to: float
    type: Literal["hyperbolic"]
    q: float


SegmentDoc = Annotated[Union[ConstantSegmentDoc, HyperbolicSegmentDoc], Field(discriminator="type")]


class PiecewiseDoc(_Strict):
    kind: Literal["piecewise"]
    segments: list[SegmentDoc]
    bounds: Optional[BoundsDoc] = None


class SampledDoc(_Strict):
    kind: Literal["sampled"]
    values: list[float]
    bounds: Optional[BoundsDoc] = None


ProfileDocument = Annotated[Union[PiecewiseDoc, SampledDoc], Field(discriminator="kind")]
_adapter = TypeAdapter(ProfileDocument)


def _format_validation(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<document>"
        lines.append(f"{loc}: {e['msg']}")
    return "; ".join(lines)


def parse_document(text: str) -> PiecewiseDoc | SampledDoc:
    try:
        return _adapter.validate_json(text)
    except ValidationError as exc:
        raise DocumentError(_format_validation(exc)) from None


def document_bounds(doc) -> SeebeckBounds | None:
    if doc.bounds is None:
        return None
    try:
        return SeebeckBounds(doc.bounds.s0, doc.bounds.s1)
    except ProfileError as exc:
        raise DocumentError(f"bounds: {exc}") from None


def to_profile(doc) -> PiecewiseProfile | SampledProfile:
    """Convert a parsed document to a profile, enforcing ``bounds`` if present."""
    bounds = document_bounds(doc)
    if isinstance(doc, SampledDoc):
        try:
            return make_sampled(doc.values, bounds, enforce_bounds=bounds is not None)
        except ProfileError as exc:
            where = f"values.{exc.index}" if exc.index is not None else "values"
            raise DocumentError(f"{where}: {exc}") from None

    segs = []
    for s in doc.segments:
        kind = Constant(s.value) if isinstance(s, ConstantSegmentDoc) else Hyperbolic(s.q)
        segs.append(Segment(s.start, s.to, kind))
    try:
        pw = PiecewiseProfile(tuple(segs))
    except ProfileError as exc:
        where = f"segments.{exc.index}" if exc.index is not None else "segments"
        raise DocumentError(f"{where}: tiling error: {exc}") from None
    if bounds is not None:
        lo, hi = pw.value_range()
        if lo < bounds.s_lo * (1 - BOUND_SLACK) or hi > bounds.s_hi * (1 + BOUND_SLACK):
            raise DocumentError(
                f"segments: profile range [{lo}, {hi}] violates bounds [{bounds.s_lo}, {bounds.s_hi}]"
            )
    return pw


def load_profile(path) -> PiecewiseProfile | SampledProfile:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc.strerror}") from None
    return to_profile(parse_document(text))


def _bounds_dict(bounds: SeebeckBounds | None) -> dict:
    return {} if bounds is None else {"bounds": {"s0": bounds.s_lo, "s1": bounds.s_hi}}


def piecewise_document(pw: PiecewiseProfile, bounds: SeebeckBounds | None = None) -> dict:
    segments = []
    for s in pw.segments:
        if isinstance(s.kind, Constant):
            segments.append({"from": s.start, "to": s.end, "type": "constant", "value": s.kind.value})
        else:
            segments.append({"from": s.start, "to": s.end, "type": "hyperbolic", "q": s.kind.q})
    return {"kind": "piecewise", "segments": segments, **_bounds_dict(bounds)}


def sampled_document(sp: SampledProfile, bounds: SeebeckBounds | None = None) -> dict:
    return {"kind": "sampled", "values": [float(v) for v in sp.values], **_bounds_dict(bounds)}


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def fmt_number(v) -> str:
    """17 significant digits, '.' decimal point, no grouping."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    return format(float(v), ".17g")


def dumps_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt_number(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()
