from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from ph_bloch.calculus.holomap import Monomial, PolyMap
from ph_bloch.calculus.pmap import PHMap
from ph_bloch.errors import (
    DegreeCapExceeded,
    DimensionMismatch,
    NonFiniteInput,
    SpecParseError,
    SpecValidationError,
)

SPEC_SCHEMA = 1


class MonomialRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    component: int = Field(ge=0)
    exponents: List[int]
    re: float = 0.0
    im: float = 0.0

    @field_validator("exponents")
    @classmethod
    def _nonnegative(cls, v: List[int]) -> List[int]:
        if any(e < 0 for e in v):
            raise ValueError("exponents must be nonnegative")
        return v


class SpecMetadata(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: Optional[str] = None
    description: Optional[str] = None


class MappingSpecFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = Field(default=SPEC_SCHEMA, alias="schema")
    n: int = Field(ge=1)
    h: List[MonomialRecord] = Field(default_factory=list)
    g: List[MonomialRecord] = Field(default_factory=list)
    metadata: Optional[SpecMetadata] = None


@dataclass(frozen=True)
class MappingSpec:
    h: PolyMap
    g: PolyMap
    metadata: Optional[SpecMetadata] = None

    @property
    def n(self) -> int:
        return self.h.n

    def as_phmap(self) -> PHMap:
        return PHMap(h=self.h, g=self.g)


def _polymap(n: int, records: List[MonomialRecord], part: str) -> PolyMap:
    try:
        return PolyMap.from_terms(
            n, [Monomial(r.component, tuple(r.exponents), complex(r.re, r.im)) for r in records]
        )
    except (DimensionMismatch, DegreeCapExceeded, NonFiniteInput) as e:
        field = part if "term" not in e.context else "%s[%d]" % (part, e.context["term"])
        raise SpecValidationError(e.message, field=field, cause=e.code, **e.context) from e


def parse_spec(source: Union[str, Path]) -> MappingSpec:
    """
    Mapping spec from a path or from JSON text (anything starting with '{' is text).
    Malformed JSON -> SpecParseError(line, column); bad content -> SpecValidationError(field).
    """
    if isinstance(source, Path) or not source.lstrip().startswith("{"):
        path = Path(source)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise SpecParseError("cannot read mapping spec", path=str(path), reason=str(e)) from e
    else:
        text = source

    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecParseError("malformed mapping spec: %s" % e.msg, line=e.lineno, column=e.colno) from e

    try:
        doc = MappingSpecFile.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(p) for p in first.get("loc", ()))
        raise SpecValidationError(first.get("msg", "invalid mapping spec"), field=field, errors=e.error_count()) from e

    return MappingSpec(
        h=_polymap(doc.n, doc.h, "h"),
        g=_polymap(doc.n, doc.g, "g"),
        metadata=doc.metadata,
    )


def _records(P: PolyMap) -> List[Dict[str, Any]]:
    return [
        {
            "component": t.component,
            "exponents": list(t.exponents),
            "re": float(t.coefficient.real),
            "im": float(t.coefficient.imag),
        }
        for t in P.terms
    ]


def spec_document(h: PolyMap, g: PolyMap, metadata: Optional[SpecMetadata] = None) -> Dict[str, Any]:
    doc: Dict[str, Any] = {"schema": SPEC_SCHEMA, "n": h.n, "h": _records(h), "g": _records(g)}
    if metadata is not None:
        doc["metadata"] = metadata.model_dump(exclude_none=True)
    return doc


def serialize_spec(h: PolyMap, g: PolyMap, metadata: Optional[SpecMetadata] = None) -> str:
    """Canonical text: terms in canonical order, sorted keys, fixed indentation."""
    if h.n != g.n:
        raise DimensionMismatch("h and g must have the same dimension", h=h.n, g=g.n)
    return json.dumps(spec_document(h, g, metadata), sort_keys=True, indent=2) + "\n"
