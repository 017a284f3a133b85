"""Problem and report documents (UTF-8 JSON).

A problem document looks like::

    {
      "version": "1",
      "points": ["a", "b", "c", "d"],
      "weights": [0.4, 0.1, 0.3, 0.2],
      "partition": [1, 1, 2, 2],
      "evidence": {
        "block_probs": [0.6, 0.4],
        "event": ["a", "c"],
        "cond_probs": [0.5, 0.5]
      },
      "oracle": {"method": "grid", "grid_resolution": 50, "seed": 0}
    }

``partition`` holds 1-based block labels, one per point.  ``evidence`` and
everything inside it except ``block_probs`` are optional, as is ``oracle``.
``event`` lists the point ids that belong to the event.

Reports use the same encoding: two-space indentation (one array element per
line), keys in a fixed order and reals in shortest round-trip form.
"""

from __future__ import annotations

import hashlib
import json
import numbers
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import DivUpdateError
from .space import EmpiricalEvidence, Event, PartitionedPrior, validate

FORMAT_VERSION = "1"
ORACLE_KEYS = ("method", "grid_resolution", "max_iterations", "step_size",
               "convergence_tol", "seed", "random_starts")


class ParseError(DivUpdateError):
    def __init__(self, message, line=None, column=None, field=None):
        self.line = line
        self.column = column
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}, column {column}")
        if field is not None:
            where.append(f"field '{field}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


@dataclass(frozen=True)
class EvidenceDoc:
    block_probs: tuple
    event: Optional[tuple] = None
    cond_probs: Optional[tuple] = None


@dataclass(frozen=True)
class ProblemDocument:
    points: tuple
    weights: tuple
    partition: tuple
    evidence: Optional[EvidenceDoc] = None
    oracle: Optional[tuple] = None
    version: str = FORMAT_VERSION

    @property
    def oracle_overrides(self) -> dict:
        return dict(self.oracle or ())


def _is_real(v):
    return isinstance(v, numbers.Real) and not isinstance(v, bool)


def _list(obj, key, kind, where):
    if key not in obj:
        raise ParseError("missing required field", field=f"{where}{key}")
    items = obj[key]
    if not isinstance(items, list):
        raise ParseError("expected a list", field=f"{where}{key}")
    for k, v in enumerate(items):
        ok = {
            "real": _is_real(v),
            "int": isinstance(v, int) and not isinstance(v, bool),
            "str": isinstance(v, str),
        }[kind]
        if not ok:
            expected = {"real": "a number", "int": "an integer", "str": "a string"}[kind]
            raise ParseError(f"expected {expected}, got {v!r}", field=f"{where}{key}[{k}]")
    if kind == "real":
        return tuple(float(v) for v in items)
    return tuple(items)


def _no_extra(obj, allowed, where):
    extra = sorted(set(obj) - set(allowed))
    if extra:
        raise ParseError(f"unknown field(s) {extra}", field=where or "<root>")


def parse_problem(text: str) -> ProblemDocument:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None
    if not isinstance(raw, dict):
        raise ParseError("top level must be an object")
    _no_extra(raw, ("version", "points", "weights", "partition", "evidence", "oracle"), "")
    version = raw.get("version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported version {version!r}", field="version")

    evidence = None
    if raw.get("evidence") is not None:
        ev = raw["evidence"]
        if not isinstance(ev, dict):
            raise ParseError("expected an object", field="evidence")
        _no_extra(ev, ("block_probs", "event", "cond_probs"), "evidence")
        event = _list(ev, "event", "str", "evidence.") if ev.get("event") is not None else None
        cond = _list(ev, "cond_probs", "real", "evidence.") if ev.get("cond_probs") is not None else None
        evidence = EvidenceDoc(_list(ev, "block_probs", "real", "evidence."), event, cond)

    oracle = None
    if raw.get("oracle") is not None:
        oc = raw["oracle"]
        if not isinstance(oc, dict):
            raise ParseError("expected an object", field="oracle")
        _no_extra(oc, ORACLE_KEYS, "oracle")
        oracle = tuple((k, oc[k]) for k in ORACLE_KEYS if k in oc)

    return ProblemDocument(
        points=_list(raw, "points", "str", ""),
        weights=_list(raw, "weights", "real", ""),
        partition=_list(raw, "partition", "int", ""),
        evidence=evidence,
        oracle=oracle,
        version=version,
    )


def problem_to_json(doc: ProblemDocument) -> dict:
    out = {
        "version": doc.version,
        "points": list(doc.points),
        "weights": list(doc.weights),
        "partition": list(doc.partition),
    }
    if doc.evidence is not None:
        ev = {"block_probs": list(doc.evidence.block_probs)}
        if doc.evidence.event is not None:
            ev["event"] = list(doc.evidence.event)
        if doc.evidence.cond_probs is not None:
            ev["cond_probs"] = list(doc.evidence.cond_probs)
        out["evidence"] = ev
    if doc.oracle is not None:
        out["oracle"] = dict(doc.oracle)
    return out


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def render_problem(doc: ProblemDocument) -> str:
    return dumps(problem_to_json(doc))


def digest(doc: ProblemDocument) -> str:
    return "sha256:" + hashlib.sha256(render_problem(doc).encode("utf-8")).hexdigest()


def document_problems(doc: ProblemDocument) -> list:
    """Structural checks on the document, then the probabilistic ones from ``space``."""
    problems = []
    n_points = len(doc.points)
    if len(doc.weights) != n_points:
        problems.append(f"weights has {len(doc.weights)} entries for {n_points} points")
    if len(doc.partition) != n_points:
        problems.append(f"partition has {len(doc.partition)} entries for {n_points} points")
    if n_points == 0:
        problems.append("no points declared")
    ev = doc.evidence
    if ev is not None and ev.event is not None:
        unknown = sorted(set(ev.event) - set(doc.points))
        if unknown:
            problems.append(f"event references undeclared point ids {unknown}")
    if doc.oracle is not None:
        from .oracle import OracleConfig

        try:
            OracleConfig(**doc.oracle_overrides)
        except (TypeError, ValueError) as exc:
            problems.append(f"oracle: {exc}")
    if problems:
        return problems
    return validate(to_prior(doc), to_evidence(doc))


def to_prior(doc: ProblemDocument) -> PartitionedPrior:
    return PartitionedPrior(doc.points, doc.weights, doc.partition)


def to_evidence(doc: ProblemDocument) -> Optional[EmpiricalEvidence]:
    ev = doc.evidence
    if ev is None:
        return None
    event = Event.from_ids(doc.points, ev.event) if ev.event is not None else None
    cond = np.array(ev.cond_probs) if ev.cond_probs is not None else None
    return EmpiricalEvidence(np.array(ev.block_probs), event, cond)
