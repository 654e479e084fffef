"""JSON analysis reports and trace (de)serialisation."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Any, Dict, List, Optional

from .rewriting import ReductionTrace, TraceError, make_step
from .streamspec import StreamSpec
from .strategy import Certificate, RunResult, Verdict
from .terms import fmt_pos, parse_pos, show

SCHEMA_VERSION = 1


@dataclass
class AnalysisReport:
    spec: Dict[str, Any]
    validation: Optional[Dict[str, Any]] = None
    verdict: Optional[Dict[str, Any]] = None
    certificate: Optional[Dict[str, Any]] = None
    traces: List[Dict[str, Any]] = field(default_factory=list)
    budgets: Dict[str, Any] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, ensure_ascii=False)

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisReport":
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "AnalysisReport":
        return cls.from_dict(json.loads(text))


def schema() -> dict:
    text = resources.files(__package__).joinpath("report_schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def spec_to_dict(spec: StreamSpec, unfolded: bool = False) -> dict:
    return {
        "name": spec.name,
        "symbols": [f"{f.name} : {f.signature_str()}" for f in spec.ordered_symbols()],
        "rules": [{"label": r.label, "lhs": show(r.lhs), "rhs": show(r.rhs)} for r in spec.rules],
        "unfolded": unfolded,
    }


def trace_to_dict(trace: ReductionTrace, label: str = "", status: str = "") -> dict:
    return {
        "label": label,
        "status": status,
        "initial": show(trace.initial),
        "steps": [
            {
                "position": fmt_pos(s.position),
                "rule": s.rule.label,
                "kind": s.kind.value,
                "target": show(s.target),
            }
            for s in trace.steps
        ],
    }


def trace_from_dict(trs, d: dict, parse) -> ReductionTrace:
    """Replay a serialised trace; parse turns a term string into a Term."""
    cur = parse(d["initial"])
    trace = ReductionTrace(cur)
    for i, st in enumerate(d["steps"]):
        step = make_step(trs, cur, parse_pos(st["position"]), trs.rule(st["rule"]))
        if show(step.target) != st["target"]:
            raise TraceError(f"step {i}: replay gives {show(step.target)}, not {st['target']}")
        trace.steps.append(step)
        cur = step.target
    return trace


def run_to_dict(run: RunResult, label: str = "") -> dict:
    d = trace_to_dict(run.trace, label, run.status.value)
    if run.cycle_start is not None:
        d["cycle"] = {"start": run.cycle_start, "length": run.cycle_length}
    return d


def certificate_to_dict(cert: Optional[Certificate]) -> Optional[dict]:
    if cert is None:
        return None
    d = {
        "kind": cert.kind.value,
        "reason": cert.reason,
        "root": None if cert.root is None else show(cert.root),
        "transcript": cert.transcript,
        "prefixes": dict(cert.prefixes),
        "cycle": None,
    }
    if cert.run is not None and cert.run.cycle_start is not None:
        state = cert.run.states[cert.run.cycle_start]
        d["cycle"] = {
            "start": cert.run.cycle_start,
            "length": cert.run.cycle_length,
            "term": show(state.term),
            "queue": [fmt_pos(p) for p in state.queue],
        }
    return d


def verdict_to_dict(v: Verdict) -> dict:
    return {"outcome": v.outcome.value, "n": v.n, "notes": list(v.notes), "display": str(v)}
