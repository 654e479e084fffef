"""Export to the classic TPDB TRS format with the outermost strategy."""
from __future__ import annotations

import re

from .terms import CONS, Term, Var, variables
from .trs import Trs

CONS_NAME = "cons"
_SAFE = re.compile(r"^[^\s(),\"|\\]+$")


class ExportError(ValueError):
    pass


def _render(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    name = CONS_NAME if t.symbol == CONS else t.symbol.name
    if not t.args:
        return name
    return f"{name}({', '.join(_render(a) for a in t.args)})"


def export_tpdb(trs: Trs) -> str:
    names = {f.name for f in trs.signature if f != CONS}
    if CONS_NAME in names:
        raise ExportError(f"symbol name {CONS_NAME!r} is reserved for ':'")
    var_names = sorted({v.name for r in trs.rules for v in variables(r.lhs)})
    clash = sorted(set(var_names) & names)
    if clash:
        raise ExportError(f"variable names clash with function symbols: {', '.join(clash)}")
    for name in sorted(names | set(var_names)):
        if not _SAFE.match(name) or name in ("->", "VAR", "RULES", "STRATEGY", "COMMENT"):
            raise ExportError(f"identifier {name!r} cannot be written in TPDB syntax")
    lines = [
        "(COMMENT stream constructor ':' renamed to cons)",
        f"(VAR {' '.join(var_names)})" if var_names else "(VAR)",
        "(STRATEGY OUTERMOST)",
        "(RULES",
    ]
    lines.extend(f"  {_render(r.lhs)} -> {_render(r.rhs)}" for r in trs.rules)
    lines.append(")")
    return "\n".join(lines) + "\n"
