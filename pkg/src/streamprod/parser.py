"""Reader and printer for the plain-text specification format.

    # Thue-Morse
    0 : d
    not : d -> d
    zip : s s -> s
    morse = 0 : zip(inv(morse), tail(morse))
    zip(x:σ, τ) -> x : zip(τ, σ)

Declarations give argument sorts (data first) and the result sort; ``d^2``
repeats a sort and ``x``/``×``/``,`` may separate sorts. Rules use ``->``,
``→`` or ``=``. Identifiers that are not declared are variables; their sort
is inferred from where they occur. Greek letters are spelled out in ASCII
(``σ`` is the variable ``sigma``).
"""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from .streamspec import StreamSpec
from .terms import CONS, App, Sort, Symbol, Term, Var, show, sort_of
from .trs import Rule, RuleError


class SpecSyntaxError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


_SORT_TOKEN = r"[ds](?:\^\d+)?"
_DECL = re.compile(
    r"^\s*(?P<name>[\w']+)\s*:\s*"
    rf"(?P<args>{_SORT_TOKEN}(?:(?:\s+|\s*[x×,]\s*){_SORT_TOKEN})*)"
    r"\s*(?:(?:->|→)\s*(?P<res>[ds]))?\s*$"
)
_TOKEN = re.compile(r"\s*(?:(?P<arrow>->|→)|(?P<eq>=)|(?P<punct>[(),:])|(?P<ident>[\w']+))")


def ascii_name(name: str) -> str:
    out = []
    for ch in name:
        if "GREEK" in unicodedata.name(ch, ""):
            word = unicodedata.name(ch).split()[-1].lower()
            if "CAPITAL" in unicodedata.name(ch):
                word = word.capitalize()
            out.append(word)
        else:
            out.append(ch)
    return "".join(out)


@dataclass
class SpecFile:
    symbols: List[Symbol] = field(default_factory=list)
    rules: List[Rule] = field(default_factory=list)
    comments: List[str] = field(default_factory=list)
    name: str = ""

    def symbol_table(self) -> Dict[str, Symbol]:
        return {f.name: f for f in self.symbols}

    def to_spec(self) -> StreamSpec:
        return StreamSpec.from_rules(self.symbols, self.rules, self.name)


# -- declarations ----------------------------------------------------------------

def _parse_decl(m: re.Match, lineno: int) -> Symbol:
    sorts: List[str] = []
    for tok in re.findall(_SORT_TOKEN, m.group("args")):
        base, _, exp = tok.partition("^")
        sorts.extend([base] * (int(exp) if exp else 1))
    if m.group("res") is None:
        if len(sorts) != 1:
            raise SpecSyntaxError("declaration needs '-> d' or '-> s'", lineno, 1)
        args, res = [], sorts[0]
    else:
        args, res = sorts, m.group("res")
    n = args.count("d")
    k = len(args) - n
    if args != ["d"] * n + ["s"] * k:
        raise SpecSyntaxError("data arguments must precede stream arguments", lineno, 1)
    if res == "d" and k:
        raise SpecSyntaxError("data symbols cannot take stream arguments", lineno, 1)
    name = ascii_name(m.group("name"))
    return Symbol(name, n, k, Sort.DATA if res == "d" else Sort.STREAM)


# -- terms ---------------------------------------------------------------------

Ast = tuple  # ("id", name, args|None, line, col) or ("cons", head, tail, line, col)


class _Tokens:
    def __init__(self, text: str, lineno: int, offset: int = 0):
        self.items: List[Tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                col = pos + 1 + len(text[pos:]) - len(text[pos:].lstrip())
                raise SpecSyntaxError(f"unexpected character {text[col - 1]!r}", lineno, col + offset)
            kind = m.lastgroup
            start = m.start(kind)
            self.items.append((kind, m.group(kind), start + 1 + offset))
            pos = m.end()
        self.i = 0
        self.lineno = lineno
        self.end_col = len(text) + 1 + offset

    def peek(self):
        return self.items[self.i] if self.i < len(self.items) else (None, None, self.end_col)

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, col = self.next()
        if val != value:
            got = "end of line" if val is None else repr(val)
            raise SpecSyntaxError(f"expected {value!r}, got {got}", self.lineno, col)


def _parse_expr(toks: _Tokens) -> Ast:
    head = _parse_atom(toks)
    kind, val, col = toks.peek()
    if val == ":":
        toks.next()
        tail = _parse_expr(toks)
        return ("cons", head, tail, toks.lineno, col)
    return head


def _parse_atom(toks: _Tokens) -> Ast:
    kind, val, col = toks.next()
    if val == "(":
        inner = _parse_expr(toks)
        toks.expect(")")
        return inner
    if kind != "ident":
        got = "end of line" if val is None else repr(val)
        raise SpecSyntaxError(f"expected a term, got {got}", toks.lineno, col)
    name = ascii_name(val)
    if toks.peek()[1] == "(":
        toks.next()
        args = [_parse_expr(toks)]
        while toks.peek()[1] == ",":
            toks.next()
            args.append(_parse_expr(toks))
        toks.expect(")")
        return ("id", name, args, toks.lineno, col)
    return ("id", name, None, toks.lineno, col)


class _Typer:
    def __init__(self, table: Dict[str, Symbol]):
        self.table = table
        self.vars: Dict[str, Sort] = {}

    def term(self, ast: Ast, expected: Optional[Sort]) -> Term:
        tag, a, b, line, col = ast
        if tag == "cons":
            t = App(CONS, (self.term(a, Sort.DATA), self.term(b, Sort.STREAM)))
        else:
            f = self.table.get(a)
            if f is None:
                if b is not None:
                    raise SpecSyntaxError(f"undeclared symbol {a!r}", line, col)
                if expected is None:
                    raise SpecSyntaxError(f"cannot infer the sort of variable {a!r}", line, col)
                known = self.vars.setdefault(a, expected)
                if known is not expected:
                    raise SpecSyntaxError(f"variable {a!r} used with both sorts", line, col)
                return Var(a, expected)
            args = b or []
            if len(args) != f.arity:
                raise SpecSyntaxError(
                    f"{a} expects {f.arity} argument(s), got {len(args)}", line, col
                )
            t = App(f, tuple(self.term(x, f.arg_sort(i)) for i, x in enumerate(args)))
        if expected is not None and sort_of(t) is not expected:
            raise SpecSyntaxError(f"expected a term of sort {expected}, got {show(t)}", line, col)
        return t


def parse_term(text: str, table: Union[Dict[str, Symbol], StreamSpec], sort: Optional[Sort] = None) -> Term:
    if isinstance(table, StreamSpec):
        table = {f.name: f for f in table.symbols if f != CONS}
    toks = _Tokens(text, 1)
    ast = _parse_expr(toks)
    kind, val, col = toks.peek()
    if val is not None:
        raise SpecSyntaxError(f"unexpected {val!r}", 1, col)
    return _Typer(table).term(ast, sort)


def _split_rule(line: str, lineno: int) -> Tuple[str, str, int]:
    toks = _Tokens(line, lineno)
    arrows = [(k, c) for k, v, c in toks.items if k in ("arrow", "eq")]
    if not arrows:
        raise SpecSyntaxError("expected a declaration or a rule", lineno, 1)
    if len(arrows) > 1:
        raise SpecSyntaxError("more than one arrow in rule", lineno, arrows[1][1])
    col = arrows[0][1]
    m = _TOKEN.match(line, col - 1)
    arrow_end = m.end()
    return line[: col - 1], line[arrow_end:], arrow_end


def parse_spec(text: str, name: str = "") -> SpecFile:
    out = SpecFile(name=name)
    table: Dict[str, Symbol] = {}
    pending: List[Tuple[str, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line, hash_, comment = raw.partition("#")
        if hash_:
            out.comments.append(comment.strip())
        if not line.strip():
            continue
        m = _DECL.match(line)
        if m:
            f = _parse_decl(m, lineno)
            if f.name in table and table[f.name] != f:
                raise SpecSyntaxError(f"symbol {f.name!r} declared twice", lineno, 1)
            if f.name == ":":
                continue
            table[f.name] = f
            if f not in out.symbols:
                out.symbols.append(f)
        else:
            pending.append((line, lineno))

    for line, lineno in pending:
        lhs_text, rhs_text, rhs_col = _split_rule(line, lineno)
        typer = _Typer(table)
        lhs_toks = _Tokens(lhs_text, lineno)
        lhs_ast = _parse_expr(lhs_toks)
        if lhs_toks.peek()[1] is not None:
            raise SpecSyntaxError(f"unexpected {lhs_toks.peek()[1]!r}", lineno, lhs_toks.peek()[2])
        if lhs_ast[0] == "id" and lhs_ast[1] not in table:
            raise SpecSyntaxError(
                f"left-hand side must start with a declared symbol, not {lhs_ast[1]!r}",
                lineno,
                lhs_ast[4],
            )
        lhs = typer.term(lhs_ast, None)
        rhs_toks = _Tokens(rhs_text, lineno, offset=rhs_col)
        rhs_ast = _parse_expr(rhs_toks)
        if rhs_toks.peek()[1] is not None:
            raise SpecSyntaxError(f"unexpected {rhs_toks.peek()[1]!r}", lineno, rhs_toks.peek()[2])
        rhs = typer.term(rhs_ast, sort_of(lhs))
        try:
            out.rules.append(Rule(lhs, rhs, ""))
        except RuleError as e:
            raise SpecSyntaxError(str(e), lineno, 1) from None
    out.rules = label_rules(out.rules)
    return out


def label_rules(rules: List[Rule]) -> List[Rule]:
    """Label rules by their lhs root, numbering roots with several rules."""
    counts: Dict[str, int] = {}
    for r in rules:
        counts[r.root.name] = counts.get(r.root.name, 0) + 1
    seen: Dict[str, int] = {}
    out = []
    for r in rules:
        root = r.root.name
        if counts[root] == 1:
            label = root
        else:
            seen[root] = seen.get(root, 0) + 1
            label = f"{root}#{seen[root]}"
        out.append(Rule(r.lhs, r.rhs, label))
    return out


def load_spec(path, name: Optional[str] = None) -> SpecFile:
    import pathlib

    path = pathlib.Path(path)
    return parse_spec(path.read_text(encoding="utf-8"), name or path.stem)


# -- printing ------------------------------------------------------------------

def format_spec(spec: Union[StreamSpec, SpecFile], header: str = "") -> str:
    if isinstance(spec, SpecFile):
        syms, rules = spec.symbols, spec.rules
    else:
        syms, rules = spec.ordered_symbols(), list(spec.rules)
    lines = []
    if header:
        lines.extend(f"# {h}" for h in header.splitlines())
    for f in syms:
        lines.append(f"{f.name} : {f.signature_str()}")
    lines.append("")
    for r in rules:
        lines.append(f"{show(r.lhs)} -> {show(r.rhs)}")
    return "\n".join(lines) + "\n"
