"""Group-spec files: a line-oriented format with named sections.

Example::

    # Heisenberg group over F_2[t]
    [group]
    p = 2
    n = 3

    [generators]
    x = [[1, 1, 0], [0, 1, 0], [0, 0, 1]]
    y = [[1, 0, 0], [0, 1, t], [0, 0, 1]]

    [norms]
    t_adic
    degree
    place t^2 + t + 1

    [subgroup F]
    [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    [[1, 1, 0], [0, 1, 0], [0, 0, 1]]

    [series heisenberg]
    factor 1
    factor 2
    relation 2 0

    [window]
    radius = 3
    cap = 20000

    [scales]
    1, 2, 4

    [decomp]
    n_max = 2

    [hirsch]
    bound = 3

Matrix entries are rational-function expressions over digits, ``t``,
``+ - * / ^`` and parentheses; ``relation`` rows belong to the last
``factor``.  Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field

from .algebra import AlgebraError, GroupElement, RatFunc, SingularMatrixError, check_prime
from .norms import MetricProfile, NormSpec
from .spaces import DEFAULT_CAP, is_closed
from .structure import Factor, NormalSeries

__all__ = ["SpecError", "GroupSpec", "parse_spec", "format_spec", "parse_expr", "load_spec"]


class SpecError(ValueError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line, self.col = line, col
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {col}" if col is not None else "") + ": "
        super().__init__(where + message)


@dataclass
class GroupSpec:
    p: int
    n: int
    generators: list[tuple[str, GroupElement]]
    norms: list[NormSpec]
    subgroups: list[tuple[str, list[GroupElement]]] = field(default_factory=list)
    series: list[NormalSeries] = field(default_factory=list)
    radius: int = 2
    cap: int = DEFAULT_CAP
    scales: list[int] = field(default_factory=lambda: [1, 2, 4])
    n_max: int = 2
    hirsch_bound: int | None = None

    @property
    def profile(self) -> MetricProfile:
        return MetricProfile.of(*self.norms)

    @property
    def gens(self) -> list[GroupElement]:
        return [g for _, g in self.generators]

    def digest(self) -> str:
        return hashlib.sha256(format_spec(self).encode()).hexdigest()[:16]

    def __eq__(self, other):
        return isinstance(other, GroupSpec) and format_spec(self) == format_spec(other)


# ---------------------------------------------------------------------------
# expressions

_TOKEN = re.compile(r"\s*(?:(\d+)|(t)|([-+*/^()\[\],]))")


def _lex(text: str, line: int, offset: int = 0) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            col = pos + len(text[pos:]) - len(text[pos:].lstrip()) + 1 + offset
            raise SpecError(f"unexpected character {text[col - 1 - offset]!r}", line, col)
        kind = "num" if m.group(1) else "t" if m.group(2) else m.group(3)
        col = m.start(m.lastindex) + 1 + offset
        tokens.append((kind, m.group(m.lastindex), col))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens, p: int, line: int, end_col: int):
        self.toks = tokens
        self.i = 0
        self.p = p
        self.line = line
        self.end_col = end_col

    def peek(self) -> str | None:
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def col(self) -> int:
        return self.toks[self.i][2] if self.i < len(self.toks) else self.end_col

    def error(self, msg: str):
        raise SpecError(msg, self.line, self.col())

    def take(self, kind: str):
        if self.peek() != kind:
            found = "end of line" if self.peek() is None else repr(self.toks[self.i][1])
            self.error(f"expected {kind!r}, found {found}")
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expr(self) -> RatFunc:
        val = self.term()
        while self.peek() in ("+", "-"):
            op = self.take(self.peek())[0]
            rhs = self.term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def term(self) -> RatFunc:
        val = self.unary()
        while self.peek() in ("*", "/"):
            op, _, col = self.take(self.peek())
            rhs = self.unary()
            if op == "*":
                val = val * rhs
            else:
                if rhs.is_zero():
                    raise SpecError("division by zero", self.line, col)
                val = val / rhs
        return val

    def unary(self) -> RatFunc:
        if self.peek() == "-":
            self.take("-")
            return -self.unary()
        if self.peek() == "+":
            self.take("+")
            return self.unary()
        return self.power()

    def power(self) -> RatFunc:
        base = self.atom()
        if self.peek() == "^":
            _, _, col = self.take("^")
            sign = 1
            if self.peek() == "-":
                self.take("-")
                sign = -1
            k = sign * int(self.take("num")[1])
            if k < 0 and base.is_zero():
                raise SpecError("negative power of zero", self.line, col)
            base = base**k
        return base

    def atom(self) -> RatFunc:
        kind = self.peek()
        if kind == "num":
            return RatFunc.const(int(self.take("num")[1]), self.p)
        if kind == "t":
            self.take("t")
            return RatFunc.t(self.p)
        if kind == "(":
            self.take("(")
            val = self.expr()
            self.take(")")
            return val
        found = "end of line" if kind is None else repr(self.toks[self.i][1])
        self.error(f"expected a number, t or '(', found {found}")

    def matrix(self) -> list[list[RatFunc]]:
        self.take("[")
        rows = [self.row()]
        while self.peek() == ",":
            self.take(",")
            rows.append(self.row())
        self.take("]")
        return rows

    def row(self) -> list[RatFunc]:
        self.take("[")
        row = [self.expr()]
        while self.peek() == ",":
            self.take(",")
            row.append(self.expr())
        self.take("]")
        return row

    def done(self):
        if self.peek() is not None:
            self.error(f"unexpected {self.toks[self.i][1]!r}")


def parse_expr(text: str, p: int, line: int = 1, col: int = 0) -> RatFunc:
    """Parse one rational-function expression into canonical form."""
    parser = _Parser(_lex(text, line, col), p, line, col + len(text) + 1)
    val = parser.expr()
    parser.done()
    return val


def _parse_matrix(text: str, p: int, n: int, line: int, col: int) -> GroupElement:
    parser = _Parser(_lex(text, line, col), p, line, col + len(text) + 1)
    rows = parser.matrix()
    parser.done()
    if len(rows) != n or any(len(r) != n for r in rows):
        raise SpecError(f"expected a {n}x{n} matrix", line, col + 1)
    try:
        return GroupElement(rows, p)
    except SingularMatrixError:
        raise SpecError("matrix is singular, not a group element", line, col + 1) from None


# ---------------------------------------------------------------------------
# sections

_SECTION = re.compile(r"^\[(\w+)(?:\s+([\w.-]+))?\]$")
_KEYVAL = re.compile(r"^(\w+)\s*=\s*(.*)$")


def _int(text: str, line: int, col: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise SpecError(f"expected an integer, found {text!r}", line, col) from None


def parse_spec(text: str) -> GroupSpec:
    sections: list[tuple[str, str | None, int, list[tuple[int, int, str]]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].rstrip()
        if not body.strip():
            continue
        indent = len(body) - len(body.lstrip())
        body = body.strip()
        if body.startswith("[") and not body.startswith("[["):
            m = _SECTION.match(body)
            if not m:
                raise SpecError(f"malformed section header {body!r}", lineno, indent + 1)
            sections.append((m.group(1), m.group(2), lineno, []))
            continue
        if not sections:
            raise SpecError("content before the first section", lineno, indent + 1)
        sections[-1][3].append((lineno, indent, body))

    group = [s for s in sections if s[0] == "group"]
    if len(group) != 1:
        raise SpecError("exactly one [group] section is required", group[1][2] if group else None)
    keys: dict[str, int] = {}
    where: dict[str, tuple[int, int]] = {}
    for lineno, indent, body in group[0][3]:
        m = _KEYVAL.match(body)
        if not m or m.group(1) not in ("p", "n"):
            raise SpecError("expected 'p = <prime>' or 'n = <dimension>'", lineno, indent + 1)
        where[m.group(1)] = (lineno, indent + m.start(2) + 1)
        keys[m.group(1)] = _int(m.group(2), *where[m.group(1)])
    if "p" not in keys or "n" not in keys:
        raise SpecError("[group] needs both p and n", group[0][2])
    p, n = keys["p"], keys["n"]
    try:
        check_prime(p)
    except AlgebraError as exc:
        raise SpecError(str(exc), *where["p"]) from None
    if n < 1:
        raise SpecError("dimension must be positive", *where["n"])

    spec = GroupSpec(p, n, [], [])
    seen = set()
    for name, arg, header, lines in sections:
        if name == "group":
            continue
        key = (name, arg)
        if key in seen:
            raise SpecError(f"duplicate section [{name}{' ' + arg if arg else ''}]", header)
        seen.add(key)
        if name == "generators":
            for lineno, indent, body in lines:
                m = _KEYVAL.match(body)
                if m:
                    gname, expr, col = m.group(1), m.group(2), indent + m.start(2)
                else:
                    gname, expr, col = f"g{len(spec.generators)}", body, indent
                if any(gname == k for k, _ in spec.generators):
                    raise SpecError(f"duplicate generator name {gname!r}", lineno, indent + 1)
                spec.generators.append((gname, _parse_matrix(expr, p, n, lineno, col)))
        elif name == "norms":
            for lineno, indent, body in lines:
                word, _, rest = body.partition(" ")
                if word in ("t_adic", "degree") and not rest.strip():
                    spec.norms.append(NormSpec(word))
                elif word == "place" and rest.strip():
                    col = indent + len(word) + 1 + (len(rest) - len(rest.lstrip()))
                    pi = parse_expr(rest.strip(), p, lineno, col)
                    if not pi.is_polynomial() or pi.num.degree < 1:
                        raise SpecError("place needs a nonconstant polynomial", lineno, col + 1)
                    try:
                        spec.norms.append(NormSpec.place(pi.num))
                    except ValueError as exc:
                        raise SpecError(str(exc), lineno, col + 1) from None
                else:
                    raise SpecError("expected 't_adic', 'degree' or 'place <polynomial>'", lineno, indent + 1)
        elif name == "subgroup":
            if not arg:
                raise SpecError("subgroup sections need a name: [subgroup NAME]", header)
            elems = [_parse_matrix(body, p, n, lineno, indent) for lineno, indent, body in lines]
            if not elems:
                raise SpecError(f"subgroup {arg} is empty", header)
            if len(set(elems)) != len(elems):
                raise SpecError(f"subgroup {arg} lists an element twice", header)
            if not is_closed(elems):
                raise SpecError(f"subgroup {arg} is not closed under products and inverses", header)
            spec.subgroups.append((arg, elems))
        elif name == "series":
            factors: list[Factor] = []
            for lineno, indent, body in lines:
                word, *nums = body.split()
                vals = [_int(x, lineno, indent + 1) for x in nums]
                if word == "factor" and len(vals) == 1:
                    factors.append(Factor(vals[0]))
                elif word == "relation":
                    if not factors:
                        raise SpecError("relation before any factor", lineno, indent + 1)
                    if len(vals) != factors[-1].gens:
                        raise SpecError(
                            f"relation has {len(vals)} entries, factor has {factors[-1].gens} generators",
                            lineno,
                            indent + 1,
                        )
                    factors[-1].relations.append(vals)
                else:
                    raise SpecError("expected 'factor <gens>' or 'relation <ints>'", lineno, indent + 1)
            spec.series.append(NormalSeries(factors, arg or f"series{len(spec.series)}"))
        elif name in ("window", "decomp", "hirsch"):
            allowed = {"window": ("radius", "cap"), "decomp": ("n_max",), "hirsch": ("bound",)}[name]
            for lineno, indent, body in lines:
                m = _KEYVAL.match(body)
                if not m or m.group(1) not in allowed:
                    raise SpecError(f"expected one of {', '.join(allowed)} as 'key = value'", lineno, indent + 1)
                val = _int(m.group(2), lineno, indent + m.start(2) + 1)
                if val < 0:
                    raise SpecError(f"{m.group(1)} must be nonnegative", lineno, indent + m.start(2) + 1)
                attr = {"bound": "hirsch_bound"}.get(m.group(1), m.group(1))
                setattr(spec, attr, val)
        elif name == "scales":
            vals = []
            for lineno, indent, body in lines:
                for part in body.replace(",", " ").split():
                    vals.append(_int(part, lineno, indent + 1))
            if not vals or any(v < 0 for v in vals):
                raise SpecError("scales must be a nonempty list of nonnegative integers", header)
            spec.scales = vals
        else:
            raise SpecError(f"unknown section [{name}]", header)
    if not spec.generators:
        raise SpecError("no generators given")
    if not spec.norms:
        raise SpecError("no norms given")
    try:
        spec.profile
    except ValueError as exc:
        raise SpecError(str(exc)) from None
    return spec


def load_spec(path) -> GroupSpec:
    with open(path) as fh:
        return parse_spec(fh.read())


def _mat_str(g: GroupElement) -> str:
    return "[" + ", ".join("[" + ", ".join(str(x) for x in row) + "]" for row in g.mat) + "]"


def format_spec(spec: GroupSpec) -> str:
    """Canonical text; parse_spec(format_spec(s)) == s."""
    out = ["[group]", f"p = {spec.p}", f"n = {spec.n}", "", "[generators]"]
    out += [f"{name} = {_mat_str(g)}" for name, g in spec.generators]
    out += ["", "[norms]"]
    for nspec in spec.norms:
        out.append(f"place {nspec.pi}" if nspec.kind == "finite_place" else nspec.kind)
    for name, elems in spec.subgroups:
        out += ["", f"[subgroup {name}]"] + [_mat_str(g) for g in elems]
    for s in spec.series:
        out += ["", f"[series {s.name}]"]
        for f in s.factors:
            out.append(f"factor {f.gens}")
            out += ["relation " + " ".join(str(x) for x in row) for row in f.relations]
    out += ["", "[window]", f"radius = {spec.radius}", f"cap = {spec.cap}"]
    out += ["", "[scales]", ", ".join(str(s) for s in spec.scales)]
    out += ["", "[decomp]", f"n_max = {spec.n_max}"]
    if spec.hirsch_bound is not None:
        out += ["", "[hirsch]", f"bound = {spec.hirsch_bound}"]
    return "\n".join(out) + "\n"
