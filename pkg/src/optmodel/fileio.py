"""Writer and reader for a strict subset of the LP file format.

The grammar is documented in ``docs/lp_format.md``.  Every variable is listed
in the ``Bounds`` section in index order, so reading a file back yields the
same variable order and therefore the same :meth:`ModelData.digest`.
Numbers are written with ``repr`` (the shortest string that round-trips the
binary value), with a trailing ``.0`` dropped.
"""
from __future__ import annotations

import io
import math
import os
import re
import time
from pathlib import Path
from typing import TextIO, Union

from .backend import BackendCapabilities, ReferenceBackend, SolveResults, first_unsupported
from .data import (
    BINARY,
    CONTINUOUS,
    INTEGER,
    SCALAR_AFFINE,
    ModelData,
)
from .errors import ParseError, UnknownSection, UnsupportedConstraint, UnsupportedInDialect
from .expr import AffExpr, QuadExpr
from .sets import EqualTo, GreaterEqual, LessEqual
from .status import ObjectiveSense

RESERVED = {
    "minimize", "maximize", "minimum", "maximum", "min", "max", "subject", "to", "st", "s.t.",
    "bounds", "bound", "general", "generals", "gen", "integer", "integers", "binary",
    "binaries", "bin", "end", "free", "inf", "infinity", "sos", "semi", "semis",
    "semi-continuous", "obj",
}
_NAME_OK = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*\Z")
_BAD_CHAR = re.compile(r"[^A-Za-z0-9_.]")


def fmt_number(v: float) -> str:
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def sanitize(name: str, fallback: str) -> str:
    name = _BAD_CHAR.sub("_", name) if name else fallback
    if not name or not (name[0].isalpha() or name[0] == "_"):
        name = "_" + name
    if name.lower() in RESERVED:
        name += "_"
    return name


def _unique(names: list[str]) -> list[str]:
    seen: set[str] = set()
    out = []
    for n in names:
        cand, k = n, 1
        while cand in seen:
            cand = f"{n}_{k}"
            k += 1
        seen.add(cand)
        out.append(cand)
    return out


def _linear_terms(terms, names, first: bool) -> list[str]:
    parts = []
    for v, c in terms:
        if c == 0.0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        body = names[v] if mag == 1.0 else f"{fmt_number(mag)} {names[v]}"
        if first and not parts:
            parts.append(body if sign == "+" else f"- {body}")
        else:
            parts.append(f"{sign} {body}")
    return parts


def _check_dialect(data: ModelData) -> None:
    for index, e in sorted(data.constraints.items()):
        if e.kind != SCALAR_AFFINE or not isinstance(e.set, (LessEqual, GreaterEqual, EqualTo)):
            raise UnsupportedInDialect(
                f"constraint {index} ({e.kind}, {type(e.set).__name__}) cannot be written; bridge it first"
            )


def write_lp(data: ModelData, sink: Union[str, os.PathLike, TextIO]) -> None:
    """Write ``data`` to a path or text stream."""
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="ascii", newline="\n") as fh:
            fh.write(to_lp_string(data))
    else:
        sink.write(to_lp_string(data))


def to_lp_string(data: ModelData) -> str:
    _check_dialect(data)
    live = data.live_variables()
    vnames = dict(zip(live, _unique([sanitize(data.names[v], f"x{p + 1}") for p, v in enumerate(live)])))
    entries = sorted(data.constraints.items())
    cnames = _unique([sanitize(e.name, f"c{p + 1}") for p, (_, e) in enumerate(entries)])

    out = ["Maximize" if data.sense is ObjectiveSense.MAX else "Minimize"]
    obj = data.objective
    aff = obj.affine if isinstance(obj, QuadExpr) else obj
    parts = _linear_terms(sorted(aff.terms.items()), vnames, True)
    if isinstance(obj, QuadExpr) and obj.qterms:
        q = []
        for (i, j), c in sorted(obj.qterms.items()):
            if c == 0.0:
                continue
            c2 = 2.0 * c
            sign = "-" if c2 < 0 else "+"
            mag = abs(c2)
            body = f"{vnames[i]} ^ 2" if i == j else f"{vnames[i]} * {vnames[j]}"
            if mag != 1.0:
                body = f"{fmt_number(mag)} {body}"
            q.append(body if not q and sign == "+" else f"{sign} {body}")
        if q:
            parts.append(("+ " if parts else "") + "[ " + " ".join(q) + " ] / 2")
    if aff.constant != 0.0:
        c = aff.constant
        if parts:
            parts.append(f"{'-' if c < 0 else '+'} {fmt_number(abs(c))}")
        else:
            parts.append(fmt_number(c))
    out.append("obj:" + ("" if not parts else " " + " ".join(parts)))
    out.append("Subject To")
    for (index, e), cname in zip(entries, cnames):
        f = e.function
        lhs = _linear_terms(f.terms.items(), vnames, True)
        lhs_s = " ".join(lhs) if lhs else "0"
        s = e.set
        if isinstance(s, LessEqual):
            sense, rhs = "<=", s.ub
        elif isinstance(s, GreaterEqual):
            sense, rhs = ">=", s.lb
        else:
            sense, rhs = "=", s.rhs
        out.append(f"{cname}: {lhs_s} {sense} {fmt_number(rhs - f.constant)}")
    if live:
        out.append("Bounds")
        for v in live:
            lo, hi, n = data.lb[v], data.ub[v], vnames[v]
            if lo == -math.inf and hi == math.inf:
                out.append(f"{n} free")
            elif lo == hi:
                out.append(f"{n} = {fmt_number(lo)}")
            elif hi == math.inf:
                out.append(f"{n} >= {fmt_number(lo)}")
            else:
                out.append(f"{fmt_number(lo)} <= {n} <= {fmt_number(hi)}")
    ints = [vnames[v] for v in live if data.kind[v] == INTEGER]
    bins = [vnames[v] for v in live if data.kind[v] == BINARY]
    if ints:
        out.append("General")
        out.extend(f" {n}" for n in ints)
    if bins:
        out.append("Binary")
        out.extend(f" {n}" for n in bins)
    out.append("End")
    return "\n".join(out) + "\n"


# -- reader --------------------------------------------------------------------------

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
      | (?P<name>[A-Za-z_][A-Za-z0-9_.]*)
      | (?P<op><=|>=|=<|=>|[-+*^\[\]/:=<>])
    )""",
    re.VERBOSE,
)

_SECTIONS = {
    "minimize": "min", "minimum": "min", "min": "min",
    "maximize": "max", "maximum": "max", "max": "max",
    "subject to": "st", "st": "st", "s.t.": "st", "such that": "st",
    "bounds": "bounds", "bound": "bounds",
    "general": "general", "generals": "general", "gen": "general",
    "integer": "general", "integers": "general",
    "binary": "binary", "binaries": "binary", "bin": "binary",
    "end": "end",
}
_UNSUPPORTED_SECTIONS = {"sos", "sos1", "sos2", "semi", "semis", "semi-continuous"}


class _Line:
    def __init__(self, text: str, lineno: int):
        self.text = text
        self.lineno = lineno
        self.toks: list[tuple[str, str, int]] = []
        pos = 0
        stripped = text.rstrip()
        while pos < len(stripped):
            m = _TOKEN.match(stripped, pos)
            if m is None or m.end() == pos:
                col = pos + len(stripped[pos:]) - len(stripped[pos:].lstrip()) + 1
                raise ParseError(f"unexpected character {stripped[col - 1]!r}", lineno, col)
            kind = m.lastgroup
            self.toks.append((kind, m.group(kind), m.start(kind) + 1))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of line", self.lineno, len(self.text.rstrip()) + 1)
        self.i += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        col = tok[2] if tok else len(self.text.rstrip()) + 1
        return ParseError(msg, self.lineno, col)

    def expect(self, value):
        tok = self.next()
        if tok[1] != value:
            raise self.error(f"expected {value!r}, found {tok[1]!r}", tok)
        return tok

    def done(self) -> bool:
        return self.i >= len(self.toks)


class _Reader:
    def __init__(self):
        self.data = ModelData()
        self.index: dict[str, int] = {}
        self.first_seen: list[str] = []
        self.obj_terms: list = []
        self.obj_q: dict = {}
        self.obj_const = 0.0
        self.rows: list = []  # (name, terms, sense, rhs)
        self.bounds: dict[str, list] = {}
        self.bound_order: list[str] = []
        self.kinds: dict[str, str] = {}

    def see(self, name):
        if name not in self.index:
            self.index[name] = len(self.first_seen)
            self.first_seen.append(name)

    # -- expressions --
    def number(self, line: _Line) -> float:
        sign = 1.0
        tok = line.next()
        while tok[1] in "+-" and tok[0] == "op":
            if tok[1] == "-":
                sign = -sign
            tok = line.next()
        if tok[0] == "num":
            return sign * float(tok[1])
        if tok[0] == "name" and tok[1].lower() in ("inf", "infinity"):
            return sign * math.inf
        raise line.error(f"expected a number, found {tok[1]!r}", tok)

    def expression(self, line: _Line, allow_quadratic: bool, stop=("<=", ">=", "=", "=<", "=>", "<", ">")):
        terms, quad, const = [], {}, 0.0
        first = True
        while True:
            tok = line.peek()
            if tok is None or (tok[0] == "op" and tok[1] in stop):
                break
            sign = 1.0
            if tok[0] == "op" and tok[1] in "+-":
                line.next()
                sign = -1.0 if tok[1] == "-" else 1.0
                tok = line.peek()
                if tok is None:
                    raise line.error("dangling sign")
            elif not first:
                raise line.error(f"expected '+' or '-', found {tok[1]!r}", tok)
            first = False
            if tok[0] == "op" and tok[1] == "[":
                if not allow_quadratic:
                    raise line.error("quadratic terms are only allowed in the objective", tok)
                line.next()
                for key, c in self.quadratic(line).items():
                    quad[key] = quad.get(key, 0.0) + sign * c
                continue
            if tok[0] == "num":
                line.next()
                coef = float(tok[1])
                nxt = line.peek()
                if nxt is not None and nxt[0] == "name":
                    line.next()
                    self.see(nxt[1])
                    terms.append((nxt[1], sign * coef))
                else:
                    const += sign * coef
            elif tok[0] == "name":
                line.next()
                self.see(tok[1])
                terms.append((tok[1], sign))
            else:
                raise line.error(f"unexpected {tok[1]!r}", tok)
        return terms, quad, const

    def quadratic(self, line: _Line) -> dict:
        out: dict = {}
        first = True
        while True:
            tok = line.next()
            if tok[1] == "]":
                break
            sign = 1.0
            if tok[0] == "op" and tok[1] in "+-":
                sign = -1.0 if tok[1] == "-" else 1.0
                tok = line.next()
            elif not first:
                raise line.error(f"expected '+' or '-', found {tok[1]!r}", tok)
            first = False
            coef = 1.0
            if tok[0] == "num":
                coef = float(tok[1])
                tok = line.next()
            if tok[0] != "name":
                raise line.error(f"expected a variable, found {tok[1]!r}", tok)
            a = tok[1]
            self.see(a)
            op = line.next()
            if op[1] == "^":
                line.expect("2")
                b = a
            elif op[1] == "*":
                btok = line.next()
                if btok[0] != "name":
                    raise line.error(f"expected a variable, found {btok[1]!r}", btok)
                b = btok[1]
                self.see(b)
            else:
                raise line.error(f"expected '^' or '*', found {op[1]!r}", op)
            out[(a, b)] = out.get((a, b), 0.0) + sign * coef
        line.expect("/")
        line.expect("2")
        return {k: v / 2.0 for k, v in out.items()}

    def sense(self, line: _Line) -> str:
        tok = line.next()
        if tok[0] != "op" or tok[1] not in ("<=", ">=", "="):
            raise line.error(f"expected '<=', '>=' or '=', found {tok[1]!r}", tok)
        return tok[1]

    def label(self, line: _Line):
        if len(line.toks) >= 2 and line.toks[0][0] == "name" and line.toks[1][1] == ":":
            line.i = 2
            return line.toks[0][1]
        return None

    # -- sections --
    def objective_line(self, line: _Line):
        self.label(line)
        terms, quad, const = self.expression(line, True, stop=())
        self.obj_terms.extend(terms)
        for k, v in quad.items():
            self.obj_q[k] = self.obj_q.get(k, 0.0) + v
        self.obj_const += const

    def constraint_line(self, line: _Line):
        name = self.label(line) or ""
        terms, _, const = self.expression(line, False)
        sense = self.sense(line)
        rhs = self.number(line)
        if not line.done():
            raise line.error(f"unexpected {line.peek()[1]!r} after the right-hand side")
        self.rows.append((name, terms, sense, rhs - const))

    def bound_line(self, line: _Line):
        toks = line.toks
        if len(toks) == 2 and toks[0][0] == "name" and toks[1][1].lower() == "free":
            self._set_bounds(toks[0][1], -math.inf, math.inf)
            return
        # forms: x op a | a op x | a <= x <= b
        first = line.peek()
        if first[0] == "name" and first[1].lower() not in ("inf", "infinity"):
            line.next()
            name = first[1]
            op = self.sense(line)
            val = self.number(line)
            lo, hi = self._current(name)
            if op == "<=":
                hi = val
            elif op == ">=":
                lo = val
            else:
                lo = hi = val
        else:
            val = self.number(line)
            op = self.sense(line)
            tok = line.next()
            if tok[0] != "name":
                raise line.error(f"expected a variable, found {tok[1]!r}", tok)
            name = tok[1]
            lo, hi = self._current(name)
            if op == "<=":
                lo = val
            elif op == ">=":
                hi = val
            else:
                lo = hi = val
            if not line.done():
                op2 = self.sense(line)
                val2 = self.number(line)
                if op2 == "<=":
                    hi = val2
                elif op2 == ">=":
                    lo = val2
                else:
                    raise line.error("'=' cannot follow a variable in a double bound")
        if not line.done():
            raise line.error(f"unexpected {line.peek()[1]!r}")
        self._set_bounds(name, lo, hi)

    def _current(self, name):
        return tuple(self.bounds.get(name, (0.0, math.inf)))

    def _set_bounds(self, name, lo, hi):
        self.see(name)
        if name not in self.bounds:
            self.bound_order.append(name)
        self.bounds[name] = (lo, hi)

    def finish(self, sense) -> ModelData:
        d = self.data
        order = list(self.bound_order) + [n for n in self.first_seen if n not in self.bounds]
        order += [n for n in self.kinds if n not in order]
        pos = {}
        for n in order:
            kind = self.kinds.get(n, CONTINUOUS)
            lo, hi = self.bounds.get(n, (0.0, 1.0 if kind == BINARY else math.inf))
            pos[n] = d.add_variable(lo, hi, kind, n)
        d.sense = sense

        def aff(terms, const=0.0):
            acc: dict = {}
            for n, c in terms:
                acc[pos[n]] = acc.get(pos[n], 0.0) + c
            return AffExpr(0 if acc else None, const, acc).canonicalize()

        obj = aff(self.obj_terms, self.obj_const)
        if self.obj_q:
            q: dict = {}
            for (a, b), c in self.obj_q.items():
                i, j = sorted((pos[a], pos[b]))
                q[(i, j)] = q.get((i, j), 0.0) + c
            obj = QuadExpr(obj, q).canonicalize()
        d.objective = obj
        for name, terms, sense_, rhs in self.rows:
            s = {"<=": LessEqual, ">=": GreaterEqual, "=": EqualTo}[sense_](rhs)
            d.add_constraint(aff(terms), s, name)
        return d


def read_lp(source: Union[str, os.PathLike, TextIO]) -> ModelData:
    """Parse a file written in the dialect; ``source`` is a path, a stream or the text itself."""
    if isinstance(source, os.PathLike) or (isinstance(source, str) and "\n" not in source
                                           and Path(source).exists()):
        text = Path(source).read_text(encoding="ascii")
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()
    return parse_lp(text)


def parse_lp(text: str) -> ModelData:
    r = _Reader()
    section = None
    sense = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        raw = raw.split("\\", 1)[0]
        stripped = raw.strip()
        if not stripped:
            continue
        key = " ".join(stripped.lower().split())
        if key in _SECTIONS:
            section = _SECTIONS[key]
            if section in ("min", "max"):
                if sense is not None:
                    raise ParseError("duplicate objective section", lineno, 1)
                sense = ObjectiveSense.MIN if section == "min" else ObjectiveSense.MAX
            if section == "end":
                break
            continue
        if key in _UNSUPPORTED_SECTIONS:
            raise UnknownSection(f"section {stripped!r} is not part of the dialect", lineno, 1)
        if section is None:
            raise ParseError("expected an objective section", lineno, 1)
        if section not in ("general", "binary") and " " not in key and ":" not in key \
                and re.fullmatch(r"[a-z][a-z-]*", key) and key not in ("free",):
            raise UnknownSection(f"unknown section {stripped!r}", lineno, 1)
        line = _Line(raw, lineno)
        if section in ("min", "max"):
            r.objective_line(line)
        elif section == "st":
            r.constraint_line(line)
        elif section == "bounds":
            r.bound_line(line)
        else:
            kind = INTEGER if section == "general" else BINARY
            for tok in line.toks:
                if tok[0] != "name":
                    raise line.error(f"expected a variable name, found {tok[1]!r}", tok)
                r.see(tok[1])
                r.kinds[tok[1]] = kind
    else:
        if section != "end" and sense is not None:
            raise ParseError("missing End", len(text.splitlines()) + 1, 1)
    if sense is None:
        raise ParseError("no objective section", 1, 1)
    return r.finish(sense)


# -- one-shot backend ------------------------------------------------------------------

ONESHOT_SETS = frozenset((SCALAR_AFFINE, s) for s in (LessEqual, GreaterEqual, EqualTo))


class OneShotFileBackend(ReferenceBackend):
    """Non-incremental backend: writes ``model.lp``, reads it back and solves the copy.

    The solve is delegated to the reference backend matching the model class
    (LP, MILP or convex QP).
    """

    name = "OneShotFile"
    capabilities = BackendCapabilities(
        incremental=False,
        sets=ONESHOT_SETS,
        integrality=True,
        quadratic_objective=True,
        attributes=frozenset({
            ("optimizer", "time_limit"),
            ("optimizer", "iteration_limit"),
            ("optimizer", "node_limit"),
            ("optimizer", "gap_tol"),
            ("optimizer", "tol"),
            ("optimizer", "max_iter"),
            ("optimizer", "verbose"),
        }),
        provides_duals=True,
        max_results=None,
    )

    def __init__(self, directory: Union[str, os.PathLike] = "."):
        super().__init__()
        self.directory = Path(directory)
        self.path = self.directory / "model.lp"
        self._columns: list = []
        self._rows: list = []

    def load(self, data: ModelData) -> None:
        problem = first_unsupported(data, self.capabilities)
        if problem is not None:
            if any(not isinstance(e.set, (LessEqual, GreaterEqual, EqualTo)) for e in data.constraints.values()):
                _check_dialect(data)
            raise UnsupportedConstraint(f"{self.name} does not support {problem}")
        write_lp(data, self.path)
        self.data = read_lp(self.path)
        self._columns = data.live_variables()
        self._rows = sorted(data.constraints)
        self._results = SolveResults()

    def optimize(self) -> None:
        from .solvers.bnb import MILPBackend
        from .solvers.fw import FWBackend
        from .solvers.simplex import SimplexBackend

        start = time.perf_counter()
        if not self.data.is_linear():
            inner = FWBackend()
        elif self.data.has_integers():
            inner = MILPBackend()
        else:
            inner = SimplexBackend()
        for k, v in self.options.items():
            if ("optimizer", k) in inner.capabilities.attributes:
                inner.options[k] = v
        inner.load(self.data)
        inner.optimize()
        res = inner.results()
        col = self._columns
        res.solutions = [({col[p]: v for p, v in vals.items()}, obj) for vals, obj in res.solutions]
        res.duals = {self._rows[p]: v for p, v in res.duals.items()}
        if isinstance(res.ray, dict):
            res.ray = {col[p]: v for p, v in res.ray.items()}
        res.solve_time = time.perf_counter() - start
        self._results = res


def one_shot_backend(directory: Union[str, os.PathLike]) -> OneShotFileBackend:
    return OneShotFileBackend(directory)


def roundtrip(data: ModelData) -> ModelData:
    buf = io.StringIO()
    write_lp(data, buf)
    return parse_lp(buf.getvalue())
