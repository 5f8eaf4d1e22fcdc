"""A line-oriented language for rail programs.

::

    rail loops=<int> timebins=<int>
    bs t=<int> loop=<int> theta=<float> [gamma=<float>] [rho=<float>] [tau=<float>]
    prepare t=<int> (n=<int> | coherent=<float>[,<float>])
    measure t=<int>
    postselect t=<int> n=<int>
    feedforward when t=<int> n=<int> set t=<int> loop=<int> theta=<float> [gamma=..] [rho=..] [tau=..]
    encode d=<int> alpha=<float>[,<float>]

``#`` starts a comment. Beam splitters not listed are mirrors, time-bins
without ``prepare`` start in vacuum and time-bins that are neither measured
nor post-selected are traced out.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .circuits import MIRROR, BeamSplitterConfig
from .encodings import ParityQuditEncoding
from .rail import FeedForwardRule, RailLayout, Schedule


class DslError(Exception):
    code = "ERROR"
    exit_code = 10

    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 code: str | None = None):
        self.message = message
        self.line = line
        self.column = column
        if code is not None:
            self.code = code
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(f"{where}{self.code}: {message}")

    def to_dict(self) -> dict:
        return {"error": self.code, "class": type(self).__name__, "message": self.message,
                "line": self.line, "column": self.column}


class DslSyntaxError(DslError):
    code = "SYNTAX"
    exit_code = 10


class MissingLayoutError(DslError):
    code = "MISSING_LAYOUT"
    exit_code = 11


class DslSemanticError(DslError):
    code = "SEMANTIC"
    exit_code = 12


class IndexRangeError(DslSemanticError):
    code = "INDEX_RANGE"
    exit_code = 13


class DuplicateDirectiveError(DslSemanticError):
    code = "DUPLICATE"
    exit_code = 14


class CausalityError(DslSemanticError):
    code = "CAUSALITY"
    exit_code = 15


class ValueRangeError(DslSemanticError):
    code = "VALUE_RANGE"
    exit_code = 16


class UnmeasuredError(DslSemanticError):
    code = "UNMEASURED"
    exit_code = 17


# ---------------------------------------------------------------------------
# program
# ---------------------------------------------------------------------------

@dataclass
class CircuitProgram:
    loops: int
    timebins: int
    bs: dict = field(default_factory=dict)  # (t, loop) -> BeamSplitterConfig
    prepare: dict = field(default_factory=dict)  # t -> int | complex
    coherent: set = field(default_factory=set)  # time-bins prepared with a coherent amplitude
    measure: set = field(default_factory=set)
    postselect: dict = field(default_factory=dict)  # t -> n
    feedforward: list = field(default_factory=list)  # FeedForwardRule
    encode: tuple | None = None  # (d, alpha)

    def layout(self) -> RailLayout:
        grid = [[self.bs.get((t, k), MIRROR) for t in range(self.timebins)] for k in range(self.loops)]
        return RailLayout(self.loops, self.timebins, grid)

    def schedule(self) -> Schedule:
        return Schedule(prepare=dict(self.prepare), coherent=frozenset(self.coherent),
                        measured=frozenset(self.measure), postselect=dict(self.postselect),
                        rules=tuple(self.feedforward))

    def encoding(self) -> ParityQuditEncoding | None:
        if self.encode is None:
            return None
        d, alpha = self.encode
        return ParityQuditEncoding(d, alpha)

    def number_photons(self) -> int:
        return sum(n for t, n in self.prepare.items() if t not in self.coherent)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_INT = re.compile(r"[+-]?\d+\Z")
_FLOAT = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\Z")

_CONFIG_FIELDS = ("theta", "gamma", "rho", "tau")
_FIELDS = {
    "rail": (("loops", "timebins"), ()),
    "bs": (("t", "loop", "theta"), ("gamma", "rho", "tau")),
    "prepare": (("t",), ("n", "coherent")),
    "measure": (("t",), ()),
    "postselect": (("t", "n"), ()),
    "encode": (("d", "alpha"), ()),
}


@dataclass
class _Token:
    text: str
    column: int


def _tokens(line: str) -> list[_Token]:
    return [_Token(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]


def _int(tok: _Token, value: str, lineno: int) -> int:
    if not _INT.match(value):
        raise DslSyntaxError(f"expected an integer, got {value!r}", lineno, tok.column, "BAD_NUMBER")
    return int(value)


def _float(tok: _Token, value: str, lineno: int) -> float:
    if not _FLOAT.match(value):
        raise DslSyntaxError(f"expected a decimal number, got {value!r}", lineno, tok.column, "BAD_NUMBER")
    x = float(value)
    if not math.isfinite(x):
        raise DslSyntaxError(f"number {value!r} overflows", lineno, tok.column, "BAD_NUMBER")
    return x


def _complex(tok: _Token, value: str, lineno: int) -> complex:
    parts = value.split(",")
    if len(parts) > 2:
        raise DslSyntaxError(f"expected <re>[,<im>], got {value!r}", lineno, tok.column, "BAD_NUMBER")
    re_part = _float(tok, parts[0], lineno)
    im_part = _float(tok, parts[1], lineno) if len(parts) == 2 else 0.0
    return complex(re_part, im_part)


def _fields(tokens: list[_Token], lineno: int, required, optional, directive: str) -> dict:
    out: dict[str, tuple[_Token, str]] = {}
    for tok in tokens:
        key, sep, value = tok.text.partition("=")
        if not sep or not key or not value:
            raise DslSyntaxError(f"expected key=value, got {tok.text!r}", lineno, tok.column)
        if key not in required and key not in optional:
            raise DslSyntaxError(f"unknown field {key!r} for {directive}", lineno, tok.column, "UNKNOWN_FIELD")
        if key in out:
            raise DuplicateDirectiveError(f"field {key!r} given twice", lineno, tok.column)
        out[key] = (tok, value)
    for key in required:
        if key not in out:
            col = tokens[-1].column + len(tokens[-1].text) if tokens else 1
            raise DslSyntaxError(f"{directive} needs {key}=", lineno, col, "MISSING_FIELD")
    return out


def _config(fields: dict, lineno: int) -> BeamSplitterConfig:
    values = {k: _float(*fields[k], lineno) for k in _CONFIG_FIELDS if k in fields}
    return BeamSplitterConfig(values["theta"], values.get("gamma", 0.0),
                              values.get("rho", 0.0), values.get("tau", 0.0))


class _Parser:
    def __init__(self):
        self.program: CircuitProgram | None = None
        self.seen: dict = {}
        self.pending: list = []  # directives checked after the whole file is read

    def index(self, fields, key, lineno, upper, what):
        tok, value = fields[key]
        n = _int(tok, value, lineno)
        if not 0 <= n < upper:
            raise IndexRangeError(f"{what} {n} outside 0..{upper - 1}", lineno, tok.column)
        return n

    def count(self, fields, key, lineno):
        tok, value = fields[key]
        n = _int(tok, value, lineno)
        if n < 0:
            raise ValueRangeError(f"{key} must be >= 0, got {n}", lineno, tok.column)
        return n

    def once(self, key, lineno, column, what):
        if key in self.seen:
            raise DuplicateDirectiveError(f"{what} already given on line {self.seen[key]}", lineno, column)
        self.seen[key] = lineno

    def need_layout(self, lineno, column):
        if self.program is None:
            raise MissingLayoutError("the first directive must be 'rail loops=.. timebins=..'", lineno, column)
        return self.program

    def line(self, lineno: int, text: str) -> None:
        text = text.split("#", 1)[0]
        tokens = _tokens(text)
        if not tokens:
            return
        head, rest = tokens[0], tokens[1:]
        name = head.text
        if name == "feedforward":
            self.feedforward(lineno, head, rest)
            return
        if name not in _FIELDS:
            raise DslSyntaxError(f"unknown directive {name!r}", lineno, head.column, "UNKNOWN_DIRECTIVE")
        required, optional = _FIELDS[name]
        fields = _fields(rest, lineno, required, optional, name)
        if name == "rail":
            self.once("rail", lineno, head.column, "rail")
            loops = _int(*fields["loops"], lineno)
            timebins = _int(*fields["timebins"], lineno)
            for key, v in (("loops", loops), ("timebins", timebins)):
                if v < 1:
                    raise ValueRangeError(f"{key} must be >= 1", lineno, fields[key][0].column)
            self.program = CircuitProgram(loops, timebins)
            return
        prog = self.need_layout(lineno, head.column)
        if name == "bs":
            t = self.index(fields, "t", lineno, prog.timebins, "time-bin")
            k = self.index(fields, "loop", lineno, prog.loops, "loop")
            self.once(("bs", t, k), lineno, head.column, f"bs t={t} loop={k}")
            prog.bs[(t, k)] = _config(fields, lineno)
        elif name == "prepare":
            t = self.index(fields, "t", lineno, prog.timebins, "time-bin")
            if ("n" in fields) == ("coherent" in fields):
                raise DslSyntaxError("prepare needs exactly one of n= or coherent=", lineno, head.column,
                                     "MISSING_FIELD")
            self.once(("prepare", t), lineno, head.column, f"prepare t={t}")
            if "n" in fields:
                prog.prepare[t] = self.count(fields, "n", lineno)
            else:
                tok, value = fields["coherent"]
                alpha = _complex(tok, value, lineno)
                if t != 0:
                    raise ValueRangeError("coherent light enters only at time-bin 0", lineno, tok.column)
                prog.prepare[t] = alpha
                prog.coherent.add(t)
        elif name in ("measure", "postselect"):
            t = self.index(fields, "t", lineno, prog.timebins, "time-bin")
            self.once(("readout", t), lineno, head.column, f"measurement of time-bin {t}")
            if name == "measure":
                prog.measure.add(t)
            else:
                prog.postselect[t] = self.count(fields, "n", lineno)
        elif name == "encode":
            self.once("encode", lineno, head.column, "encode")
            tok, value = fields["d"]
            d = _int(tok, value, lineno)
            if d < 2:
                raise ValueRangeError("d must be >= 2", lineno, tok.column)
            tok, value = fields["alpha"]
            alpha = _complex(tok, value, lineno)
            if alpha == 0:
                raise ValueRangeError("alpha must be nonzero", lineno, tok.column)
            prog.encode = (d, alpha)

    def feedforward(self, lineno: int, head: _Token, rest: list[_Token]) -> None:
        words = [t.text for t in rest]
        if "when" not in words or "set" not in words:
            col = rest[0].column if rest else head.column + len(head.text)
            raise DslSyntaxError("feedforward needs 'when ... set ...'", lineno, col)
        iw, is_ = words.index("when"), words.index("set")
        if iw != 0 or is_ < iw:
            raise DslSyntaxError("expected 'feedforward when ... set ...'", lineno, rest[0].column)
        when = _fields(rest[1:is_], lineno, ("t", "n"), (), "feedforward when")
        what = _fields(rest[is_ + 1:], lineno, ("t", "loop", "theta"), ("gamma", "rho", "tau"),
                       "feedforward set")
        prog = self.need_layout(lineno, head.column)
        wt = self.index(when, "t", lineno, prog.timebins, "time-bin")
        wn = self.count(when, "n", lineno)
        st = self.index(what, "t", lineno, prog.timebins, "time-bin")
        loop = self.index(what, "loop", lineno, prog.loops, "loop")
        if st <= wt:
            raise CausalityError(f"time-bin {st} cannot depend on the later or equal time-bin {wt}",
                                 lineno, what["t"][0].column)
        self.once(("ff", wt, wn, st, loop), lineno, head.column, "feedforward rule")
        prog.feedforward.append(FeedForwardRule(wt, wn, st, loop, _config(what, lineno)))
        self.pending.append((lineno, when["t"][0].column, wt))

    def finish(self) -> CircuitProgram:
        if self.program is None:
            raise MissingLayoutError("no 'rail' directive", 1, 1)
        prog = self.program
        for lineno, column, wt in self.pending:
            if wt not in prog.measure and wt not in prog.postselect:
                raise UnmeasuredError(f"feed-forward reads time-bin {wt}, which is not measured", lineno, column)
        return prog


def parse(text: str) -> CircuitProgram:
    parser = _Parser()
    for lineno, line in enumerate(text.splitlines(), start=1):
        parser.line(lineno, line)
    return parser.finish()


def parse_file(path) -> CircuitProgram:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

def _num(x: float) -> str:
    return repr(float(x))


def _cnum(z: complex) -> str:
    z = complex(z)
    return _num(z.real) if z.imag == 0 else f"{_num(z.real)},{_num(z.imag)}"


def _config_text(c: BeamSplitterConfig) -> str:
    parts = [f"theta={_num(c.theta)}"]
    for name in ("gamma", "rho", "tau"):
        value = getattr(c, name)
        if value != 0:
            parts.append(f"{name}={_num(value)}")
    return " ".join(parts)


def to_text(prog: CircuitProgram) -> str:
    lines = [f"rail loops={prog.loops} timebins={prog.timebins}"]
    if prog.encode is not None:
        d, alpha = prog.encode
        lines.append(f"encode d={d} alpha={_cnum(alpha)}")
    for (t, k) in sorted(prog.bs):
        lines.append(f"bs t={t} loop={k} {_config_text(prog.bs[(t, k)])}")
    for t in sorted(prog.prepare):
        if t in prog.coherent:
            lines.append(f"prepare t={t} coherent={_cnum(prog.prepare[t])}")
        else:
            lines.append(f"prepare t={t} n={prog.prepare[t]}")
    for t in sorted(prog.measure):
        lines.append(f"measure t={t}")
    for t in sorted(prog.postselect):
        lines.append(f"postselect t={t} n={prog.postselect[t]}")
    for r in prog.feedforward:
        lines.append(f"feedforward when t={r.when_t} n={r.when_n} set t={r.set_t} loop={r.loop} "
                     f"{_config_text(r.config)}")
    return "\n".join(lines) + "\n"

