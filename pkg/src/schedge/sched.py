"""The scheduling language: parse, validate, and enumerate schedules.

A schedule file is a sequence of statements::

    SimpleGPUSchedule s1;
    SimpleGPUSchedule s2 = s1;            // deep copy
    s1.configDirection(PUSH);
    s2.configDirection(PULL, BITMAP);
    s2.configLoadBalance(EDGE_ONLY, BLOCKED, 4096);
    s2.configFrontierCreation(UNFUSED_BITMAP);
    s2.configDeduplication(DISABLED);
    s1.configDelta(16);
    s1.configKernelFusion(ENABLED);
    HybridGPUSchedule h1(INPUT_VERTEXSET_SIZE, "argv[3]", s1, s2);
    apply("s0:s1", h1);

``//`` starts a comment. ``apply`` binds a schedule object to a labeled
call site of the algorithm being run ("s0" for the iteration loop, "s0:s1"
for the edge apply inside it).
"""

from __future__ import annotations

import copy
import itertools
import re
from dataclasses import dataclass, field

PUSH = "PUSH"
PULL = "PULL"

DIRECTIONS = (PUSH, PULL)
PULL_REPRS = ("BOOLMAP", "BITMAP")
LOAD_BALANCES = ("VERTEX_BASED", "CM", "WM", "STRICT", "EDGE_ONLY", "ETWC", "TWC")
FRONTIER_CREATIONS = ("FUSED", "UNFUSED_BOOLMAP", "UNFUSED_BITMAP")
DEDUP_STRATEGIES = ("MONOTONIC_COUNTERS", "BITMAP", "BOOLMAP")
BLOCKING_TOKENS = ("UNBLOCKED", "BLOCKED")
ONOFF = ("ENABLED", "DISABLED")
HYBRID_CRITERIA = ("INPUT_VERTEXSET_SIZE", "VERTEXSET_SIZE")

_ARGV_RE = re.compile(r"^argv\[(\d+)\]$")


class ScheduleError(ValueError):
    pass


class ParseError(ScheduleError):
    def __init__(self, message, line, col):
        super().__init__("line %d, col %d: %s" % (line, col, message))
        self.line = line
        self.col = col


@dataclass
class Schedule:
    """One edge-apply configuration; defaults are the engine defaults."""

    direction: str = PUSH
    pull_frontier_repr: str = "BOOLMAP"
    load_balance: str = "VERTEX_BASED"
    blocking: bool = False
    blocking_size: int | None = None  # None -> sized from the cache budget
    frontier_creation: str = "FUSED"
    dedup: bool = True
    dedup_strategy: str = "MONOTONIC_COUNTERS"
    delta: int = 1
    kernel_fusion: bool = False

    def copy(self):
        return copy.deepcopy(self)


@dataclass
class HybridSchedule:
    """Two alternatives selected per round by input-frontier size.

    ``s2`` runs when ``|input| > threshold * num_vertices``, otherwise
    ``s1``. The threshold is a fraction in (0, 1) or an unresolved
    ``"argv[k]"`` placeholder filled in from the command line.
    """

    criteria: str = "INPUT_VERTEXSET_SIZE"
    threshold: float | str = 0.15
    s1: Schedule = field(default_factory=Schedule)
    s2: Schedule = field(default_factory=Schedule)

    def resolved(self):
        return not isinstance(self.threshold, str)


@dataclass
class ScheduleProgram:
    """Label -> schedule bindings produced by the parser."""

    bindings: dict = field(default_factory=dict)

    def binding(self, label):
        return self.bindings.get(label)

    def resolve_args(self, argv_values):
        """Fill ``argv[k]`` thresholds from ``{k: value}``; errors if any
        placeholder stays unresolved."""
        for label, bound in self.bindings.items():
            if isinstance(bound, HybridSchedule) and isinstance(bound.threshold, str):
                m = _ARGV_RE.match(bound.threshold)
                k = int(m.group(1))
                if k not in argv_values:
                    raise ScheduleError(
                        "binding %r needs argv[%d]; pass --sched-arg %d=<value>"
                        % (label, k, k))
                bound.threshold = float(argv_values[k])
        return self

    def validate_bound_labels(self, known_labels):
        for label in self.bindings:
            if label not in known_labels:
                raise ScheduleError(
                    "label %r is not exposed by this algorithm (labels: %s)"
                    % (label, ", ".join(sorted(known_labels))))


def validate(s):
    """List of invariant violations; empty means the schedule is runnable."""
    problems = []
    if s.direction not in DIRECTIONS:
        problems.append("unknown direction %r" % s.direction)
    if s.pull_frontier_repr not in PULL_REPRS:
        problems.append("unknown pull frontier representation %r" % s.pull_frontier_repr)
    if s.load_balance not in LOAD_BALANCES:
        problems.append("unknown load balance %r" % s.load_balance)
    if s.frontier_creation not in FRONTIER_CREATIONS:
        problems.append("unknown frontier creation %r" % s.frontier_creation)
    if s.dedup_strategy not in DEDUP_STRATEGIES:
        problems.append("unknown dedup strategy %r" % s.dedup_strategy)
    if s.blocking and s.load_balance != "EDGE_ONLY":
        problems.append("blocking requires EDGE_ONLY load balancing")
    if s.blocking_size is not None and s.blocking_size < 1:
        problems.append("blocking_size must be >= 1")
    if s.delta < 1:
        problems.append("delta must be >= 1")
    return problems


def validate_hybrid(hs):
    problems = []
    if hs.criteria != "INPUT_VERTEXSET_SIZE":
        problems.append("unknown hybrid criteria %r" % hs.criteria)
    if hs.resolved() and not 0.0 < hs.threshold < 1.0:
        problems.append("threshold must lie in (0, 1)")
    problems += ["s1: " + p for p in validate(hs.s1)]
    problems += ["s2: " + p for p in validate(hs.s2)]
    return problems


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<comment>//[^\n]*)
      | (?P<string>"[^"\n]*")
      | (?P<number>\d+\.\d+|\.\d+|\d+)
      | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<sym>[();,=.])
    """,
    re.VERBOSE,
)


def _tokenize(text):
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError("unexpected character %r" % text[pos], line, col)
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            tokens.append((kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        pos = m.end()
    tokens.append(("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0
        self.vars = {}
        self.program = ScheduleProgram()

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind, value=None):
        tok = self.next()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            raise ParseError("expected %r, found %r" % (want, tok[1] or "<eof>"),
                             tok[2], tok[3])
        return tok

    def parse(self):
        while self.peek()[0] != "eof":
            self.statement()
        return self.program

    def statement(self):
        kind, value, line, col = self.peek()
        if kind != "ident":
            raise ParseError("expected a statement, found %r" % value, line, col)
        if value == "SimpleGPUSchedule":
            self.simple_decl()
        elif value == "HybridGPUSchedule":
            self.hybrid_decl()
        elif value == "apply":
            self.apply_stmt()
        else:
            self.config_call()

    def simple_decl(self):
        self.next()
        name = self.expect("ident")[1]
        kind, value, line, col = self.peek()
        if kind == "sym" and value == "=":
            self.next()
            src = self.expect("ident")
            other = self.vars.get(src[1])
            if not isinstance(other, Schedule):
                raise ParseError("cannot copy from %r" % src[1], src[2], src[3])
            self.vars[name] = other.copy()
        else:
            self.vars[name] = Schedule()
        self.expect("sym", ";")

    def hybrid_decl(self):
        self.next()
        name = self.expect("ident")[1]
        self.expect("sym", "(")
        crit = self.expect("ident")
        if crit[1] not in HYBRID_CRITERIA:
            raise ParseError("invalid hybrid criteria %r" % crit[1], crit[2], crit[3])
        self.expect("sym", ",")
        threshold = self.threshold_arg()
        self.expect("sym", ",")
        a = self.schedule_ref()
        self.expect("sym", ",")
        b = self.schedule_ref()
        self.expect("sym", ")")
        self.expect("sym", ";")
        self.vars[name] = HybridSchedule("INPUT_VERTEXSET_SIZE", threshold,
                                         a.copy(), b.copy())

    def threshold_arg(self):
        kind, value, line, col = self.next()
        if kind == "number":
            return float(value)
        if kind == "string":
            inner = value[1:-1]
            if _ARGV_RE.match(inner) is None:
                raise ParseError("threshold string must look like \"argv[k]\"", line, col)
            return inner
        raise ParseError("expected a threshold, found %r" % value, line, col)

    def schedule_ref(self):
        tok = self.expect("ident")
        bound = self.vars.get(tok[1])
        if not isinstance(bound, Schedule):
            raise ParseError("unknown SimpleGPUSchedule %r" % tok[1], tok[2], tok[3])
        return bound

    def apply_stmt(self):
        self.next()
        self.expect("sym", "(")
        label_tok = self.expect("string")
        label = label_tok[1][1:-1]
        self.expect("sym", ",")
        tok = self.expect("ident")
        bound = self.vars.get(tok[1])
        if bound is None:
            raise ParseError("unknown schedule %r" % tok[1], tok[2], tok[3])
        self.expect("sym", ")")
        self.expect("sym", ";")
        if label in self.program.bindings:
            raise ParseError("label %r bound twice" % label,
                             label_tok[2], label_tok[3])
        self.program.bindings[label] = copy.deepcopy(bound)

    def config_call(self):
        tok = self.expect("ident")
        target = self.vars.get(tok[1])
        if not isinstance(target, Schedule):
            raise ParseError("unknown SimpleGPUSchedule %r" % tok[1], tok[2], tok[3])
        self.expect("sym", ".")
        fn = self.expect("ident")
        self.expect("sym", "(")
        args = []
        if not (self.peek()[0] == "sym" and self.peek()[1] == ")"):
            args.append(self.next())
            while self.peek()[0] == "sym" and self.peek()[1] == ",":
                self.next()
                args.append(self.next())
        self.expect("sym", ")")
        self.expect("sym", ";")
        _apply_config(target, fn, args)


def _enum_arg(tok, allowed, what):
    kind, value, line, col = tok
    if kind != "ident" or value not in allowed:
        raise ParseError("invalid %s value %r (one of %s)"
                         % (what, value, ", ".join(allowed)), line, col)
    return value


def _int_arg(tok, what):
    kind, value, line, col = tok
    if kind != "number" or "." in value:
        raise ParseError("%s expects an integer, found %r" % (what, value), line, col)
    return int(value)


def _apply_config(s, fn_tok, args):
    fn, line, col = fn_tok[1], fn_tok[2], fn_tok[3]

    def arity(lo, hi=None):
        hi = lo if hi is None else hi
        if not lo <= len(args) <= hi:
            raise ParseError("%s takes %s argument(s), got %d"
                             % (fn, lo if lo == hi else "%d-%d" % (lo, hi), len(args)),
                             line, col)

    if fn == "configDirection":
        arity(1, 2)
        s.direction = _enum_arg(args[0], DIRECTIONS, "direction")
        if len(args) == 2:
            s.pull_frontier_repr = _enum_arg(args[1], PULL_REPRS, "frontier representation")
    elif fn == "configLoadBalance":
        arity(1, 3)
        s.load_balance = _enum_arg(args[0], LOAD_BALANCES, "load balance")
        if len(args) >= 2:
            s.blocking = _enum_arg(args[1], BLOCKING_TOKENS, "blocking") == "BLOCKED"
        if len(args) == 3:
            s.blocking_size = _int_arg(args[2], "blocking size")
    elif fn == "configFrontierCreation":
        arity(1)
        s.frontier_creation = _enum_arg(args[0], FRONTIER_CREATIONS, "frontier creation")
    elif fn == "configDeduplication":
        arity(1, 2)
        s.dedup = _enum_arg(args[0], ONOFF, "deduplication") == "ENABLED"
        if len(args) == 2:
            s.dedup_strategy = _enum_arg(args[1], DEDUP_STRATEGIES, "dedup strategy")
    elif fn == "configDelta":
        arity(1)
        value = _int_arg(args[0], "delta")
        if value < 1:
            raise ParseError("delta must be >= 1", line, col)
        s.delta = value
    elif fn == "configKernelFusion":
        arity(1)
        s.kernel_fusion = _enum_arg(args[0], ONOFF, "kernel fusion") == "ENABLED"
    else:
        raise ParseError("unknown config function %r" % fn, line, col)


def parse_schedule(text):
    """Parse schedule-language text into a :class:`ScheduleProgram`."""
    return _Parser(text).parse()


def load_schedule_file(path):
    with open(path) as fh:
        return parse_schedule(fh.read())


# ---------------------------------------------------------------------------
# Pretty printing
# ---------------------------------------------------------------------------

def _emit_simple(name, s, out):
    out.append("SimpleGPUSchedule %s;" % name)
    out.append("%s.configDirection(%s, %s);" % (name, s.direction, s.pull_frontier_repr))
    if s.blocking_size is not None:
        out.append("%s.configLoadBalance(%s, %s, %d);"
                   % (name, s.load_balance,
                      "BLOCKED" if s.blocking else "UNBLOCKED", s.blocking_size))
    else:
        out.append("%s.configLoadBalance(%s, %s);"
                   % (name, s.load_balance, "BLOCKED" if s.blocking else "UNBLOCKED"))
    out.append("%s.configFrontierCreation(%s);" % (name, s.frontier_creation))
    out.append("%s.configDeduplication(%s, %s);"
               % (name, "ENABLED" if s.dedup else "DISABLED", s.dedup_strategy))
    out.append("%s.configDelta(%d);" % (name, s.delta))
    out.append("%s.configKernelFusion(%s);"
               % (name, "ENABLED" if s.kernel_fusion else "DISABLED"))


def pretty_print(program):
    """Canonical text for a program; parsing it back reproduces the program."""
    out = []
    counter = itertools.count(1)
    for label, bound in program.bindings.items():
        if isinstance(bound, HybridSchedule):
            a = "s%d" % next(counter)
            b = "s%d" % next(counter)
            h = "h%d" % next(counter)
            _emit_simple(a, bound.s1, out)
            _emit_simple(b, bound.s2, out)
            thr = ('"%s"' % bound.threshold if isinstance(bound.threshold, str)
                   else repr(bound.threshold))
            out.append("HybridGPUSchedule %s(%s, %s, %s, %s);"
                       % (h, bound.criteria, thr, a, b))
            out.append('apply("%s", %s);' % (label, h))
        else:
            name = "s%d" % next(counter)
            _emit_simple(name, bound, out)
            out.append('apply("%s", %s);' % (label, name))
    return "\n".join(out) + ("\n" if out else "")


# ---------------------------------------------------------------------------
# Space enumeration
# ---------------------------------------------------------------------------

# Dimension name -> (field, values). ``delta`` is a numeric parameter, not an
# enumerated dimension; tuners sweep it separately.
DIMENSIONS = {
    "direction": ("direction", DIRECTIONS),
    "pull_frontier_repr": ("pull_frontier_repr", PULL_REPRS),
    "load_balance": ("load_balance", LOAD_BALANCES),
    "blocking": ("blocking", (False, True)),
    "frontier_creation": ("frontier_creation", FRONTIER_CREATIONS),
    "dedup": ("dedup", (True, False)),
    "dedup_strategy": ("dedup_strategy", DEDUP_STRATEGIES),
    "kernel_fusion": ("kernel_fusion", (False, True)),
}


@dataclass
class ScheduleSpace:
    dimensions: dict
    raw_count: int
    schedules: list

    @property
    def valid_count(self):
        return len(self.schedules)


def enumerate_space(dimensions=None):
    """Cross product over the selected dimensions, invalid combos filtered.

    ``dimensions`` is an iterable of dimension names (default: all). Values
    not covered by the selection stay at their defaults.
    """
    if dimensions is None:
        names = list(DIMENSIONS)
    else:
        names = list(dimensions)
        for name in names:
            if name not in DIMENSIONS:
                raise ScheduleError("unknown schedule dimension %r" % name)
    dims = {name: DIMENSIONS[name] for name in names}
    raw = 1
    for _, values in dims.values():
        raw *= len(values)
    schedules = []
    for combo in itertools.product(*(values for _, values in dims.values())):
        s = Schedule()
        for (attr, _), value in zip(dims.values(), combo):
            setattr(s, attr, value)
        if not validate(s):
            schedules.append(s)
    return ScheduleSpace({n: list(v) for n, (_, v) in dims.items()}, raw, schedules)


def schedule_key(s):
    """Stable short text for CSV/trial output."""
    parts = [s.direction, s.load_balance, s.frontier_creation,
             "DEDUP" if s.dedup else "NODEDUP", s.dedup_strategy,
             "BLOCKED" if s.blocking else "UNBLOCKED",
             "FUSEDK" if s.kernel_fusion else "NOFUSE"]
    if s.direction == PULL:
        parts.insert(1, s.pull_frontier_repr)
    if s.delta != 1:
        parts.append("delta%d" % s.delta)
    return "/".join(parts)
