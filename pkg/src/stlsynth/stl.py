"""STL fragment: predicates, AST, text parser, sample-based monitor.

The supported fragment is a finite conjunction of G/F-windowed predicates
(negation over predicates only); Until is accepted by the parser and removed
by :func:`rewrite_until` before anything downstream sees it. Satisfaction is
decided at sample instants only.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    HorizonTooShort,
    MalformedInterval,
    OutOfWindow,
    StlSyntaxError,
    UnknownRegion,
    UnsupportedFragment,
)
from .geometry import Box, contains_point

_TIME_TOL = 1e-9


# ---------------------------------------------------------------------------
# Predicates (each decides h(x) >= 0 at a single state)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InSet:
    """State projection lies in a named convex region."""

    region_name: str
    region: object  # Box / Zonotope / ConstrainedZonotope
    projection: tuple

    def holds(self, state, tol=1e-9):
        p = np.asarray(state, float)[list(self.projection)]
        if isinstance(self.region, Box):
            return self.region.contains(p, tol)
        return contains_point(self.region, p, tol)

    def text(self):
        return f"in({self.region_name})"


@dataclass(frozen=True)
class NotInObstacles:
    """Position projection avoids every obstacle box."""

    projection: tuple
    obstacles: tuple  # of Box

    def holds(self, state, tol=1e-9):
        p = np.asarray(state, float)[list(self.projection)]
        # Obstacles are closed: touching the boundary counts as a hit, up to
        # the shared tolerance.
        return not any(o.contains(p, -tol) for o in self.obstacles)

    def text(self):
        return "avoid(obstacles)"


@dataclass(frozen=True)
class InfNormBall:
    """Infinity-norm ball membership of a state projection."""

    projection: tuple
    center: tuple
    radius: float

    def holds(self, state, tol=1e-9):
        p = np.asarray(state, float)[list(self.projection)]
        return float(np.abs(p - np.asarray(self.center)).max()) <= self.radius + tol

    def as_box(self):
        c = np.asarray(self.center, float)
        return Box(c - self.radius, c + self.radius)

    def text(self):
        idx = ",".join(str(i) for i in self.projection)
        vals = ",".join(_fmt(v) for v in self.center)
        return f"norm_inf(x[{idx}] - ({vals})) <= {_fmt(self.radius)}"


def _fmt(v):
    s = f"{float(v):.12g}"
    return s


# ---------------------------------------------------------------------------
# Formula AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Top:
    def text(self):
        return "true"


@dataclass(frozen=True)
class Pred:
    predicate: object

    def text(self):
        return self.predicate.text()


@dataclass(frozen=True)
class Not:
    child: "Pred"

    def text(self):
        return f"!{self.child.text()}"


@dataclass(frozen=True)
class And:
    children: tuple

    def text(self):
        return " && ".join(
            f"({c.text()})" if isinstance(c, (G, F, U)) else c.text() for c in self.children
        )


@dataclass(frozen=True)
class G:
    a: float
    b: float
    child: object

    def __post_init__(self):
        _check_interval(self.a, self.b)

    def text(self):
        return f"G[{_fmt(self.a)},{_fmt(self.b)}] {_child_text(self.child)}"


@dataclass(frozen=True)
class F:
    a: float
    b: float
    child: object

    def __post_init__(self):
        _check_interval(self.a, self.b)

    def text(self):
        return f"F[{_fmt(self.a)},{_fmt(self.b)}] {_child_text(self.child)}"


@dataclass(frozen=True)
class U:
    a: float
    b: float
    left: object
    right: object

    def __post_init__(self):
        _check_interval(self.a, self.b)

    def text(self):
        return f"({_child_text(self.left)}) U[{_fmt(self.a)},{_fmt(self.b)}] ({_child_text(self.right)})"


def _check_interval(a, b):
    if not (0 <= a <= b):
        raise MalformedInterval(f"interval [{a}, {b}] requires 0 <= a <= b")


def _child_text(child):
    if isinstance(child, (And, U)):
        return f"({child.text()})"
    return child.text()


def to_text(formula) -> str:
    return formula.text()


def horizon(formula) -> float:
    """Largest absolute time the formula can reference."""
    if isinstance(formula, (Top, Pred, Not)):
        return 0.0
    if isinstance(formula, And):
        return max((horizon(c) for c in formula.children), default=0.0)
    if isinstance(formula, (G, F)):
        return formula.b + horizon(formula.child)
    if isinstance(formula, U):
        return formula.b + max(horizon(formula.left), horizon(formula.right))
    raise UnsupportedFragment(f"unknown node {type(formula)!r}")


# ---------------------------------------------------------------------------
# Region table + parser
# ---------------------------------------------------------------------------

@dataclass
class RegionTable:
    """Named regions a formula can reference.

    ``regions`` maps name -> (set, projection indices, kind); kind is
    "statespace" for the ambient state constraint and "region" otherwise.
    ``obstacles`` back the avoid(obstacles) predicate on ``obstacle_projection``.
    """

    regions: dict = field(default_factory=dict)
    obstacles: tuple = ()
    obstacle_projection: tuple = ()

    def add(self, name, region, projection, kind="region"):
        self.regions[name] = (region, tuple(projection), kind)

    def lookup(self, name):
        if name not in self.regions:
            raise UnknownRegion(f"region {name!r} is not defined in the scenario")
        return self.regions[name]


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>-?\d+(?:\.\d*)?(?:[eE][-+]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op><=|&&|[\[\](),!-]))"
)


class _Parser:
    def __init__(self, text, table: RegionTable):
        self.text = text
        self.table = table
        self.tokens = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None or m.end() == pos:
                if text[pos:].strip():
                    raise StlSyntaxError(f"unexpected character {text[pos]!r}", pos)
                break
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.text))

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.next()
        if val != value:
            raise StlSyntaxError(f"expected {value!r}, found {val!r}", pos)
        return val

    def parse(self):
        f = self.parse_until()
        kind, val, pos = self.peek()
        if kind is not None:
            raise StlSyntaxError(f"trailing input {val!r}", pos)
        return f

    def parse_until(self):
        left = self.parse_conj()
        kind, val, pos = self.peek()
        if kind == "name" and val == "U":
            self.next()
            a, b = self.parse_interval()
            right = self.parse_conj()
            return U(a, b, left, right)
        return left

    def parse_conj(self):
        parts = [self.parse_unary()]
        while self.peek()[1] == "&&":
            self.next()
            parts.append(self.parse_unary())
        if len(parts) == 1:
            return parts[0]
        flat = []
        for p in parts:
            flat.extend(p.children if isinstance(p, And) else [p])
        return And(tuple(flat))

    def parse_interval(self):
        self.expect("[")
        a = self.parse_number()
        self.expect(",")
        b = self.parse_number()
        self.expect("]")
        if a > b:
            raise MalformedInterval(f"interval [{a}, {b}] has a > b")
        return a, b

    def parse_number(self):
        kind, val, pos = self.next()
        neg = False
        if val == "-":
            neg = True
            kind, val, pos = self.next()
        if kind != "num":
            raise StlSyntaxError(f"expected a number, found {val!r}", pos)
        x = float(val)
        return -x if neg else x

    def parse_unary(self):
        kind, val, pos = self.peek()
        if kind == "name" and val in ("G", "F"):
            self.next()
            a, b = self.parse_interval()
            child = self.parse_unary()
            return (G if val == "G" else F)(a, b, child)
        if val == "!":
            self.next()
            child = self.parse_unary()
            if not isinstance(child, Pred):
                raise StlSyntaxError("negation is restricted to predicates", pos)
            return Not(child)
        if val == "(":
            self.next()
            f = self.parse_until()
            self.expect(")")
            return f
        return self.parse_predicate()

    def parse_predicate(self):
        kind, val, pos = self.next()
        if kind != "name":
            raise StlSyntaxError(f"expected a predicate, found {val!r}", pos)
        if val == "true":
            return Top()
        if val == "in":
            self.expect("(")
            kind, name, pos2 = self.next()
            if kind != "name":
                raise StlSyntaxError("in(...) expects a region name", pos2)
            self.expect(")")
            region, projection, _ = self.table.lookup(name)
            return Pred(InSet(name, region, projection))
        if val == "avoid":
            self.expect("(")
            kind, word, pos2 = self.next()
            if word != "obstacles":
                raise StlSyntaxError("avoid(...) supports only 'obstacles'", pos2)
            self.expect(")")
            return Pred(NotInObstacles(self.table.obstacle_projection, tuple(self.table.obstacles)))
        if val == "norm_inf":
            self.expect("(")
            kind, word, pos2 = self.next()
            if word != "x":
                raise StlSyntaxError("norm_inf expects x[...]", pos2)
            self.expect("[")
            idx = [int(self.parse_number())]
            while self.peek()[1] == ",":
                self.next()
                idx.append(int(self.parse_number()))
            self.expect("]")
            self.expect("-")
            self.expect("(")
            vals = [self.parse_number()]
            while self.peek()[1] == ",":
                self.next()
                vals.append(self.parse_number())
            self.expect(")")
            self.expect(")")
            self.expect("<=")
            r = self.parse_number()
            if r <= 0:
                raise StlSyntaxError("ball radius must be positive", pos)
            if len(vals) != len(idx):
                raise StlSyntaxError("projection and center lengths differ", pos)
            return Pred(InfNormBall(tuple(idx), tuple(vals), float(r)))
        raise StlSyntaxError(f"unknown predicate {val!r}", pos)


def parse(text: str, table: RegionTable):
    """Parse formula text against a named-region table."""
    return _Parser(text, table).parse()


# ---------------------------------------------------------------------------
# Until rewrite
# ---------------------------------------------------------------------------

def rewrite_until(formula, t_prime: float | None = None):
    """Replace every U node by the G/F pair it is equivalent to.

    ``left U[a,b] right`` becomes ``G[a,t'] left && F[t',t'] right`` for a
    chosen t' in [a, b] (window midpoint when not given).
    """
    if isinstance(formula, (Top, Pred, Not)):
        return formula
    if isinstance(formula, And):
        return And(tuple(rewrite_until(c, t_prime) for c in formula.children))
    if isinstance(formula, G):
        return G(formula.a, formula.b, rewrite_until(formula.child, t_prime))
    if isinstance(formula, F):
        return F(formula.a, formula.b, rewrite_until(formula.child, t_prime))
    if isinstance(formula, U):
        tp = 0.5 * (formula.a + formula.b) if t_prime is None else t_prime
        if not (formula.a - _TIME_TOL <= tp <= formula.b + _TIME_TOL):
            raise OutOfWindow(f"t'={tp} outside [{formula.a}, {formula.b}]")
        left = rewrite_until(formula.left, t_prime)
        right = rewrite_until(formula.right, t_prime)
        return And((G(formula.a, tp, left), F(tp, tp, right)))
    raise UnsupportedFragment(f"unknown node {type(formula)!r}")


# ---------------------------------------------------------------------------
# Monitor
# ---------------------------------------------------------------------------

@dataclass
class SampledTrajectory:
    """Strictly increasing sample times with one state row per time."""

    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float).ravel()
        self.states = np.asarray(self.states, dtype=float)
        if self.states.ndim == 1:
            self.states = self.states.reshape(-1, 1)
        if self.states.shape[0] != self.times.size:
            raise ValueError("state row count must match the number of samples")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")

    def __len__(self):
        return self.times.size


@dataclass
class MonitorVerdict:
    satisfied: bool
    witness: float | None = None


def _window_indices(times, a, b):
    return np.nonzero((times >= a - _TIME_TOL) & (times <= b + _TIME_TOL))[0]


def _eval_state(formula, state):
    if isinstance(formula, Top):
        return True
    if isinstance(formula, Pred):
        return formula.predicate.holds(state)
    if isinstance(formula, Not):
        return not _eval_state(formula.child, state)
    if isinstance(formula, And):
        return all(_eval_state(c, state) for c in formula.children)
    raise UnsupportedFragment("temporal operator nested where a state formula was expected")


def _eval(formula, tr: SampledTrajectory, t: float):
    if isinstance(formula, (Top, Pred, Not)):
        idx = _window_indices(tr.times, t, t)
        if idx.size == 0:
            raise HorizonTooShort(f"no sample at t={t}")
        return _eval_state(formula, tr.states[idx[0]])
    if isinstance(formula, And):
        return all(_eval(c, tr, t) for c in formula.children)
    if isinstance(formula, (G, F)):
        lo, hi = t + formula.a, t + formula.b
        if tr.times[-1] < hi - _TIME_TOL:
            raise HorizonTooShort(
                f"trajectory ends at {tr.times[-1]:.6g} before the window end {hi:.6g}"
            )
        idx = _window_indices(tr.times, lo, hi)
        # A window with no samples is vacuous: G true, F false.
        if isinstance(formula, G):
            return all(_eval(formula.child, tr, tr.times[i]) for i in idx)
        return any(_eval(formula.child, tr, tr.times[i]) for i in idx)
    if isinstance(formula, U):
        raise UnsupportedFragment("monitoring requires rewrite_until first")
    raise UnsupportedFragment(f"unknown node {type(formula)!r}")


def _find_witness(formula, tr, satisfied):
    """First satisfying sample of an F (when satisfied) or first violating
    sample of a G window (when violated), scanning top-level conjuncts."""
    conjuncts = formula.children if isinstance(formula, And) else (formula,)
    if satisfied:
        for c in conjuncts:
            if isinstance(c, F):
                for i in _window_indices(tr.times, c.a, c.b):
                    if _eval(c.child, tr, tr.times[i]):
                        return float(tr.times[i])
        return None
    for c in conjuncts:
        if isinstance(c, G):
            for i in _window_indices(tr.times, c.a, c.b):
                if not _eval(c.child, tr, tr.times[i]):
                    return float(tr.times[i])
        elif isinstance(c, F):
            if not _eval(c, tr, 0.0):
                return float(min(tr.times[-1], c.b))
        elif not _eval(c, tr, 0.0):
            return float(tr.times[0])
    return None


def monitor(formula, tr: SampledTrajectory) -> MonitorVerdict:
    """Boolean satisfaction at t = 0 over sample instants only."""
    sat = _eval(formula, tr, 0.0)
    return MonitorVerdict(sat, _find_witness(formula, tr, sat))


# ---------------------------------------------------------------------------
# LTL abstraction: regions of interest + global side constraints
# ---------------------------------------------------------------------------

@dataclass
class TargetSpec:
    """A region of interest with its governing operator and window."""

    region: object           # Box / ConstrainedZonotope in projection coords
    projection: tuple
    operator: str            # "G" | "F"
    interval: tuple
    label: str


@dataclass
class ConstraintSpec:
    """A global stay/avoid conjunct kept out of the target sequence."""

    formula: object
    interval: tuple


def induced_ltl_targets(formula, statespace_names=()):
    """Split a fragment formula into ordered targets and global constraints.

    Dropping the time windows and reading the targets in textual order gives
    the accepting-region sequence of the induced LTL formula. G-conjuncts
    whose predicates only stay in the state space or avoid obstacles are
    returned as side constraints, not targets.
    """
    conjuncts = formula.children if isinstance(formula, And) else (formula,)
    targets = []
    constraints = []
    names = set(statespace_names)
    for c in conjuncts:
        if isinstance(c, Top):
            continue
        if not isinstance(c, (G, F)):
            raise UnsupportedFragment(
                f"top level must be a conjunction of G/F nodes, found {type(c).__name__}"
            )
        preds = _flatten_state(c.child)
        if isinstance(c, G) and all(_is_safety(p, names) for p in preds):
            constraints.append(ConstraintSpec(c.child, (c.a, c.b)))
            continue
        region, projection, label = _target_region(preds, names)
        targets.append(TargetSpec(region, projection, type(c).__name__, (c.a, c.b), label))
    return targets, constraints


def _flatten_state(node):
    if isinstance(node, And):
        out = []
        for c in node.children:
            out.extend(_flatten_state(c))
        return out
    if isinstance(node, (Pred, Not, Top)):
        return [node]
    raise UnsupportedFragment("nested temporal operators are outside the fragment")


def _is_safety(node, statespace_names):
    if isinstance(node, Top):
        return True
    if isinstance(node, Not):
        return True
    if isinstance(node, Pred):
        p = node.predicate
        if isinstance(p, NotInObstacles):
            return True
        if isinstance(p, InSet) and p.region_name in statespace_names:
            return True
    return False


def _target_region(preds, statespace_names):
    regions = []
    for node in preds:
        if not isinstance(node, Pred):
            continue
        p = node.predicate
        if isinstance(p, InfNormBall):
            regions.append((p.as_box(), p.projection, f"ball@{p.center}"))
        elif isinstance(p, InSet) and p.region_name not in statespace_names:
            regions.append((p.region, p.projection, p.region_name))
    if len(regions) != 1:
        raise UnsupportedFragment(
            "each target conjunct must reference exactly one region of interest"
        )
    return regions[0]
