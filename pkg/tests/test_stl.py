"""Parser round-trips, Until rewrite, and monitor-vs-brute-force agreement."""

import numpy as np
import pytest

from stlsynth.errors import (
    HorizonTooShort,
    MalformedInterval,
    OutOfWindow,
    StlSyntaxError,
    UnknownRegion,
    UnsupportedFragment,
)
from stlsynth.geometry import Box
from stlsynth.stl import (
    And,
    F,
    G,
    InfNormBall,
    InSet,
    MonitorVerdict,
    Not,
    NotInObstacles,
    Pred,
    RegionTable,
    SampledTrajectory,
    U,
    horizon,
    induced_ltl_targets,
    monitor,
    parse,
    rewrite_until,
    to_text,
)


def demo_table():
    table = RegionTable()
    table.add("X", Box([-2, -1, -2, -1], [2, 1, 2, 1]), (0, 1, 2, 3), kind="statespace")
    table.add("goal", Box([1.5, -1.9], [1.9, -1.5]), (0, 2))
    table.obstacles = (Box([-0.5, -0.5], [0.5, 0.5]),)
    table.obstacle_projection = (0, 2)
    return table


class TestParser:
    def test_vehicle_formula_shape(self):
        table = demo_table()
        f = parse(
            "G[0,7.5](in(X) && avoid(obstacles)) && F[0,7.5](norm_inf(x[0,2] - (1.7,-1.7)) <= 0.2)",
            table,
        )
        assert isinstance(f, And) and len(f.children) == 2
        g, ff = f.children
        assert isinstance(g, G) and (g.a, g.b) == (0.0, 7.5)
        assert isinstance(ff, F)
        ball = ff.child.predicate
        assert isinstance(ball, InfNormBall)
        assert ball.projection == (0, 2)
        assert ball.center == (1.7, -1.7)
        assert ball.radius == 0.2

    def test_malformed_interval(self):
        with pytest.raises(MalformedInterval):
            parse("G[2,1] in(goal)", demo_table())

    def test_unknown_region(self):
        with pytest.raises(UnknownRegion):
            parse("G[0,1] in(nowhere)", demo_table())

    def test_syntax_error_position(self):
        with pytest.raises(StlSyntaxError):
            parse("G[0,1] &&", demo_table())

    def test_negation_restricted_to_predicates(self):
        with pytest.raises(StlSyntaxError):
            parse("!G[0,1] in(goal)", demo_table())

    def test_round_trip(self):
        table = demo_table()
        texts = [
            "G[0,7.5](in(X) && avoid(obstacles)) && F[0,7.5](norm_inf(x[0,2] - (1.7,-1.7)) <= 0.2)",
            "F[1,3] in(goal) && G[0,5] avoid(obstacles)",
            "G[0,2] !in(goal)",
            "(in(goal)) U[1,3] (avoid(obstacles))",
        ]
        for text in texts:
            f = parse(text, table)
            assert parse(to_text(f), table) == f


class TestRewrite:
    def test_until_midpoint(self):
        table = demo_table()
        f = parse("(in(goal)) U[1,3] (avoid(obstacles))", table)
        r = rewrite_until(f)
        assert isinstance(r, And)
        g, ff = r.children
        assert isinstance(g, G) and (g.a, g.b) == (1.0, 2.0)
        assert isinstance(ff, F) and (ff.a, ff.b) == (2.0, 2.0)

    def test_until_explicit_instant(self):
        f = U(1.0, 3.0, Pred(NotInObstacles((0,), ())), Pred(NotInObstacles((0,), ())))
        r = rewrite_until(f, 2.5)
        assert r.children[0].b == 2.5
        assert r.children[1].a == 2.5

    def test_out_of_window(self):
        f = U(1.0, 3.0, Top_like(), Top_like())
        with pytest.raises(OutOfWindow):
            rewrite_until(f, 0.5)

    def test_u_free_unchanged(self):
        table = demo_table()
        f = parse("G[0,2] in(goal)", table)
        assert rewrite_until(f) == f

    def test_degenerate_window(self):
        f = U(2.0, 2.0, Top_like(), Top_like())
        r = rewrite_until(f, 2.0)
        assert (r.children[0].a, r.children[0].b) == (2.0, 2.0)
        assert (r.children[1].a, r.children[1].b) == (2.0, 2.0)


def Top_like():
    return Pred(NotInObstacles((0,), ()))


def brute_force_eval(formula, times, states, t):
    """Independent quantifier-semantics evaluator (plain double loops)."""
    from stlsynth import stl as m

    if isinstance(formula, m.Top):
        return True
    if isinstance(formula, m.Pred):
        idx = [i for i, ti in enumerate(times) if abs(ti - t) <= 1e-9]
        return formula.predicate.holds(states[idx[0]])
    if isinstance(formula, m.Not):
        return not brute_force_eval(formula.child, times, states, t)
    if isinstance(formula, m.And):
        result = True
        for c in formula.children:
            result = result and brute_force_eval(c, times, states, t)
        return result
    if isinstance(formula, m.G):
        ok = True
        for i, ti in enumerate(times):
            if t + formula.a - 1e-9 <= ti <= t + formula.b + 1e-9:
                ok = ok and brute_force_eval(formula.child, times, states, ti)
        return ok
    if isinstance(formula, m.F):
        hit = False
        for i, ti in enumerate(times):
            if t + formula.a - 1e-9 <= ti <= t + formula.b + 1e-9:
                hit = hit or brute_force_eval(formula.child, times, states, ti)
        return hit
    raise AssertionError("unexpected node")


def random_state_formula(rng):
    kind = rng.integers(0, 3)
    if kind == 0:
        ball = InfNormBall((0, 1), tuple(rng.uniform(-1, 1, size=2)), float(rng.uniform(0.3, 1.2)))
        return Pred(ball)
    if kind == 1:
        lo = rng.uniform(-1.5, 0.0, size=2)
        box = Box(lo, lo + rng.uniform(0.5, 2.0, size=2))
        return Pred(InSet("r", box, (0, 1)))
    lo = rng.uniform(-1.0, 0.5, size=2)
    return Pred(NotInObstacles((0, 1), (Box(lo, lo + rng.uniform(0.2, 1.0, size=2)),)))


def random_formula(rng):
    conjuncts = []
    for _ in range(int(rng.integers(1, 4))):
        a = round(float(rng.uniform(0.0, 3.0)), 2) + 0.003
        b = a + round(float(rng.uniform(0.2, 4.0)), 2)
        child = random_state_formula(rng)
        if rng.uniform() < 0.3:
            child = And((child, random_state_formula(rng)))
        elif rng.uniform() < 0.2 and isinstance(child, Pred):
            child = Not(child)
        conjuncts.append((G if rng.uniform() < 0.5 else F)(a, b, child))
    return conjuncts[0] if len(conjuncts) == 1 else And(tuple(conjuncts))


def random_trajectory(rng):
    n = int(rng.integers(15, 40))
    times = np.linspace(0.0, 8.0, n)
    # Piecewise-linear wander in the plane.
    knots = rng.uniform(-1.5, 1.5, size=(4, 2))
    states = np.empty((n, 2))
    for i, t in enumerate(times):
        s = t / 8.0 * 3.0
        k = min(int(s), 2)
        frac = s - k
        states[i] = knots[k] * (1 - frac) + knots[k + 1] * frac
    return SampledTrajectory(times, states)


class TestMonitor:
    def test_constant_inside_region(self):
        tr = SampledTrajectory(np.linspace(0, 1, 11), np.tile([0.2, 0.2], (11, 1)))
        f = G(0.0, 1.0, Pred(InSet("r", Box([-1, -1], [1, 1]), (0, 1))))
        assert monitor(f, tr).satisfied

    def test_upward_crossing_witness(self):
        times = np.linspace(0, 2, 21)
        states = np.column_stack([times - 1.5, np.zeros_like(times)])
        ball = InfNormBall((0, 1), (0.5, 0.0), 0.45)
        verdict = monitor(F(0.0, 2.0, Pred(ball)), SampledTrajectory(times, states))
        assert verdict.satisfied
        # h crosses zero once x enters [0.05, 0.95]: first sample at t ~ 1.6.
        assert verdict.witness == pytest.approx(1.6, abs=1e-9)

    def test_horizon_too_short(self):
        tr = SampledTrajectory([0.0, 0.5], np.zeros((2, 2)))
        with pytest.raises(HorizonTooShort):
            monitor(G(0.0, 1.0, Top_like()), tr)

    def test_violation_witness_first_bad_sample(self):
        times = np.linspace(0, 1, 11)
        states = np.column_stack([np.linspace(0, 2, 11), np.zeros(11)])
        f = G(0.0, 1.0, Pred(InSet("r", Box([-1, -1], [1, 1]), (0, 1))))
        verdict = monitor(f, SampledTrajectory(times, states))
        assert not verdict.satisfied
        assert verdict.witness == pytest.approx(1.1 * 0.5, abs=0.06)  # first sample past x=1

    def test_oracle_agreement_500_random(self):
        rng = np.random.default_rng(77)
        disagreements = 0
        for _ in range(500):
            f = random_formula(rng)
            tr = random_trajectory(rng)
            if horizon(f) > tr.times[-1] + 1e-9:
                with pytest.raises(HorizonTooShort):
                    monitor(f, tr)
                continue
            expected = brute_force_eval(f, list(tr.times), tr.states, 0.0)
            if monitor(f, tr).satisfied != expected:
                disagreements += 1
        assert disagreements == 0

    def test_monotone_windows(self):
        rng = np.random.default_rng(99)
        for _ in range(60):
            tr = random_trajectory(rng)
            child = random_state_formula(rng)
            a = float(rng.uniform(0, 2))
            b = a + float(rng.uniform(0.5, 2))
            wider = b + float(rng.uniform(0.1, 8.0 - b)) if b < 8.0 else b
            g_small = monitor(G(a, b, child), tr).satisfied
            g_large = monitor(G(a, wider, child), tr).satisfied
            if not g_small:
                assert not g_large
            f_small = monitor(F(a, b, child), tr).satisfied
            f_large = monitor(F(a, wider, child), tr).satisfied
            if f_small:
                assert f_large


class TestInducedTargets:
    def test_vehicle_formula(self):
        table = demo_table()
        f = parse(
            "G[0,7.5](in(X) && avoid(obstacles)) && F[0,7.5](norm_inf(x[0,2] - (1.7,-1.7)) <= 0.2)",
            table,
        )
        targets, constraints = induced_ltl_targets(f, statespace_names=("X",))
        assert len(targets) == 1
        assert targets[0].operator == "F"
        assert targets[0].interval == (0.0, 7.5)
        assert targets[0].projection == (0, 2)
        assert len(constraints) == 1
        assert constraints[0].interval == (0.0, 7.5)

    def test_pure_safety_formula(self):
        table = demo_table()
        f = parse("G[0,5](in(X) && avoid(obstacles))", table)
        targets, constraints = induced_ltl_targets(f, statespace_names=("X",))
        assert targets == []
        assert len(constraints) == 1

    def test_two_targets_textual_order(self):
        table = demo_table()
        f = parse("F[0,2] in(goal) && F[3,5](norm_inf(x[0,2] - (0,0)) <= 0.5)", table)
        targets, _ = induced_ltl_targets(f, statespace_names=("X",))
        assert len(targets) == 2
        assert targets[0].label == "goal"
        assert targets[1].operator == "F"

    def test_g_target_region(self):
        table = demo_table()
        f = parse("G[2,3] in(goal)", table)
        targets, constraints = induced_ltl_targets(f, statespace_names=("X",))
        assert len(targets) == 1 and targets[0].operator == "G"
        assert constraints == []

    def test_rejects_nested_temporal(self):
        f = G(0.0, 1.0, F(0.0, 1.0, Top_like()))
        with pytest.raises(UnsupportedFragment):
            induced_ltl_targets(f)
