import math
from fractions import Fraction

import pytest

from exactmip.exact_lp import solve_exact_lp
from exactmip.generators import knapsack, parity, random_lp, random_mip, tenths
from exactmip.model import build_model
from exactmip.numerics import INF
from exactmip.tree import Config, compute_gap, solve, solve_oracle

PLAIN = Config(presolve=False, heuristics=False)


def replay_confirms(model, entry):
    """Re-solve a pruned node's relaxation exactly and confirm the prune."""
    lp = solve_exact_lp(model, entry["lower"], entry["upper"])
    if lp.status == "infeasible":
        return True
    if entry["pruned"] == "infeasible":
        return False
    v = lp.objective
    if model.integers and model.objective_is_integral():
        v = math.ceil(v - model.offset) + model.offset
    return v >= entry["incumbent"]


class TestExamples:
    def test_knapsack(self):
        res = solve(knapsack())
        assert res.status == "optimal" and res.objective == -5
        assert res.incumbent.x == (1, 0)

    def test_parity(self):
        res = solve(parity(), PLAIN)
        assert res.status == "infeasible" and res.incumbent is None

    def test_pure_lp_one_node(self):
        m = build_model([[2, 1], [1, 2]], ["L", "L"], [3, 3], [-1, -1])
        res = solve(m, PLAIN)
        assert res.status == "optimal" and res.nodes == 1 and res.objective == -2

    def test_tenths(self):
        res = solve(tenths())
        assert res.objective == solve_oracle(tenths()).objective

    def test_unbounded_relaxation(self):
        m = build_model([[1]], ["G"], [0], [-1], integers=[0])
        assert solve(m, PLAIN).status == "unbounded-relaxation"

    def test_node_limit(self):
        res = solve(parity(), Config(presolve=False, heuristics=False, node_limit=2))
        assert res.status == "node-limit" and res.nodes == 2
        assert res.dual <= res.primal


class TestBranching:
    def test_single_fractional_column(self):
        m = build_model([[0, 0, 2]], ["L"], [1], [-1, -1, -1], upper=[1, 1, 5], integers=[0, 1, 2])
        res = solve(m, PLAIN)
        root = res.trace[0]
        assert root["branch"] == (2, 0)
        kids = [e for e in res.trace if e["parent"] == 0]
        assert sorted((e["lower"][2], e["upper"][2]) for e in kids) == [(0, 0), (1, 5)]

    def test_tie_goes_to_lowest_index(self):
        m = build_model([[2, 0, 0], [0, 2, 0], [0, 0, 2]], ["L"] * 3, [1, 1, 1], [-1, -1, -1],
                        upper=[1, 1, 1], integers=[0, 1, 2])
        assert solve(m, PLAIN).trace[0]["branch"] == (0, 0)

    def test_children_adjacent(self):
        for seed in range(20):
            res = solve(random_mip(seed), PLAIN)
            by_parent = {}
            for e in res.trace:
                by_parent.setdefault(e["parent"], []).append(e)
            for e in res.trace:
                if "branch" in e:
                    j, k = e["branch"]
                    ups = sorted((c["upper"][j], c["lower"][j]) for c in by_parent[e["id"]])
                    assert ups[0][0] == k and ups[1][1] == k + 1


class TestGap:
    @pytest.mark.parametrize("p, d, g", [
        (Fraction(-2), Fraction(-2), 0),
        (Fraction(3), -INF, INF),
        (Fraction(3), Fraction(2), Fraction(1, 3)),
        (Fraction(1), Fraction(-1), INF),
        (INF, INF, 0),
    ])
    def test_values(self, p, d, g):
        assert compute_gap(p, d) == g


class TestProperties:
    @pytest.mark.parametrize("seed", range(0, 200, 11))
    def test_matches_oracle(self, seed):
        m = random_mip(seed)
        a, b = solve(m), solve_oracle(m)
        assert a.status == b.status and a.objective == b.objective

    def test_monotone_bounds(self):
        for seed in range(40):
            res = solve(random_mip(seed), PLAIN)
            duals = [d for d, _ in res.dual_history]
            primals = [p for _, p in res.dual_history]
            assert all(a <= b for a, b in zip(duals, duals[1:]))
            assert all(a >= b for a, b in zip(primals, primals[1:]))
            assert all(d <= p for d, p in res.dual_history)

    def test_prune_replay(self):
        pruned = 0
        for seed in range(60):
            m = random_mip(seed)
            res = solve(m, Config(presolve=False))
            for e in res.trace:
                if e["pruned"] in ("bound", "infeasible"):
                    pruned += 1
                    assert replay_confirms(m, e)
        assert pruned > 50

    def test_seed_determinism(self):
        for seed in (1, 5, 9):
            m = random_mip(40 + seed)
            a = solve(m, Config(seed=seed))
            b = solve(m, Config(seed=seed))
            assert (a.nodes, a.status, a.objective) == (b.nodes, b.status, b.objective)


class TestOracle:
    def test_examples(self):
        assert solve_oracle(knapsack()).objective == -5
        assert solve_oracle(parity()).status == "infeasible"
        lp = random_lp(1)
        assert solve_oracle(lp).objective == solve_exact_lp(lp).objective

    def test_refuses_large_box(self):
        m = build_model([[1, 1]], ["L"], [5], [1, 1], upper=[2000, 2000], integers=[0, 1])
        with pytest.raises(ValueError):
            solve_oracle(m)

    def test_refuses_unbounded_integer(self):
        m = build_model([[1]], ["L"], [5], [1], integers=[0])
        with pytest.raises(ValueError):
            solve_oracle(m)
