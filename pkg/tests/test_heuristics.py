import random
from fractions import Fraction

import numpy as np

from exactmip.generators import random_mip
from exactmip.heuristics import (RepairBudget, check_solution, fp_round_and_dive, float_feasible,
                                 repair)
from exactmip.model import approximate, build_model, check_solution_exact

REPAIR_MODEL = build_model([[1, 1, 2]], ["E"], [2], [-1, -1, 0], upper=[1, 1, 1], integers=[0, 1])
COVER = build_model([[1, 1]], ["G"], [1], [0, 0], upper=[1, 1])


class TestFloatHeuristics:
    def test_integral_point_returned(self):
        f = approximate(REPAIR_MODEL)
        x = np.array([1.0, 1.0, 0.0])
        assert np.array_equal(fp_round_and_dive(f, [0, 1], x), x)

    def test_near_integer_rounds(self):
        m = build_model([[1]], ["L"], [1], [-1], upper=[1], integers=[0])
        out = fp_round_and_dive(approximate(m), [0], np.array([0.9999997]))
        assert out.tolist() == [1.0]

    def test_dive_conflict(self):
        # x + y = 1 with both binary and x = y forced: no rounding or dive works
        m = build_model([[1, 1], [1, -1]], ["E", "E"], [1, 0], [0, 0], upper=[1, 1], integers=[0, 1])
        assert fp_round_and_dive(approximate(m), [0, 1], np.array([0.5, 0.5])) is None

    def test_float_feasible_tolerance(self):
        f = approximate(COVER)
        assert float_feasible(f, np.array([1 - 1e-7, 0.0]))
        assert not float_feasible(f, np.array([0.9, 0.0]))


class TestRepair:
    def test_example(self):
        sol = repair(REPAIR_MODEL, [1, 0.9999997, 0.3])
        assert sol.x == (1, 1, 0) and sol.objective == -2
        assert sol.origin == "heuristic-repair"

    def test_restriction_infeasible(self):
        m = build_model([[1, 1]], ["L"], [1], [-1, -1], upper=[1, 1], integers=[0, 1])
        budget = RepairBudget(exact_lp_calls=4)
        assert repair(m, [1.0, 1.0], budget) is None
        assert budget.repair_calls == 1 and budget.successes == 0

    def test_fractional_rejected_before_lp(self):
        budget = RepairBudget(exact_lp_calls=4)
        assert repair(REPAIR_MODEL, [1, 0.3, 0], budget) is None
        assert budget.repair_calls == 0 and budget.rejected_fractional == 1

    def test_repaired_solutions_are_feasible(self):
        rng = np.random.default_rng(8)
        found = 0
        for seed in range(150):
            m = random_mip(seed)
            cand = [rng.integers(0, 2) + rng.normal(0, 1e-6) if j in m.integers else rng.uniform(0, 3)
                    for j in range(m.n)]
            sol = repair(m, cand)
            if sol is not None:
                found += 1
                assert check_solution_exact(m, sol.x) is None
        assert found > 0

    def test_budget_rules(self):
        b = RepairBudget(exact_lp_calls=4, repair_calls=2)
        assert b.permits()
        b.repair_calls = 3
        assert not b.permits()
        b = RepairBudget(exact_lp_calls=10, continuous_fraction=Fraction(5, 6))
        assert not b.permits()


class TestCheckSolution:
    def test_clear_acceptance_by_float(self):
        res = check_solution(COVER, [Fraction(1), Fraction(1, 2)])
        assert res.accepted and res.float_rows == 1 and res.exact_rows == 0

    def test_tight_row_goes_exact(self):
        res = check_solution(COVER, [Fraction(1), Fraction(0)])
        assert res.accepted and res.exact_rows == 1

    def test_clear_rejection_by_float(self):
        res = check_solution(COVER, [Fraction(0), Fraction(0)])
        assert not res.accepted and res.float_rows == 1 and res.exact_rows == 0

    def test_tenth_rows(self):
        m = build_model([["0.1", "0.2"]], ["E"], ["0.3"], [0, 0], upper=[5, 5])
        assert check_solution(m, [Fraction(1), Fraction(1)]).accepted
        assert not check_solution(m, [Fraction(1), Fraction(1) + Fraction(1, 10 ** 30)]).accepted

    def test_agrees_with_exact(self):
        rng = random.Random(21)
        for k in range(100):
            m = random_mip(k)
            f = approximate(m)
            for _ in range(100):
                x = [Fraction(rng.randint(0, 1)) if j in m.integers
                     else Fraction(rng.randint(0, 40), rng.choice([1, 3, 7, 10])) for j in range(m.n)]
                assert check_solution(m, x, f).accepted == (check_solution_exact(m, x) is None)
