"""The exact simplex against known optima and a floating-point oracle."""

import random
from fractions import Fraction

import pytest

from ringcache import exactlp
from ringcache.exactlp import EQUAL, GREATER_EQ, LESS_EQ, Constraint


def C(coeffs, sense, rhs):
    return Constraint(coeffs=coeffs, sense=sense, rhs=Fraction(rhs))


class TestKnownPrograms:
    def test_two_variable_diet(self):
        # min 2x + 3y  s.t. x + y >= 4, x <= 3
        sol = exactlp.solve(
            {0: Fraction(2), 1: Fraction(3)},
            [C({0: 1, 1: 1}, GREATER_EQ, 4), C({0: 1}, LESS_EQ, 3)],
            n_vars=2,
        )
        assert sol.value == 9
        assert sol.x == [3, 1]

    def test_equality_program(self):
        # min x + y s.t. x + 2y == 6, x - y == 0  ->  x = y = 2
        sol = exactlp.solve(
            {0: Fraction(1), 1: Fraction(1)},
            [C({0: 1, 1: 2}, EQUAL, 6), C({0: 1, 1: -1}, EQUAL, 0)],
            n_vars=2,
        )
        assert sol.value == 4
        assert sol.x == [2, 2]

    def test_exact_rationals_survive(self):
        sol = exactlp.solve(
            {0: Fraction(1, 3)},
            [C({0: 1}, GREATER_EQ, Fraction(5, 7))],
            n_vars=1,
        )
        assert sol.value == Fraction(5, 21)

    def test_degenerate_vertex(self):
        # Several constraints meet at the optimum; must still terminate.
        sol = exactlp.solve(
            {0: Fraction(-1), 1: Fraction(-1)},
            [
                C({0: 1, 1: 1}, LESS_EQ, 1),
                C({0: 1}, LESS_EQ, 1),
                C({1: 1}, LESS_EQ, 1),
                C({0: 1, 1: 2}, LESS_EQ, 2),
                C({0: 2, 1: 1}, LESS_EQ, 2),
            ],
            n_vars=2,
        )
        assert sol.value == -1

    def test_infeasible(self):
        with pytest.raises(exactlp.InfeasibleError):
            exactlp.solve(
                {0: Fraction(1)},
                [C({0: 1}, LESS_EQ, 1), C({0: 1}, GREATER_EQ, 2)],
                n_vars=1,
            )

    def test_unbounded(self):
        with pytest.raises(exactlp.UnboundedError):
            exactlp.solve({0: Fraction(-1)}, [C({0: -1}, LESS_EQ, 0)], n_vars=1)

    def test_redundant_equalities(self):
        sol = exactlp.solve(
            {0: Fraction(1), 1: Fraction(2)},
            [
                C({0: 1, 1: 1}, EQUAL, 2),
                C({0: 2, 1: 2}, EQUAL, 4),  # same hyperplane
            ],
            n_vars=2,
        )
        assert sol.value == 2
        assert sol.x[0] + sol.x[1] == 2

    def test_negative_rhs_normalisation(self):
        # -x <= -3  means x >= 3
        sol = exactlp.solve({0: Fraction(1)}, [C({0: -1}, LESS_EQ, -3)], n_vars=1)
        assert sol.value == 3


class TestAgainstScipy:
    def test_random_programs(self):
        scipy_opt = pytest.importorskip("scipy.optimize")
        rng = random.Random(20240901)
        solved = 0
        while solved < 40:
            n = rng.randrange(2, 6)
            m = rng.randrange(1, 7)
            cons = []
            a_ub, b_ub, a_eq, b_eq = [], [], [], []
            for _ in range(m):
                coeffs = {j: Fraction(rng.randrange(-4, 5)) for j in range(n)}
                rhs = Fraction(rng.randrange(0, 13))
                sense = rng.choice([LESS_EQ, GREATER_EQ, EQUAL])
                cons.append(C(coeffs, sense, rhs))
                dense = [float(coeffs.get(j, 0)) for j in range(n)]
                if sense == LESS_EQ:
                    a_ub.append(dense)
                    b_ub.append(float(rhs))
                elif sense == GREATER_EQ:
                    a_ub.append([-v for v in dense])
                    b_ub.append(-float(rhs))
                else:
                    a_eq.append(dense)
                    b_eq.append(float(rhs))
            cost = {j: Fraction(rng.randrange(-3, 7)) for j in range(n)}
            ref = scipy_opt.linprog(
                [float(cost.get(j, 0)) for j in range(n)],
                A_ub=a_ub or None,
                b_ub=b_ub or None,
                A_eq=a_eq or None,
                b_eq=b_eq or None,
                bounds=(0, None),
                method="highs",
            )
            try:
                sol = exactlp.solve(cost, cons, n_vars=n)
                assert ref.status == 0, "exact solver found optimum, scipy did not"
                assert abs(float(sol.value) - ref.fun) < 1e-7
                solved += 1
            except exactlp.InfeasibleError:
                assert ref.status == 2
                solved += 1
            except exactlp.UnboundedError:
                assert ref.status == 3
                solved += 1
