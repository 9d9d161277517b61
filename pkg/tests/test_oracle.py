import time
from itertools import islice

import numpy as np
import pytest

from chanassign import oracle, scenario as sc, solver
from chanassign.errors import SizeGuardError
from conftest import make_scenario


class TestEnumeration:
    @pytest.mark.parametrize("dims,count", [
        ((2, 2, 1), 2),
        ((4, 2, 2), 6),
        ((4, 4, 1), 24),
        ((8, 4, 2), 2520),
    ])
    def test_counts_match_the_multinomial(self, dims, count):
        m, n, a = dims
        assert oracle.count_assignments(m, n, a) == count
        assert sum(1 for _ in oracle.enumerate_assignments(m, n, a)) == count

    def test_every_assignment_is_feasible_and_unique(self):
        seen = set()
        for x in oracle.enumerate_assignments(6, 3, 2):
            solver.check_assignment(x, 6, 3, 2)
            seen.add(x.tobytes())
        assert len(seen) == oracle.count_assignments(6, 3, 2)

    def test_lexicographic_label_order(self):
        from chanassign import surrogate
        labels = [tuple(surrogate.encode_labels(x))
                  for x in oracle.enumerate_assignments(4, 2, 2)]
        assert labels == sorted(labels)
        assert labels[0] == (1, 1, 2, 2)

    def test_size_guard(self):
        with pytest.raises(SizeGuardError):
            list(oracle.enumerate_assignments(14, 7, 2))
        with pytest.raises(SizeGuardError):
            oracle.brute_force_solve(
                make_scenario(np.ones((14, 7)), quota=2))
        # 12 users are still allowed
        first = next(iter(oracle.enumerate_assignments(12, 6, 2)))
        solver.check_assignment(first, 12, 6, 2)

    def test_bad_dims(self):
        from chanassign.errors import DimensionError
        with pytest.raises(DimensionError):
            list(oracle.enumerate_assignments(5, 2, 2))


class TestBruteForce:
    def test_worked_2x2_instance(self, scenario_2x2):
        x, rate = oracle.brute_force_solve(scenario_2x2)
        assert (x == np.eye(2)).all()
        assert rate == pytest.approx(4.0, abs=1e-12)

    def test_symmetric_instance_returns_lex_smallest(self):
        s = make_scenario(np.ones((2, 2)), quota=1)
        x, rate = oracle.brute_force_solve(s)
        assert (x == np.eye(2)).all()  # label (1, 2) beats (2, 1)

    def test_dominates_the_solver(self):
        for seed in range(30):
            inst = sc.scenario_for_sample(200 + seed, 0, (6, 2, 3))
            res = solver.solve(inst)
            _, best = oracle.brute_force_solve(inst)
            assert best >= res.sum_rate - 1e-9 * abs(best)

    def test_10x5x2_under_a_second(self):
        inst = sc.scenario_for_sample(5, 0, (10, 5, 2))
        assert oracle.count_assignments(10, 5, 2) == 113400
        t0 = time.perf_counter()
        _, rate = oracle.brute_force_solve(inst)
        assert time.perf_counter() - t0 < 1.0
        assert rate > 0

    def test_prefix_iteration_is_cheap(self):
        head = list(islice(oracle.enumerate_assignments(10, 5, 2), 3))
        assert len(head) == 3
