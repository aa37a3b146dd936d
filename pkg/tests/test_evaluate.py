from itertools import combinations, permutations

import numpy as np
import pytest

from seqscan import match_changepoints, nearest_read_index

from conftest import proc_from_z


def brute_force_match(called, truth, tol):
    """(max matched pairs, min total distance) by exhaustive enumeration."""
    nc, nt = len(called), len(truth)
    for size in range(min(nc, nt), -1, -1):
        best = None
        for cs in combinations(range(nc), size):
            for ts in permutations(range(nt), size):
                d = [abs(called[c] - truth[t]) for c, t in zip(cs, ts)]
                if all(x <= tol for x in d):
                    tot = sum(d)
                    best = tot if best is None else min(best, tot)
        if best is not None:
            return size, best
    return 0, 0


class TestMatchChangepoints:
    def test_identity(self):
        r = match_changepoints([5, 90, 400], [5, 90, 400], 100)
        assert r.recall == r.precision == 1.0
        assert r.unmatched_called == r.unmatched_true == 0

    def test_shift_beyond_tolerance(self):
        truth = [100, 500, 900]
        called = [t + 150 for t in truth]
        r = match_changepoints(called, truth, 100)
        assert r.recall == 0.0 and r.precision == 0.0
        assert r.pairs == []

    def test_worked_example(self):
        r = match_changepoints([10, 500], [60, 490, 900], 100)
        assert sorted(r.pairs) == [(10, 60, 50), (500, 490, 10)]
        assert r.recall == pytest.approx(2 / 3)
        assert r.precision == 1.0
        assert r.unmatched_true == 1

    def test_empty_conventions(self):
        both = match_changepoints([], [], 100)
        assert both.recall == both.precision == 1.0
        no_calls = match_changepoints([], [5], 100)
        assert no_calls.recall == 0.0 and no_calls.precision == 0.0
        no_truth = match_changepoints([5], [], 100)
        assert no_truth.recall == 1.0 and no_truth.precision == 0.0

    def test_matches_brute_force(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            nc, nt = int(rng.integers(0, 7)), int(rng.integers(0, 7))
            called = sorted(rng.integers(0, 800, nc).tolist())
            truth = sorted(rng.integers(0, 800, nt).tolist())
            rep = match_changepoints(called, truth, 100)
            size, tot = brute_force_match(called, truth, 100)
            assert rep.n_matched == size
            assert sum(d for _, _, d in rep.pairs) == tot

    def test_greedy_never_beats_optimal(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            nc, nt = int(rng.integers(1, 8)), int(rng.integers(1, 8))
            called = sorted(rng.integers(0, 500, nc).tolist())
            truth = sorted(rng.integers(0, 500, nt).tolist())
            rep = match_changepoints(called, truth, 100)
            # greedy nearest-neighbor pairing
            free = set(range(nt))
            greedy_pairs = 0
            greedy_total = 0
            for c in called:
                cands = [(abs(c - truth[t]), t) for t in free if abs(c - truth[t]) <= 100]
                if cands:
                    d, t = min(cands)
                    free.discard(t)
                    greedy_pairs += 1
                    greedy_total += d
            assert greedy_pairs <= rep.n_matched
            if greedy_pairs == rep.n_matched:
                assert greedy_total >= sum(d for _, _, d in rep.pairs)

    def test_symmetric_total_distance(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            a = sorted(rng.integers(0, 600, int(rng.integers(1, 8))).tolist())
            b = sorted(rng.integers(0, 600, int(rng.integers(1, 8))).tolist())
            r1 = match_changepoints(a, b, 80)
            r2 = match_changepoints(b, a, 80)
            assert r1.n_matched == r2.n_matched
            assert sum(d for _, _, d in r1.pairs) == sum(d for _, _, d in r2.pairs)

    def test_rates_bounded(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            a = sorted(rng.integers(0, 300, int(rng.integers(0, 6))).tolist())
            b = sorted(rng.integers(0, 300, int(rng.integers(0, 6))).tolist())
            r = match_changepoints(a, b, 50)
            assert 0.0 <= r.recall <= 1.0
            assert 0.0 <= r.precision <= 1.0


class TestNearestReadIndex:
    def test_basic(self):
        p = proc_from_z([1, 0, 1, 0], W=[10, 20, 30, 40])
        assert nearest_read_index(p, 5) == 1
        assert nearest_read_index(p, 10) == 1
        assert nearest_read_index(p, 14) == 1
        assert nearest_read_index(p, 16) == 2
        assert nearest_read_index(p, 99) == 4

    def test_tie_goes_left(self):
        p = proc_from_z([1, 0], W=[10, 20])
        assert nearest_read_index(p, 15) == 1
