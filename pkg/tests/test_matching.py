"""Hard matching and assignment solving against brute force."""

import itertools

import numpy as np
import pytest

from seqot import CostKind, CostMatrix, MatchResult, exact_solve_uniform, hard_match, hungarian

from conftest import random_cosine_cost


def brute_force_min(values: np.ndarray) -> tuple[float, tuple[int, ...]]:
    n = values.shape[0]
    best = np.inf
    best_perm = None
    for perm in itertools.permutations(range(n)):
        total = 0.0
        for i, j in enumerate(perm):
            total += values[i, j]
        if total < best:
            best = total
            best_perm = perm
    return best, best_perm


class TestHardMatch:
    def test_identical_sets(self):
        assert hard_match(["a", "b", "c"], ["a", "b", "c"]) == 3

    def test_disjoint(self):
        assert hard_match(["a", "b"], ["c", "d"]) == 0

    def test_multiset_min_counts(self):
        # min(2,1) for 'a' plus min(1,2) for 'b'
        assert hard_match(["a", "a", "b"], ["a", "b", "b"]) == 2

    def test_symmetry(self, rng):
        vocab = list("abcdef")
        for _ in range(20):
            a = list(rng.choice(vocab, size=rng.integers(0, 8)))
            b = list(rng.choice(vocab, size=rng.integers(0, 8)))
            assert hard_match(a, b) == hard_match(b, a)

    def test_self_match_is_length(self, rng):
        a = list(rng.choice(list("abc"), size=6))
        assert hard_match(a, a) == len(a)


class TestHungarian:
    def test_identity_favoring(self):
        C = CostMatrix(values=[[0.0, 1.0], [1.0, 0.0]], cost_kind=CostKind.COSINE)
        result = hungarian(C)
        assert result.assignment == ((0, 0), (1, 1))
        assert result.total_cost == 0.0

    def test_hand_enumerated_2x2(self):
        # identity 4+3=7 vs swap 1+2=3
        result = hungarian(np.array([[4.0, 1.0], [2.0, 3.0]]))
        assert result.assignment == ((0, 1), (1, 0))
        assert result.total_cost == pytest.approx(3.0)

    def test_matches_brute_force_6x6(self, rng):
        values = rng.uniform(0.0, 1.0, size=(6, 6))
        result = hungarian(values)
        best, best_perm = brute_force_min(values)
        assert result.total_cost == best
        assert tuple(j for _, j in result.assignment) == best_perm

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7])
    def test_optimality_small_instances(self, n):
        rng = np.random.default_rng(1000 + n)
        for _ in range(10):
            values = rng.uniform(0.0, 2.0, size=(n, n))
            result = hungarian(values)
            best, _ = brute_force_min(values)
            assert result.total_cost == best

    def test_lexicographic_tie_break(self):
        values = np.zeros((3, 3))
        result = hungarian(values)
        assert result.assignment == ((0, 0), (1, 1), (2, 2))

    def test_lexicographic_among_equal_optima(self):
        # both diagonals cost 2; lexicographic pick is (0,0),(1,1)
        values = np.array([[1.0, 1.0], [1.0, 1.0]])
        result = hungarian(values)
        assert result.assignment == ((0, 0), (1, 1))

    def test_assignment_is_permutation(self, rng):
        values = rng.uniform(size=(8, 8))
        result = hungarian(values)
        rows = sorted(i for i, _ in result.assignment)
        cols = sorted(j for _, j in result.assignment)
        assert rows == list(range(8)) and cols == list(range(8))

    def test_total_cost_consistent_with_entries(self, rng):
        values = rng.uniform(size=(5, 5))
        result = hungarian(values)
        manual = sum(values[i, j] for i, j in result.assignment)
        assert result.total_cost == pytest.approx(manual, abs=1e-9)

    def test_birkhoff_consistency_with_oracle(self, rng):
        for n in (2, 4, 7):
            C = random_cosine_cost(rng, n, n)
            result = hungarian(C)
            distance, perm = exact_solve_uniform(C)
            assert result.total_cost / n == distance
            assert tuple(j for _, j in result.assignment) == perm

    def test_rejects_rectangular(self, rng):
        with pytest.raises(ValueError, match="square"):
            hungarian(rng.uniform(size=(3, 4)))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="non-finite"):
            hungarian(np.array([[np.inf, 0.0], [0.0, 1.0]]))


class TestMatchResult:
    def test_duplicate_indices_rejected(self):
        with pytest.raises(ValueError, match="unique"):
            MatchResult(assignment=((0, 1), (1, 1)), total_cost=1.0)
