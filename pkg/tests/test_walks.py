import itertools
from fractions import Fraction
from math import factorial

import numpy as np

from alonlab.walks import (FormStats, brute_force_expected_trace, brute_force_expected_traces,
                           closed_word_probability, divisor_count, exact_expected_trace,
                           expected_symm, odd_factorial, prob_walk, word_census)


def test_prob_walk_examples():
    n = 7
    assert prob_walk("g", [1], [0, 1], n) == Fraction(1, n)
    assert prob_walk("g", [1, 1], [0, 1, 2], n) == Fraction(1, n * (n - 1))
    assert prob_walk("g", [1, 1], [0, 0, 0], n) == Fraction(1, n)
    # infeasible: a permutation cannot send 0 to both 1 and 2
    assert prob_walk("g", [1, -1, 1], [0, 1, 0, 2], n) == 0


def test_prob_walk_by_direct_enumeration():
    # P(pi_1(0)=1, pi_1(1)=2) over all permutations of 5 points
    n = 5
    hits = sum(1 for p in itertools.permutations(range(n)) if p[0] == 1 and p[1] == 2)
    assert prob_walk("g", [1, 1], [0, 1, 2], n) == Fraction(hits, factorial(n))
    # matchings on 6 points: P(m(0)=1, m(2)=3)
    pts = list(range(6))

    def matchings(rest):
        if not rest:
            yield {}
            return
        a = rest[0]
        for b in rest[1:]:
            for m in matchings([x for x in rest if x not in (a, b)]):
                yield {**m, a: b, b: a}

    all_m = list(matchings(pts))
    assert len(all_m) == odd_factorial(6)
    # walk 0 -m1-> 1 -m2-> 2 -m1-> 3 needs m1(0)=1, m1(2)=3 and m2(1)=2
    p1 = Fraction(sum(1 for m in all_m if m[0] == 1 and m[2] == 3), len(all_m))
    p2 = Fraction(sum(1 for m in all_m if m[1] == 2), len(all_m))
    assert prob_walk("i", [1, 2, 1], [0, 1, 2, 3], 6) == p1 * p2
    # a matching cannot send 0 to 1 and 1 to 2
    assert prob_walk("i", [1, 1], [0, 1, 2], 6) == 0


def test_prob_walk_rename_invariance():
    rng = np.random.default_rng(0)
    word, t = [1, 2, -1, -2], [0, 1, 2, 3, 0]
    base = prob_walk("g", word, t, 8)
    for _ in range(10):
        perm = rng.permutation(8)
        assert prob_walk("g", word, [int(perm[x]) for x in t], 8) == base


def test_expected_symm_examples():
    n = 9
    assert expected_symm("g", FormStats((1,), 1), n) == 1
    assert expected_symm("g", FormStats((1,), 2), n) == n - 1
    assert expected_symm("g", FormStats((3,), 3), n) == 1


def test_power_word_return_probability():
    for n in (8, 10):
        for m in range(1, 9):
            assert closed_word_probability("g", [1] * m, n) == Fraction(divisor_count(m), n)


def test_two_power_word_by_enumeration():
    n = 5
    perms = list(itertools.permutations(range(n)))
    hits = 0
    for p1 in perms:
        x = p1[p1[0]]                 # pi_1^2(0)
        for p2 in perms:
            if p2[x] == 0:            # then pi_2 back to 0
                hits += 1
    assert closed_word_probability("g", [1, 1, 2], n) == Fraction(hits, len(perms) ** 2)


def test_expected_trace_examples():
    assert brute_force_expected_trace("g", 1, 4, 2) == 12
    assert exact_expected_trace("g", 4, 4, 4) == brute_force_expected_trace("g", 4, 4, 4)


def test_oracles_agree_small():
    for model, n, d in [("g", 3, 4), ("h", 4, 4), ("i", 4, 3), ("j", 3, 3)]:
        brute = brute_force_expected_traces(model, n, d, 5)
        for k in range(1, 6):
            assert exact_expected_trace(model, n, d, k) == brute[k], (model, k)


def test_word_census_examples():
    assert word_census(1, 4, start=1, end=1)[0] == 1
    assert word_census(2, 4, start=1, end=-1)[0] == 0
    total = sum(word_census(3, 4, start=s, end=e)[0]
                for s in (1, -1, 2, -2) for e in (1, -1, 2, -2))
    assert total == 36


def test_expansion_differences_shrink():
    # n^(e-v) E_symm for a class with e = 4 letters, v = 3 vertices
    stats_ = FormStats((2, 2), 3)
    vals = [float(expected_symm("g", stats_, 2**p) * (2**p) ** (4 - 3)) for p in range(10, 16)]
    diffs = np.abs(np.diff(vals))
    assert np.all(diffs[1:] < diffs[:-1])
    ratios = diffs[1:] / diffs[:-1]
    assert np.allclose(ratios, 0.5, atol=0.05)
