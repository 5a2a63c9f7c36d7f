"""Exact walk probabilities and expected irreducible traces.

Words are tuples of nonzero ints.  For the permutation models (G, H) the
letter ``+j`` stands for pi_j and ``-j`` for its inverse; for the matching
models (I, J) only ``+j`` is used since every generator is an involution.

A potential walk is a word together with a vertex vector t = (t_0..t_k).
It determines some values of each generator; ``a_j`` counts the values of
generator j that are pinned down (for matchings a matched pair pins two
values and a half-loop pins one).
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import factorial, perm as falling, prod

from .errors import BudgetError, InvalidInputError

PERM_MODELS = ("g", "h")
MATCH_MODELS = ("i", "j")


@dataclass(frozen=True)
class FormStats:
    a: tuple
    v: int

    @property
    def e(self) -> int:
        return sum(self.a)

    @property
    def order(self) -> int:
        return self.e - self.v


def odd_factorial(m: int) -> int:
    """(m-1)(m-3)...1, the number of perfect matchings of m points (m even)."""
    return prod(range(m - 1, 0, -2)) if m > 0 else 1


def num_generators(model: str, d: int) -> int:
    return d // 2 if model in PERM_MODELS else d


def alphabet(model: str, d: int) -> list[int]:
    k = num_generators(model, d)
    if model in PERM_MODELS:
        return [s for j in range(1, k + 1) for s in (j, -j)]
    return list(range(1, k + 1))


def inverse_letter(model: str, s: int) -> int:
    return -s if model in PERM_MODELS else s


def is_irreducible(model: str, word) -> bool:
    return all(b != inverse_letter(model, a) for a, b in zip(word, word[1:]))


# -- feasibility and statistics -----------------------------------------

class _Maps:
    """Partial generator values accumulated along a walk."""

    def __init__(self, model: str, ngen: int):
        self.model = model
        self.fwd = [dict() for _ in range(ngen + 1)]
        self.bwd = [dict() for _ in range(ngen + 1)]

    def assign(self, s: int, x, y) -> bool | None:
        """Record the step x --s--> y.

        Returns True if a new value was pinned, False if it was already
        known, None if the step contradicts earlier values.
        """
        j = abs(s)
        if self.model in PERM_MODELS:
            if s < 0:
                x, y = y, x
            f, b = self.fwd[j], self.bwd[j]
            fx, by = f.get(x), b.get(y)
            if fx is not None or by is not None:
                return False if (fx == y and by == x) else None
            f[x] = y
            b[y] = x
            return True
        m = self.fwd[j]
        mx, my = m.get(x), m.get(y)
        if mx is not None or my is not None:
            return False if (mx == y and my == x) else None
        if x == y:
            if self.model == "i":
                return None
            if any(k == v for k, v in m.items()):
                return None  # one half-loop per generator
        m[x] = y
        m[y] = x
        return True

    def unassign(self, s: int, x, y):
        j = abs(s)
        if self.model in PERM_MODELS:
            if s < 0:
                x, y = y, x
            del self.fwd[j][x]
            del self.bwd[j][y]
        else:
            m = self.fwd[j]
            del m[x]
            m.pop(y, None)

    def a(self) -> tuple:
        return tuple(len(m) for m in self.fwd[1:])

    def h_cycle_ok(self, j: int, x, n: int) -> bool:
        """H model: pi_j's known values may not close a cycle shorter than n."""
        f = self.fwd[j]
        start, cur, length = x, f.get(x), 1
        while cur is not None and cur != start:
            cur = f.get(cur)
            length += 1
        return cur is None or length == n


def walk_stats(model: str, word, t, n: int | None = None) -> FormStats | None:
    """Statistics of a potential walk, or None if it is infeasible."""
    model = model.lower()
    if len(t) != len(word) + 1:
        raise InvalidInputError("t must have one more entry than the word")
    ngen = max((abs(s) for s in word), default=0)
    if model in MATCH_MODELS and any(s < 0 for s in word):
        raise InvalidInputError("matching models use positive letters only")
    maps = _Maps(model, ngen)
    for i, s in enumerate(word):
        res = maps.assign(s, t[i], t[i + 1])
        if res is None:
            return None
        if model == "h" and res:
            j = abs(s)
            x = t[i] if s > 0 else t[i + 1]
            if not maps.h_cycle_ok(j, x, n if n is not None else -1):
                return None
    return FormStats(maps.a(), len(set(t)))


def _prob_from_a(model: str, a, n: int) -> Fraction:
    p = Fraction(1)
    for aj in a:
        if model == "g":
            if aj > n:
                return Fraction(0)
            p /= falling(n, aj)
        elif model == "h":
            if aj >= n:
                p /= factorial(n - 1)
            else:
                p /= falling(n - 1, aj)
        elif model == "i":
            if aj > n:
                return Fraction(0)
            p *= Fraction(odd_factorial(n - aj), odd_factorial(n))
        else:
            pairs, half = divmod(aj, 2)
            if 2 * pairs + half > n:
                return Fraction(0)
            if half:
                p /= prod(n - 2 * i for i in range(pairs + 1))
            else:
                p *= Fraction((n - 2 * pairs) * odd_factorial(n - 1 - 2 * pairs),
                              n * odd_factorial(n - 1))
    return p


def prob_walk(model: str, word, t, n: int) -> Fraction:
    """P(w; t): probability that the random graph contains the potential walk."""
    model = model.lower()
    _check_n(model, n)
    stats = walk_stats(model, word, t, n)
    if stats is None or stats.v > n:
        return Fraction(0)
    return _prob_from_a(model, stats.a, n)


def expected_symm(model: str, stats: FormStats, n: int) -> Fraction:
    """Expected number of walks in the class of ``stats``: n!/(n-v)! * P."""
    model = model.lower()
    if stats.v > n:
        return Fraction(0)
    return falling(n, stats.v) * _prob_from_a(model, stats.a, n)


def _check_n(model, n):
    if model not in PERM_MODELS + MATCH_MODELS:
        raise InvalidInputError(f"unknown model {model!r}")
    if model == "i" and n % 2:
        raise InvalidInputError("model I needs n even")
    if model == "j" and n % 2 == 0:
        raise InvalidInputError("model J needs n odd")


# -- class enumeration --------------------------------------------------

def _enumerate_classes(model: str, n: int, d: int, k: int, budget: int, words=None):
    """Counter of (a, v) over irreducible closed (word, canonical t) pairs.

    Vertices are numbered in order of first use, so every equivalence class
    of vertex vectors is visited exactly once.  ``words`` restricts the
    enumeration to a given list of words.
    """
    ngen = num_generators(model, d)
    letters = alphabet(model, d)
    maps = _Maps(model, ngen)
    out = Counter()
    state = {"v": 1, "work": 0}
    fixed = None if words is None else [tuple(w) for w in words]

    def options(s, x):
        j = abs(s)
        if model in PERM_MODELS:
            src = maps.fwd[j] if s > 0 else maps.bwd[j]
            other = maps.bwd[j] if s > 0 else maps.fwd[j]
            if x in src:
                return [src[x]]
            cands = [y for y in range(state["v"]) if y not in other]
        else:
            m = maps.fwd[j]
            if x in m:
                return [m[x]]
            cands = [y for y in range(state["v"]) if y not in m and y != x]
            if model == "j" and not any(a == b for a, b in m.items()):
                cands.append(x)
        if state["v"] < n:
            cands.append(state["v"])
        return cands

    def rec(i, x, last, word):
        state["work"] += 1
        if state["work"] > budget:
            raise BudgetError("class enumeration exceeded its budget")
        if i == k:
            if x == 0:
                out[(maps.a(), state["v"])] += 1
            return
        if fixed is not None:
            nexts = {w[i] for w in fixed if w[:i] == word}
        else:
            nexts = letters
        for s in nexts:
            if last is not None and s == inverse_letter(model, last):
                continue
            for y in options(s, x):
                new_vertex = y == state["v"]
                res = maps.assign(s, x, y)
                if res is None:
                    continue
                if model == "h" and res:
                    j = abs(s)
                    src = x if s > 0 else y
                    if not maps.h_cycle_ok(j, src, n):
                        maps.unassign(s, x, y)
                        continue
                if new_vertex:
                    state["v"] += 1
                rec(i + 1, y, s, word + (s,))
                if new_vertex:
                    state["v"] -= 1
                if res:
                    maps.unassign(s, x, y)

    rec(0, 0, None, ())
    return out


def exact_expected_trace(model: str, n: int, d: int, k: int, budget: int = 5 * 10**7) -> Fraction:
    """E[IrdTr(A, k)] as an exact rational, by summing over walk classes."""
    model = model.lower()
    _check_n(model, n)
    if k > 8 or n > 64:
        raise BudgetError("exact_expected_trace is limited to k <= 8, n <= 64")
    classes = _enumerate_classes(model, n, d, k, budget)
    return sum((c * expected_symm(model, FormStats(a, v), n) for (a, v), c in classes.items()),
               Fraction(0))


def closed_word_probability(model: str, word, n: int) -> Fraction:
    """P(the walk ``word`` started at a fixed vertex returns to it)."""
    model = model.lower()
    _check_n(model, n)
    classes = _enumerate_classes(model, n, 2 * max(abs(s) for s in word), len(word),
                                 10**7, words=[word])
    return sum((c * falling(n - 1, v - 1) * _prob_from_a(model, a, n)
                for (a, v), c in classes.items()), Fraction(0))


def _instances(model: str, n: int, d: int):
    ngen = num_generators(model, d)
    if model == "g":
        base = list(itertools.permutations(range(n)))
    elif model == "h":
        base = [p for p in itertools.permutations(range(n)) if _is_ncycle(p)]
    else:
        base = list(_matchings(list(range(n)), model == "j"))
    return base, ngen


def _is_ncycle(p) -> bool:
    x, length = p[0], 1
    while x != 0:
        x = p[x]
        length += 1
    return length == len(p)


def _matchings(points, near):
    if not points:
        yield {}
        return
    if near and len(points) % 2 == 1:
        for i, fixed in enumerate(points):
            rest = points[:i] + points[i + 1:]
            for m in _matchings(rest, False):
                m = dict(m)
                m[fixed] = fixed
                yield m
        return
    a = points[0]
    for i in range(1, len(points)):
        b = points[i]
        rest = points[1:i] + points[i + 1:]
        for m in _matchings(rest, False):
            m = dict(m)
            m[a], m[b] = b, a
            yield m


def brute_force_expected_traces(model: str, n: int, d: int, kmax: int,
                                budget: int = 10**6) -> dict:
    """E[IrdTr(A, k)] for k = 1..kmax by averaging over every graph of the model."""
    import numpy as np

    from .models import graph_from_generators
    from .traces import trace_table

    model = model.lower()
    _check_n(model, n)
    base, ngen = _instances(model, n, d)
    total = len(base) ** ngen
    if total > budget:
        raise BudgetError(f"{total} instances exceed the brute-force budget {budget}")
    sums = {k: 0 for k in range(1, kmax + 1)}
    for combo in itertools.product(base, repeat=ngen):
        if model in PERM_MODELS:
            gens = np.array(combo, dtype=np.int64)
        else:
            gens = np.array([[m[x] for x in range(n)] for m in combo], dtype=np.int64)
        tab = trace_table(graph_from_generators(model, gens, d), kmax)
        for k in sums:
            sums[k] += tab.irred[k]
    return {k: Fraction(s, total) for k, s in sums.items()}


def brute_force_expected_trace(model: str, n: int, d: int, k: int,
                               budget: int = 10**6) -> Fraction:
    return brute_force_expected_traces(model, n, d, k, budget)[k]


def word_census(k: int, d: int, start=None, end=None, model: str = "g",
                budget: int = 2 * 10**7):
    """Irreducible words of length k with given first/last letters.

    Returns (count, moments) where ``moments[j-1]`` is the total number of
    occurrences of generator j (either sign) over the counted words.
    """
    model = model.lower()
    letters = alphabet(model, d)
    ngen = num_generators(model, d)
    if len(letters) * (len(letters) - 1) ** max(k - 1, 0) > budget:
        raise BudgetError("word census exceeds its budget")
    count = 0
    moments = [0] * ngen

    def rec(word):
        nonlocal count
        if len(word) == k:
            if end is None or word[-1] == end:
                count += 1
                for s in word:
                    moments[abs(s) - 1] += 1
            return
        for s in letters:
            if not word and start is not None and s != start:
                continue
            if word and s == inverse_letter(model, word[-1]):
                continue
            rec(word + (s,))

    rec(())
    return count, moments


def divisor_count(m: int) -> int:
    return sum(1 for i in range(1, m + 1) if m % i == 0)
