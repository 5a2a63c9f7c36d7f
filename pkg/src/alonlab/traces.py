"""Exact walk counts and the polynomial identities tying them to eigenvalues.

* ``IrdTr(k)``: irreducible (non-backtracking) closed walks of length k.
* ``SIT(k)``: strongly irreducible closed walks, i.e. Tr(B^k) for the
  non-backtracking matrix B; for k = 1 each half-loop also counts once.
* ``q_k``: q_1 = x, q_2 = x^2 - d, q_k = x q_{k-1} - (d-1) q_{k-2}, with
  IrdTr(k) = sum_i q_k(lambda_i) on a d-regular graph.

All counts use integer arithmetic on directed-edge states; floating point
only enters through the adjacency eigenvalues.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import BudgetError, InvalidInputError
from .graph import LabeledGraph, nonbacktracking
from .matching import contains

DEFAULT_BUDGET = 5 * 10**9
_INT_LIMIT = 2**62


# -- polynomials --------------------------------------------------------

@dataclass(frozen=True)
class TracePolynomial:
    """Exact integer coefficients of q_k (``coeffs[i]`` multiplies x**i)."""

    k: int
    d: int
    coeffs: tuple

    @classmethod
    def build(cls, k: int, d: int) -> "TracePolynomial":
        if k < 1:
            raise InvalidInputError("k must be >= 1")
        prev = [0, 1]           # q_1
        if k == 1:
            return cls(1, d, tuple(prev))
        cur = [-d, 0, 1]        # q_2
        for _ in range(3, k + 1):
            nxt = [0] + cur
            for i, c in enumerate(prev):
                nxt[i] -= (d - 1) * c
            prev, cur = cur, nxt
        return cls(k, d, tuple(cur))

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, np.array(self.coeffs, dtype=float))

    def exact(self, x: int) -> int:
        return sum(c * x**i for i, c in enumerate(self.coeffs))


def q_values(k: int, d, x) -> np.ndarray:
    """q_k evaluated elementwise by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    prev = x
    if k == 1:
        return prev.copy()
    cur = x * x - d
    for _ in range(3, k + 1):
        prev, cur = cur, x * cur - (d - 1) * prev
    return cur


def q_eval(k: int, d, spectrum) -> float:
    """sum_i q_k(lambda_i)."""
    return float(np.sum(q_values(k, d, spectrum)))


@dataclass(frozen=True)
class SitEvaluator:
    """mu_{1,2} = (lam +- sqrt(lam^2 - 4(d-1)))/2 and the q-tilde values."""

    k: int
    d: float
    lam: float

    @property
    def mus(self) -> tuple[complex, complex]:
        disc = np.sqrt(complex(self.lam**2 - 4 * (self.d - 1)))
        return (self.lam + disc) / 2, (self.lam - disc) / 2

    def q_tilde(self) -> float:
        return float(_q_tilde(self.k, self.d, np.array([self.lam]))[0])

    def q_hat(self) -> float:
        return float(_q_hat(self.k, self.d, np.array([self.lam]))[0])


def _power_sums(k: int, d, x: np.ndarray) -> np.ndarray:
    """mu1^k + mu2^k via s_k = x s_{k-1} - (d-1) s_{k-2}, s_0 = 2, s_1 = x."""
    prev, cur = np.full_like(x, 2.0), x.copy()
    if k == 0:
        return prev
    for _ in range(2, k + 1):
        prev, cur = cur, x * cur - (d - 1) * prev
    return cur


def _q_tilde(k, d, x):
    return _power_sums(k, d, x) + (1 + (-1) ** k) * (d - 2) / 2


def _q_hat(k, d, x):
    out = _q_tilde(k, d, x)
    if k % 2 == 1 and k >= 3:
        out = out - x
    return out


def sit_eval(k: int, d, spectrum, half_loops: int = 0, whole_loops_present: bool = False) -> float:
    """sum_i q-tilde_k(lambda_i), or q-hat_k when the graph has half-loops."""
    if half_loops and whole_loops_present:
        raise InvalidInputError("no polynomial formula for graphs with both loop kinds")
    x = np.asarray(spectrum, dtype=float)
    vals = _q_hat(k, d, x) if half_loops else _q_tilde(k, d, x)
    return float(np.sum(vals))


def n_reduced(k: int, i: int, d: int) -> int:
    """Walks of length k on the d-regular tree from the root to one fixed vertex at distance i."""
    if i < 0 or i > k or (k - i) % 2:
        return 0
    counts = [1] + [0] * k
    for _ in range(k):
        nxt = [0] * (k + 1)
        for j, c in enumerate(counts):
            if not c:
                continue
            if j == 0:
                nxt[1] += d * c
            else:
                if j + 1 <= k:
                    nxt[j + 1] += (d - 1) * c
                nxt[j - 1] += c
        counts = nxt
    sphere = 1 if i == 0 else d * (d - 1) ** (i - 1)
    q, r = divmod(counts[i], sphere)
    assert r == 0
    return q


def reduced_walk_bound(k: int, i: int, d: int) -> float:
    """Upper bound on n_reduced(k, i, d)."""
    base = (2 * np.sqrt(d - 1)) ** k
    if i == 0:
        return base
    return base * (d - 1) ** (-i / 2) * np.sqrt((d - 1) / d)


# -- exact counters -----------------------------------------------------

@dataclass
class TraceTable:
    irred: dict      # k -> IrdTr(k)
    sit: dict        # k -> SIT(k) (k=1 includes half-loops)
    power: dict      # k -> Tr(A^k)


def _check_budget(g: LabeledGraph, kmax: int, budget: int):
    m = g.num_directed
    if m * m * max(kmax, 1) > budget:
        raise BudgetError(f"directed-edge DP of size {m}^2 x {kmax} exceeds budget {budget}")
    deg = int(g.degrees.max()) if g.n else 0
    if m * max(deg, 2) ** (kmax + 1) >= _INT_LIMIT:
        raise BudgetError("walk counts would overflow 64-bit integers")


def trace_table(g: LabeledGraph, kmax: int, budget: int = DEFAULT_BUDGET,
                block: int = 4096) -> TraceTable:
    """IrdTr, SIT and Tr(A^k) for k = 1..kmax in one sweep."""
    if kmax < 1:
        raise InvalidInputError("kmax must be >= 1")
    _check_budget(g, kmax, budget)
    m = g.num_directed
    bt = nonbacktracking(g).matrix.T.tocsr()
    head_ind = sp.csr_matrix((np.ones(m, dtype=np.int64), (g.head, np.arange(m))),
                             shape=(g.n, m))
    irred = {k: 0 for k in range(1, kmax + 1)}
    sit = {k: 0 for k in range(1, kmax + 1)}
    for lo in range(0, m, block):
        rows = np.arange(lo, min(lo + block, m))
        # column c of x holds row rows[c] of B^(j-1), transposed
        x = np.zeros((m, len(rows)), dtype=np.int64)
        x[rows, np.arange(len(rows))] = 1
        for j in range(1, kmax + 1):
            by_head = head_ind @ x          # (n, b): walks grouped by end vertex
            irred[j] += int(by_head[g.tail[rows], np.arange(len(rows))].sum())
            x = bt @ x
            sit[j] += int(x[rows, np.arange(len(rows))].sum())
    sit[1] += g.num_half_loops
    a = g.adjacency(sparse=True)
    power = {}
    p = a.toarray()
    for k in range(1, kmax + 1):
        power[k] = int(np.trace(p))
        if k < kmax:
            p = a @ p
    return TraceTable(irred, sit, power)


def irred_trace(g: LabeledGraph, k: int, budget: int = DEFAULT_BUDGET) -> int:
    if k == 0:
        return g.n
    return trace_table(g, k, budget).irred[k]


def strongly_irred_trace(g: LabeledGraph, k: int, budget: int = DEFAULT_BUDGET) -> int:
    return trace_table(g, k, budget).sit[k]


def selective_trace(g: LabeledGraph, k: int, s: int, tangles, budget: int = 10**8) -> int:
    """Irreducible closed walks of length k none of whose length-<=s windows trace a tangle.

    Dynamic programming over (start vertex, last min(s, i) directed edges);
    the containment test for a window depends only on the set of edge pairs
    it traverses and is memoised.
    """
    if k < 1 or s < 1:
        raise InvalidInputError("k and s must be >= 1")
    patterns = [getattr(t, "graph", t) for t in tangles]
    nb = nonbacktracking(g).matrix
    out_edges = [[] for _ in range(g.n)]
    for e in range(g.num_directed):
        out_edges[int(g.tail[e])].append(e)
    memo: dict = {}

    def bad(window) -> bool:
        key = frozenset(int(g.pair_of[e]) for e in window)
        hit = memo.get(key)
        if hit is None:
            hit = any(contains(t, g, sorted(key)) for t in patterns)
            memo[key] = hit
        return hit

    work = 0
    total = 0
    for v0 in range(g.n):
        states = {}
        for e in out_edges[v0]:
            w = (e,)
            if not bad(w):
                states[w] = states.get(w, 0) + 1
        for _ in range(1, k):
            nxt = {}
            for w, c in states.items():
                last = w[-1]
                for f in nb.indices[nb.indptr[last]:nb.indptr[last + 1]]:
                    nw = (w + (int(f),))[-s:]
                    work += 1
                    if bad(nw):
                        continue
                    nxt[nw] = nxt.get(nw, 0) + c
            if work > budget:
                raise BudgetError("selective trace exceeded its work budget")
            states = nxt
        total += sum(c for w, c in states.items() if g.head[w[-1]] == v0)
    return total


# -- identity report ----------------------------------------------------

@dataclass
class IdentityRow:
    identity: str
    k: int
    lhs: float
    rhs: float
    abs_err: float
    passed: bool

    def csv(self) -> str:
        return f"{self.identity},{self.k},{self.lhs!r},{self.rhs!r},{self.abs_err!r},{self.passed}"


CSV_HEADER = "identity,k,lhs,rhs,abs_err,pass"


def _rel_ok(lhs, rhs, scale, tol):
    return abs(lhs - rhs) <= tol * max(1.0, scale)


def sit_decomposition_rhs(k: int, d: int, sit: dict, h: int) -> int:
    """IrdTr(k) rebuilt from strongly irreducible counts of lengths k, k-2, ..."""
    total = sit[k]
    for i in range(1, (k - 1) // 2 + 1):
        total += (d - 2) * (d - 1) ** (i - 1) * sit[k - 2 * i]
    if k % 2 == 1 and k >= 3:
        total += (d - 1) ** ((k - 3) // 2) * h
    return total


def verify_identities(g: LabeledGraph, kmax: int, rel_tol: float = 1e-6,
                      spectrum=None) -> list[IdentityRow]:
    """Check the four trace identities for k = 1..kmax on a d-regular graph.

    Relative errors for the floating identities are measured against
    ``max(1, sum_i |term_i|)`` since the exact side is often 0.
    """
    d = g.regular_degree()
    if d is None:
        raise InvalidInputError("trace identities need a regular graph")
    if g.n > 2000:
        raise BudgetError("dense spectrum limited to n <= 2000")
    if spectrum is None:
        spectrum = np.linalg.eigvalsh(g.adjacency().astype(float))[::-1]
    tab = trace_table(g, kmax)
    h, w = g.num_half_loops, g.num_whole_loops
    rows = []
    for k in range(1, kmax + 1):
        qv = q_values(k, d, spectrum)
        rhs = float(qv.sum())
        lhs = tab.irred[k]
        rows.append(IdentityRow("irred_vs_q", k, lhs, rhs, abs(lhs - rhs),
                                _rel_ok(lhs, rhs, float(np.abs(qv).sum()), rel_tol)))

        decomp = sum(n_reduced(k, i, d) * (g.n if i == 0 else tab.irred[i])
                     for i in range(k % 2, k + 1, 2))
        rows.append(IdentityRow("walk_decomposition", k, tab.power[k], decomp,
                                abs(tab.power[k] - decomp), tab.power[k] == decomp))

        ms = sit_decomposition_rhs(k, d, tab.sit, h)
        rows.append(IdentityRow("sit_decomposition", k, lhs, ms, abs(lhs - ms), lhs == ms))

        if h and w:
            continue
        x = np.asarray(spectrum, dtype=float)
        sv = _q_hat(k, d, x) if h else _q_tilde(k, d, x)
        srhs = float(sv.sum())
        rows.append(IdentityRow("sit_vs_qtilde", k, tab.sit[k], srhs, abs(tab.sit[k] - srhs),
                                _rel_ok(tab.sit[k], srhs, float(np.abs(sv).sum()), rel_tol)))
    return rows


def first_failure(rows: list[IdentityRow]):
    for r in rows:
        if not r.passed:
            return r.identity, r.k
    return None
