"""Eigenvalues, spreader checks and Monte Carlo campaigns."""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from math import sqrt

import numpy as np
import scipy.sparse.linalg as ssla
from scipy import stats
from statsmodels.stats.proportion import proportion_confint

from .errors import BudgetError, ConvergenceError, InvalidInputError
from .graph import LabeledGraph
from .models import check_model, max_workers, sample, stream_seed

DENSE_LIMIT = 2000
SPREADER_LIMIT = 24


# -- spectra ------------------------------------------------------------

@dataclass
class Spectrum:
    """Adjacency eigenvalues in descending order.

    In iterative mode (n > DENSE_LIMIT) ``values`` holds only
    [lambda_1, lambda_2, lambda_n] and ``full`` is False.
    """
    values: np.ndarray
    full: bool

    @property
    def lambda1(self) -> float:
        return float(self.values[0])

    @property
    def lambda2(self) -> float:
        return float(self.values[1]) if len(self.values) > 1 else float("nan")

    @property
    def lambda_n(self) -> float:
        return float(self.values[-1])

    @property
    def absmax(self) -> float:
        """max(|lambda_2|, |lambda_n|): the largest nontrivial eigenvalue in modulus."""
        if len(self.values) < 2:
            return float("nan")
        return max(abs(self.lambda2), abs(self.lambda_n))


def spectrum(g: LabeledGraph, dense_limit: int = DENSE_LIMIT) -> Spectrum:
    a = g.adjacency(sparse=True).astype(float)
    if g.n <= dense_limit:
        vals = np.linalg.eigvalsh(a.toarray())
        return Spectrum(vals[::-1].copy(), True)
    d = g.regular_degree() or float(np.max(g.degrees))
    tol = 1e-9 * d
    try:
        top = ssla.eigsh(a, k=2, which="LA", tol=tol, return_eigenvectors=False)
        bottom = ssla.eigsh(a, k=1, which="SA", tol=tol, return_eigenvectors=False)
    except ssla.ArpackNoConvergence as exc:
        raise ConvergenceError(f"eigsh did not converge: {exc}") from exc
    top = np.sort(top)[::-1]
    return Spectrum(np.array([top[0], top[1], bottom[0]]), False)


def second_eigenvalues(g: LabeledGraph) -> tuple[float, float]:
    """(lambda_2, lambda_n); one dense solve up to DENSE_LIMIT vertices."""
    if g.n > DENSE_LIMIT:
        s = spectrum(g)
        return s.lambda2, s.lambda_n
    vals = np.linalg.eigvalsh(g.adjacency(sparse=False).astype(float))
    return float(vals[-2]), float(vals[0])


# -- spreaders ----------------------------------------------------------

@dataclass
class SpreaderReport:
    gamma: float
    holds: bool
    worst_ratio: float          # min |Gamma(A)|/|A| over 1 <= |A| <= n/2
    witness: list               # a subset achieving the worst ratio

    @property
    def best_gamma(self) -> float:
        return self.worst_ratio - 1.0


def _neighbour_masks(g: LabeledGraph) -> list[int]:
    nb = [0] * g.n
    for u, v in zip(g.tail.tolist(), g.head.tolist()):
        nb[u] |= 1 << v
    return nb


def spreader_check(g: LabeledGraph, gamma: float) -> SpreaderReport:
    """Exhaustive test of |Gamma(A)| >= (1+gamma)|A| for all |A| <= n/2.

    Gamma(A) is the set of vertices adjacent to some vertex of A (a
    looped vertex is adjacent to itself).  Neighbourhood masks of all
    2^n subsets are built by doubling, then compared by popcount.
    """
    n = g.n
    if n > SPREADER_LIMIT:
        raise BudgetError(f"exhaustive spreader check is limited to n <= {SPREADER_LIMIT}")
    nb = _neighbour_masks(g)
    masks = np.zeros(1, dtype=np.uint32)
    for v in range(n):
        masks = np.concatenate([masks, masks | np.uint32(nb[v])])
    subsets = np.arange(1 << n, dtype=np.uint32)
    size = np.bitwise_count(subsets).astype(np.int64)
    ok = (size >= 1) & (2 * size <= n)
    if not ok.any():
        return SpreaderReport(gamma, True, float("inf"), [])
    image = np.bitwise_count(masks).astype(np.int64)
    idx = np.flatnonzero(ok)
    ratio = image[idx] / size[idx]
    k = int(np.argmin(ratio))
    worst = float(ratio[k])
    subset = int(idx[k])
    witness = [v for v in range(n) if subset >> v & 1]
    holds = bool(np.all(image[idx] >= (1 + gamma) * size[idx] - 1e-12))
    return SpreaderReport(gamma, holds, worst, witness)


@dataclass
class SeparationReport:
    gamma: float
    bound: float                # d^2 - gamma^2/(4+2 gamma^2)
    max_square: float           # max lambda_i^2 over i > 1
    holds: bool


def separation_check(g: LabeledGraph, gamma: float, spec: Spectrum | None = None) -> SeparationReport:
    d = g.regular_degree()
    if d is None:
        raise InvalidInputError("separation check needs a regular graph")
    spec = spec or spectrum(g)
    rest = spec.values[1:]      # iterative mode keeps lambda_2 and lambda_n, the extremes
    bound = d * d - gamma * gamma / (4 + 2 * gamma * gamma)
    top = float(np.max(rest ** 2)) if len(rest) else 0.0
    return SeparationReport(gamma, bound, top, top <= bound + 1e-9 * d)


# -- campaigns ----------------------------------------------------------

CSV_FIELDS = ["model", "d", "n", "samples", "seed", "exceed_bare", "exceed_eps", "p_bare",
              "p_eps", "wilson_lo", "wilson_hi", "median_lambda2", "median_absmax"]


@dataclass
class ExperimentConfig:
    model: str
    d: int
    n_list: list
    samples: int
    epsilon: float = 0.3
    seed: int = 0
    workers: int | None = None
    output: str | None = None
    thresholds: dict = field(default_factory=dict)   # optional {"bare": x, "eps": y}

    def __post_init__(self):
        self.model = self.model.lower()
        if self.samples < 100:
            raise InvalidInputError("samples must be at least 100")
        if len(self.n_list) == 0 or any(b <= a for a, b in zip(self.n_list, self.n_list[1:])):
            raise InvalidInputError("n_list must be nonempty and strictly increasing")
        for n in self.n_list:
            check_model(self.model, n, self.d)
        unknown = set(self.thresholds) - {"bare", "eps"}
        if unknown:
            raise InvalidInputError(f"unknown threshold keys {sorted(unknown)}")

    @property
    def bare(self) -> float:
        return float(self.thresholds.get("bare", 2 * sqrt(self.d - 1)))

    @property
    def eps_threshold(self) -> float:
        return float(self.thresholds.get("eps", self.bare + self.epsilon))

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            obj = json.load(fh)
        known = {"model", "d", "n_list", "samples", "epsilon", "seed", "workers", "output",
                 "thresholds"}
        extra = set(obj) - known
        if extra:
            raise InvalidInputError(f"unknown config keys {sorted(extra)}")
        return cls(**obj)

    def to_dict(self) -> dict:
        return asdict(self)


def sample_seed(seed: int, n: int) -> int:
    """Root seed for the samples at size n; sample i then uses stream i."""
    return stream_seed(seed, n)


def _eigs_chunk(args):
    model, n, d, root, start, stop = args
    out = np.empty((stop - start, 2))
    for i in range(start, stop):
        g = sample(model, n, d, root, i)
        out[i - start] = second_eigenvalues(g)
    return start, out


def sample_eigenvalues(model: str, n: int, d: int, samples: int, seed: int = 0,
                       workers: int | None = None) -> np.ndarray:
    """(lambda_2, lambda_n) for each sample index, independent of the worker count."""
    root = sample_seed(seed, n)
    w = max_workers(workers)
    bounds = np.linspace(0, samples, min(samples, 8 * w) + 1).astype(int)
    tasks = [(model, n, d, root, int(a), int(b)) for a, b in zip(bounds, bounds[1:]) if b > a]
    out = np.empty((samples, 2))
    if w == 1:
        results = map(_eigs_chunk, tasks)
        for start, vals in results:
            out[start:start + len(vals)] = vals
        return out
    with ProcessPoolExecutor(max_workers=w) as ex:
        for start, vals in ex.map(_eigs_chunk, tasks):
            out[start:start + len(vals)] = vals
    return out


def summarize(cfg: ExperimentConfig, n: int, eig: np.ndarray) -> dict:
    lam2, lamn = eig[:, 0], eig[:, 1]
    absmax = np.maximum(np.abs(lam2), np.abs(lamn))
    m = len(lam2)
    eb = int(np.sum(lam2 > cfg.bare))
    ee = int(np.sum(lam2 > cfg.eps_threshold))
    lo, hi = proportion_confint(eb, m, alpha=0.05, method="wilson")
    return {"model": cfg.model, "d": cfg.d, "n": n, "samples": m, "seed": cfg.seed,
            "exceed_bare": eb, "exceed_eps": ee, "p_bare": eb / m, "p_eps": ee / m,
            "wilson_lo": float(lo), "wilson_hi": float(hi),
            "median_lambda2": float(np.median(lam2)), "median_absmax": float(np.median(absmax))}


def run_campaign(cfg: ExperimentConfig) -> list[dict]:
    rows = []
    for n in cfg.n_list:
        eig = sample_eigenvalues(cfg.model, n, cfg.d, cfg.samples, cfg.seed, cfg.workers)
        rows.append(summarize(cfg, n, eig))
    if cfg.output:
        write_rows(rows, cfg.output)
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def write_rows(rows, path) -> None:
    with open(path, "w") as fh:
        fh.write(rows_to_csv(rows))


def read_rows(path) -> list[dict]:
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        for k in ("n", "samples", "exceed_bare", "exceed_eps", "d", "seed"):
            r[k] = int(r[k])
        for k in ("p_bare", "p_eps", "wilson_lo", "wilson_hi", "median_lambda2", "median_absmax"):
            r[k] = float(r[k])
    return rows


def fit_exponent(rows, column: str = "p_bare") -> tuple[float, float]:
    """Least-squares slope of log p against log n, with its standard error."""
    pts = [(r["n"], r[column]) for r in rows if r[column] > 0]
    if len(pts) < 3:
        raise InvalidInputError("need at least three sizes with nonzero counts to fit")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    fit = stats.linregress(x, y)
    return float(fit.slope), float(fit.stderr)
