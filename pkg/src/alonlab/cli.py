"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 numerical non-convergence,
4 resource budget exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

import numpy as np

from . import experiments, graph, models, tangles, traces, vlg, walks
from .errors import BudgetError, ConvergenceError, InvalidInputError


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as exc:
        raise InvalidInputError(f"expected comma-separated integers, got {text!r}") from exc


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    def default(x):
        if isinstance(x, Fraction):
            return str(x)
        if isinstance(x, np.generic):
            return x.item()
        if isinstance(x, np.ndarray):
            return x.tolist()
        raise TypeError(type(x).__name__)
    return json.dumps(obj, indent=1, default=default) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _load_tangle(path: str, model: str | None) -> tangles.Tangle:
    g = graph.load_graph(path)
    m = model or g.model
    if not m:
        raise InvalidInputError("tangle model unknown: pass --model or set it in the file")
    return tangles.Tangle(g, m)


# -- handlers --------------------------------------------------------------

def cmd_sample(args):
    g = models.sample(args.model, args.n, args.d, args.seed, args.index)
    text = _json(graph.graph_to_dict(g))
    _emit(args, text)


def cmd_spectrum(args):
    s = experiments.spectrum(graph.load_graph(args.graph))
    if args.format == "csv":
        _emit(args, _csv(["i", "eigenvalue"], [(i + 1, repr(float(v))) for i, v in enumerate(s.values)]))
    else:
        _emit(args, _json({"full": s.full, "eigenvalues": s.values, "lambda2": s.lambda2,
                           "lambda_n": s.lambda_n}))


def cmd_trace_verify(args):
    rows = traces.verify_identities(graph.load_graph(args.graph), args.kmax, args.rel_tol)
    if args.format == "json":
        _emit(args, _json([r.__dict__ for r in rows]))
    else:
        _emit(args, traces.CSV_HEADER + "\n" + "".join(r.csv() + "\n" for r in rows))
    bad = traces.first_failure(rows)
    if bad is not None:
        print(f"warning: identity outside tolerance: {bad}", file=sys.stderr)


def cmd_trace_count(args):
    tab = traces.trace_table(graph.load_graph(args.graph), args.kmax)
    ks = sorted(tab.irred)
    if args.format == "json":
        _emit(args, _json({"irred": tab.irred, "sit": tab.sit, "power": tab.power}))
    else:
        _emit(args, _csv(["k", "irred", "sit", "power"],
                         [(k, tab.irred[k], tab.sit[k], tab.power[k]) for k in ks]))


def cmd_trace_selective(args):
    g = graph.load_graph(args.graph)
    ts = [graph.load_graph(p) for p in args.tangle]
    val = traces.selective_trace(g, args.k, args.s, ts)
    _emit(args, f"{val}\n")


def cmd_tangle_classify(args):
    t = _load_tangle(args.tangle, args.model)
    c = tangles.classify(t, args.d)
    _emit(args, _json({"kind": c.kind, "supercritical": c.supercritical, "value": c.value,
                       "threshold": c.threshold, "exact": c.exact,
                       "order": graph.order(t.graph)}))


def cmd_tangle_occurrences(args):
    g = graph.load_graph(args.graph)
    t = _load_tangle(args.tangle, args.model)
    _emit(args, f"{tangles.count_occurrences(g, t)}\n")


def cmd_tangle_automorphisms(args):
    t = _load_tangle(args.tangle, args.model)
    _emit(args, f"{tangles.automorphism_count(t)}\n")


def cmd_tangle_certificate(args):
    g = graph.load_graph(args.graph)
    t = _load_tangle(args.tangle, args.model)
    c = tangles.certificate_detail(g, t, args.radius)
    _emit(args, _json(c.__dict__))


def cmd_taufund(args):
    tau, t = tangles.tau_fund(args.model, args.d)
    print(tau)
    if args.witness:
        obj = graph.graph_to_dict(t.graph)
        obj["model"] = t.model
        with open(args.witness, "w") as fh:
            fh.write(_json(obj))
        print(args.witness)


def cmd_treed(args):
    x = graph.load_graph(args.graph)
    rho = vlg.tree_d_norm(x, args.d)
    out = {"norm": rho}
    lam = graph.lambda_irred(x)
    out["lambda_irred"] = lam
    if lam > np.sqrt(args.d - 1):
        out["mu_plus"] = vlg.hypercritical_rho(lam, args.d)
    _emit(args, _json(out))


def cmd_vlg_lambda1(args):
    g = vlg.load_vlg(args.vlg)
    res = vlg.shannon(g)
    out = {"lambda1": vlg.lambda1_vlg(g), "z_star": res.z_star, "boundary": res.boundary}
    if args.det:
        out["lambda1_det"] = vlg.lambda1_det(g)
    _emit(args, _json(out))


def cmd_vlg_subdivide(args):
    _emit(args, _json(vlg.vlg_to_dict(vlg.subdivide(vlg.load_vlg(args.vlg)))))


def cmd_vlg_realize(args):
    keep = [v - 1 for v in _ints(args.keep)]
    g = vlg.realize(vlg.load_vlg(args.vlg), keep, args.max_length)
    _emit(args, _json(vlg.vlg_to_dict(g)))


def cmd_oracle_walk(args):
    word = _ints(args.word)
    t = [v - 1 for v in _ints(args.t)] if args.t else None
    if t is None:
        p = walks.closed_word_probability(args.model, word, args.n)
    else:
        p = walks.prob_walk(args.model, word, t, args.n)
    _emit(args, f"{p}\n")


def cmd_oracle_expected(args):
    vals = {k: walks.exact_expected_trace(args.model, args.n, args.d, k)
            for k in range(1, args.kmax + 1)}
    _emit(args, _csv(["k", "expected_irred_trace"], [(k, str(v)) for k, v in vals.items()]))


def cmd_oracle_brute(args):
    vals = walks.brute_force_expected_traces(args.model, args.n, args.d, args.kmax)
    _emit(args, _csv(["k", "expected_irred_trace"], [(k, str(v)) for k, v in vals.items()]))


def cmd_experiment_run(args):
    cfg = experiments.ExperimentConfig.from_json(args.config)
    if args.workers is not None:
        cfg.workers = args.workers
    out = args.out or cfg.output
    cfg.output = None
    rows = experiments.run_campaign(cfg)
    text = experiments.rows_to_csv(rows) if args.format == "csv" else _json(rows)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_experiment_fit(args):
    rows = experiments.read_rows(args.csv)
    slope, se = experiments.fit_exponent(rows, args.column)
    _emit(args, _json({"slope": slope, "stderr": se}))


def cmd_spreader(args):
    g = graph.load_graph(args.graph)
    rep = experiments.spreader_check(g, args.gamma)
    out = {"gamma": args.gamma, "holds": rep.holds, "worst_ratio": rep.worst_ratio,
           "witness": [v + 1 for v in rep.witness]}
    if rep.holds and g.regular_degree() is not None:
        sep = experiments.separation_check(g, args.gamma)
        out["separation"] = sep.__dict__
    _emit(args, _json(out))


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="alonlab", description="Random regular graph spectra toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def add(parent, name, func, help_text, out=True, fmt=None):
        q = parent.add_parser(name, help=help_text)
        q.set_defaults(func=func)
        if out:
            q.add_argument("--out", help="output file (default: stdout)")
        if fmt:
            q.add_argument("--format", choices=["json", "csv"], default=fmt)
        return q

    q = add(sub, "sample", cmd_sample, "sample a random graph")
    q.add_argument("--model", required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--d", type=int, required=True)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--index", type=int, default=0)

    q = add(sub, "spectrum", cmd_spectrum, "adjacency eigenvalues", fmt="json")
    q.add_argument("graph")

    tr = sub.add_parser("trace", help="trace computations").add_subparsers(dest="action", required=True)
    q = add(tr, "verify", cmd_trace_verify, "check the trace identities", fmt="csv")
    q.add_argument("graph")
    q.add_argument("--kmax", type=int, default=10)
    q.add_argument("--rel-tol", type=float, default=1e-6)
    q = add(tr, "count", cmd_trace_count, "irreducible and power traces", fmt="csv")
    q.add_argument("graph")
    q.add_argument("--kmax", type=int, default=10)
    q = add(tr, "selective", cmd_trace_selective, "selective trace")
    q.add_argument("graph")
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--s", type=int, required=True)
    q.add_argument("--tangle", action="append", default=[], help="tangle file (repeatable)")

    tg = sub.add_parser("tangle", help="tangle tools").add_subparsers(dest="action", required=True)
    q = add(tg, "classify", cmd_tangle_classify, "criticality of a tangle")
    q.add_argument("tangle")
    q.add_argument("--d", type=float, required=True)
    q.add_argument("--model")
    q = add(tg, "occurrences", cmd_tangle_occurrences, "count occurrences in a graph")
    q.add_argument("graph")
    q.add_argument("--tangle", required=True)
    q.add_argument("--model")
    q = add(tg, "automorphisms", cmd_tangle_automorphisms, "label-preserving automorphisms")
    q.add_argument("tangle")
    q.add_argument("--model")
    q = add(tg, "certificate", cmd_tangle_certificate, "lower bound on lambda_2")
    q.add_argument("graph")
    q.add_argument("--tangle", required=True)
    q.add_argument("--radius", type=int, default=8)
    q.add_argument("--model")

    q = add(sub, "taufund", cmd_taufund, "tau_fund and a witness tangle", out=False)
    q.add_argument("--model", required=True)
    q.add_argument("--d", type=int, required=True)
    q.add_argument("--witness", default="witness.json", help="witness output file")

    q = add(sub, "treed", cmd_treed, "norm of Tree_d(x)")
    q.add_argument("graph")
    q.add_argument("--d", type=float, required=True)

    vg = sub.add_parser("vlg", help="variable-length graphs").add_subparsers(dest="action", required=True)
    q = add(vg, "lambda1", cmd_vlg_lambda1, "growth rate of a VLG")
    q.add_argument("vlg")
    q.add_argument("--det", action="store_true", help="also run the determinant criterion")
    q = add(vg, "subdivide", cmd_vlg_subdivide, "subdivide all edges to length one")
    q.add_argument("vlg")
    q = add(vg, "realize", cmd_vlg_realize, "realisation on a vertex subset")
    q.add_argument("vlg")
    q.add_argument("--keep", required=True, help="1-based vertices, comma separated")
    q.add_argument("--max-length", type=int, default=64)

    orc = sub.add_parser("oracle", help="exact walk oracles").add_subparsers(dest="action", required=True)
    q = add(orc, "walk", cmd_oracle_walk, "probability of a walk")
    q.add_argument("--model", required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--word", required=True, help="letters, e.g. 1,2,-1,-2")
    q.add_argument("--t", help="1-based vertex sequence; omit for the closed-walk probability")
    for name, func, text in (("expected", cmd_oracle_expected, "exact expected traces"),
                             ("brute", cmd_oracle_brute, "expected traces by enumeration")):
        q = add(orc, name, func, text)
        q.add_argument("--model", required=True)
        q.add_argument("--n", type=int, required=True)
        q.add_argument("--d", type=int, required=True)
        q.add_argument("--kmax", type=int, default=6)

    ex = sub.add_parser("experiment", help="Monte Carlo campaigns").add_subparsers(dest="action", required=True)
    q = add(ex, "run", cmd_experiment_run, "run a campaign", fmt="csv")
    q.add_argument("--config", required=True)
    q.add_argument("--workers", type=int)
    q = add(ex, "fit", cmd_experiment_fit, "fit the decay exponent")
    q.add_argument("csv")
    q.add_argument("--column", default="p_bare", choices=["p_bare", "p_eps"])

    q = add(sub, "spreader", cmd_spreader, "exhaustive spreader and separation check")
    q.add_argument("graph")
    q.add_argument("--gamma", type=float, required=True)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.func(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return int(code or 0)


if __name__ == "__main__":
    sys.exit(main())
