"""Command-line interface.

Exit codes: 0 ok, 2 usage, 3 unreadable or malformed input, 4 parameter
out of domain, 5 exact enumeration cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import generators, kcenter, kmedian
from .errors import GraphFormatError, ParameterError, UGClusterError
from .exact import ExactOracle, default_edge_cap
from .graph import UncertainGraph, parse_graph
from .sampling import SampleSet, sample_worlds, samples_for_kcenter_simple, samples_for_kmedian

KMEDIAN_ALGOS = ("oracle-greedy", "kmd2", "search", "search-plus", "adaptive")
KCENTER_ALGOS = ("gonzalez", "search", "gonzalez-sampled", "guess", "search-plus")
MAX_AUTO_SAMPLES = 10_000_000


def load_graph(path: str) -> UncertainGraph:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise GraphFormatError(f"cannot read {path}: {exc.strerror}") from None
    return parse_graph(text)


def _emit(doc: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(doc + "\n")
    else:
        sys.stdout.write(doc + "\n")


def _kcenter_eps(args, variant) -> kcenter.KCenterEps:
    parts = [args.epsilon1, args.epsilon2]
    if variant == "plus":
        parts.append(args.epsilon3)
    if all(p is not None for p in parts):
        if variant == "search":
            return kcenter.KCenterEps.search(*parts)
        if variant == "guess":
            return kcenter.KCenterEps.guess(*parts, args.delta)
        return kcenter.KCenterEps.plus(*parts, args.delta)
    if any(p is not None for p in parts):
        raise ParameterError("give either --epsilon or every --epsilonN for this algorithm")
    return kcenter.KCenterEps.even(args.epsilon, variant, args.delta)


def _samples(args, g, default_count):
    if getattr(args, "samples_cache", None):
        return SampleSet.load(args.samples_cache, g)
    count = args.samples if args.samples is not None else default_count()
    if count > MAX_AUTO_SAMPLES:
        raise ParameterError(f"{count} samples requested; pass --samples to override the bound")
    return sample_worlds(g, count, args.seed)


def solve(problem: str, args, g: UncertainGraph):
    """Dispatch one solve and stamp the seed into the report params."""
    rep = _solve(problem, args, g)
    rep.params.setdefault("seed", args.seed)
    return rep


def _solve(problem: str, args, g: UncertainGraph):
    k = args.k
    oracle = ExactOracle(g, args.cap) if getattr(args, "exact_score", False) else None
    if problem == "kmedian":
        algo = args.algo
        if algo == "oracle-greedy":
            return kmedian.solve_kmedian_oracle(g, k, ExactOracle(g, args.cap))
        if algo == "kmd2":
            return kmedian.solve_kmd2_baseline(g, k, ExactOracle(g, args.cap))
        if algo == "adaptive":
            return kmedian.sampling_km(g, k, args.epsilon, args.delta, args.seed, oracle)
        r = _samples(args, g, lambda: samples_for_kmedian(g.n, k, args.epsilon, args.delta, k / g.n))
        fn = kmedian.search_km if algo == "search" else kmedian.search_km_plus
        return fn(g, k, r, oracle)
    algo = args.algo
    if algo == "gonzalez":
        return kcenter.gonzalez(g, k, ExactOracle(g, args.cap))
    if algo == "search":
        return kcenter.search_kc(g, k, _kcenter_eps(args, "search"), ExactOracle(g, args.cap))
    if algo == "gonzalez-sampled":
        eps = _kcenter_eps(args, "guess")
        bound = args.opt_bound if args.opt_bound is not None else math.exp(g.log_edge_product)

        def default():
            if bound <= 0:
                raise ParameterError("no positive OPT lower bound; pass --samples or --opt-bound")
            return samples_for_kcenter_simple(g.n, eps.epsilon1, eps.epsilon2, eps.delta, bound)

        rep = kcenter.search_kc_1(g, k, _samples(args, g, default), oracle)
        rep.params.update(eps.to_dict())
        return rep
    if algo == "guess":
        return kcenter.sampling_kc_1(g, k, _kcenter_eps(args, "guess"), args.seed, oracle)
    return kcenter.search_kc_plus(g, k, _kcenter_eps(args, "plus"), args.seed, oracle)


def cmd_exact(args):
    g = load_graph(args.graph)
    table = ExactOracle(g, args.cap).table()
    doc = {"n": g.n, "source": "exact", "pairs": table.to_pairs(), "graph_fingerprint": g.fingerprint}
    _emit(json.dumps(doc, sort_keys=True, indent=2), args.out)


def cmd_sample(args):
    g = load_graph(args.graph)
    if args.samples < 1:
        raise ParameterError("--samples must be positive")
    r = sample_worlds(g, args.samples, args.seed)
    if args.cache_out:
        r.save(args.cache_out)
    doc = {
        "n": g.n,
        "source": "estimated",
        "samples": len(r),
        "seed": args.seed,
        "pairs": r.table().to_pairs(),
        "graph_fingerprint": g.fingerprint,
    }
    _emit(json.dumps(doc, sort_keys=True, indent=2), args.out)


def _cmd_solve(problem):
    def run(args):
        g = load_graph(args.graph)
        rep = solve(problem, args, g)
        _emit(rep.to_json(timing=not args.no_timing), args.out)

    return run


def cmd_gen(args):
    model = args.model
    if model == "path":
        g = generators.path(args.n, args.p)
    elif model == "cycle":
        g = generators.cycle(args.n, args.p)
    elif model == "grid":
        g = generators.grid(args.rows, args.cols, args.p)
    else:
        g = generators.erdos_renyi(args.n, args.density, args.pmin, args.pmax, args.seed)
    text = g.to_text()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


DEFAULT_MATRIX = {
    "graphs": [
        {"model": "path", "n": 6, "p": 0.6},
        {"model": "grid", "rows": 3, "cols": 3, "p": 0.5},
        {"model": "erdos-renyi-probabilistic", "n": 30, "density": 0.15, "pmin": 0.2, "pmax": 0.9, "seed": 1},
    ],
    "ks": [1, 2, 3],
    "algorithms": [
        {"problem": "kmedian", "algo": "search-plus", "samples": 500},
        {"problem": "kmedian", "algo": "adaptive", "epsilon": 0.3, "delta": 0.1},
        {"problem": "kcenter", "algo": "gonzalez-sampled", "samples": 500},
        {"problem": "kcenter", "algo": "search-plus", "epsilon": 0.4, "delta": 0.1},
    ],
    "seeds": [0, 1],
}


def _graph_from_params(params: dict) -> UncertainGraph:
    params = dict(params)
    model = params.pop("model")
    if model not in generators.MODELS:
        raise ParameterError(f"unknown generator model {model!r}")
    return generators.MODELS[model](**params)


def _bench_cell(cell):
    gi, gspec, k, aspec, seed = cell
    g = _graph_from_params(gspec)
    if k > g.n:
        return None
    ns = argparse.Namespace(
        k=k, seed=seed, cap=default_edge_cap(), exact_score=False, samples=None, samples_cache=None,
        epsilon=0.3, delta=0.1, epsilon1=None, epsilon2=None, epsilon3=None, opt_bound=None,
    )
    for key, val in aspec.items():
        if key != "problem":
            setattr(ns, key, val)
    rep = solve(aspec["problem"], ns, g)
    return {
        "graph": gi,
        "generator": gspec,
        "n": g.n,
        "m": g.m,
        "k": k,
        "problem": aspec["problem"],
        "algo": aspec["algo"],
        "seed": seed,
        "centers": list(rep.centers),
        "objective": rep.objective,
        "value": rep.value,
        "samples": rep.samples,
        "evaluations": rep.evaluations,
        "duration": rep.duration,
    }


def cmd_bench(args):
    if args.matrix:
        try:
            with open(args.matrix) as fh:
                matrix = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise GraphFormatError(f"cannot load matrix {args.matrix}: {exc}") from None
    else:
        matrix = DEFAULT_MATRIX
    cells = [
        (gi, gspec, k, aspec, seed)
        for gi, gspec in enumerate(matrix["graphs"])
        for k in matrix["ks"]
        for aspec in matrix["algorithms"]
        for seed in matrix["seeds"]
    ]
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        if args.jobs > 1:
            with ProcessPoolExecutor(args.jobs) as pool:
                records = pool.map(_bench_cell, cells)
                _write_records(records, out)
        else:
            _write_records(map(_bench_cell, cells), out)
    finally:
        if args.out:
            out.close()


def _write_records(records, out):
    for rec in records:
        if rec is not None:
            out.write(json.dumps(rec, sort_keys=True) + "\n")
            out.flush()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ugcluster", description="k-median and k-center clustering of uncertain graphs")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, graph=True):
        if graph:
            sp.add_argument("graph", help="edge-list file")
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--cap", type=int, default=default_edge_cap(), help="max uncertain edges to enumerate exactly")

    sp = sub.add_parser("exact", help="all-pairs exact connection probabilities")
    common(sp)
    sp.set_defaults(func=cmd_exact)

    sp = sub.add_parser("sample", help="estimate connection probabilities from sampled worlds")
    common(sp)
    sp.add_argument("--samples", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--cache-out", help="save the worlds to a binary cache file")
    sp.set_defaults(func=cmd_sample)

    def solver(name, algos, problem):
        sp = sub.add_parser(name)
        common(sp)
        sp.add_argument("--algo", choices=algos, required=True)
        sp.add_argument("--k", type=int, required=True)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--samples", type=int, help="fixed sample pool size")
        sp.add_argument("--samples-cache", help="load worlds from a binary cache file")
        sp.add_argument("--epsilon", type=float, default=0.3)
        sp.add_argument("--delta", type=float, default=0.1)
        sp.add_argument("--exact-score", action="store_true", help="also score the result with the exact oracle")
        sp.add_argument("--no-timing", action="store_true", help="omit the duration field")
        sp.set_defaults(func=_cmd_solve(problem))
        return sp

    solver("solve-kmedian", KMEDIAN_ALGOS, "kmedian")
    sp = solver("solve-kcenter", KCENTER_ALGOS, "kcenter")
    sp.add_argument("--epsilon1", type=float)
    sp.add_argument("--epsilon2", type=float)
    sp.add_argument("--epsilon3", type=float)
    sp.add_argument("--opt-bound", type=float, help="lower bound on OPT used to size the sample pool")

    sp = sub.add_parser("gen", help="emit a synthetic graph")
    sp.add_argument("model", choices=sorted(generators.MODELS))
    sp.add_argument("--n", type=int, default=10)
    sp.add_argument("--p", type=float, default=0.5)
    sp.add_argument("--rows", type=int, default=3)
    sp.add_argument("--cols", type=int, default=3)
    sp.add_argument("--density", type=float, default=0.2)
    sp.add_argument("--pmin", type=float, default=0.1)
    sp.add_argument("--pmax", type=float, default=0.9)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("bench", help="run a matrix of solves, one JSON line per cell")
    sp.add_argument("--matrix", help="JSON file with graphs, ks, algorithms, seeds")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_bench)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except UGClusterError as exc:
        err = {"error": exc.code, "message": str(exc)}
        sys.stderr.write(json.dumps(err) + "\n")
        return exc.exit_code
    return 0


def main():
    try:
        code = run()
        sys.stdout.flush()
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = 0
    sys.exit(code)


if __name__ == "__main__":
    main()
