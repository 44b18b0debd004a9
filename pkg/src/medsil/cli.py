"""Command-line harness: single runs, benchmarking grids, evaluation.

``medsil run`` clusters one input and emits a JSON report; ``medsil bench``
sweeps (n, k, algo) grids and streams CSV rows; ``medsil eval`` scores a
given medoid set (the endpoint used by the scripting bindings).  Reports
are deterministic given input and configuration, except for wall-time
fields.

Exit codes: 0 success, 2 usage/configuration, 3 unreadable input, 4 data
format, 5 invalid k or medoid set, 6 unknown algorithm, 7 unknown metric.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .dissim import (COSINE_DISTANCE, EUCLIDEAN, MANHATTAN, SQUARED_EUCLIDEAN,
                     DataFormatError, DissimilarityProvider, from_matrix,
                     from_points, load_matrix, load_points)
from .init import build_init, random_init
from .metrics import ari, nmi
from .optim import (ClusteringResult, fastermsc, fastmsc, pammedsil_naive,
                    pamsil, warm_kernels)
from .silhouette import eval_full_silhouette, eval_medoid_silhouette

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_UNREADABLE = 3
EXIT_DATA = 4
EXIT_BAD_K = 5
EXIT_BAD_ALGO = 6
EXIT_BAD_METRIC = 7

ALGOS = ("pamsil", "pammedsil", "fastmsc", "fastermsc")
INITS = ("build", "random")
POINT_METRIC_NAMES = (EUCLIDEAN, SQUARED_EUCLIDEAN, MANHATTAN, COSINE_DISTANCE)

REPORT_SCHEMA = "medsil-report/1"
EVAL_SCHEMA = "medsil-eval/1"
BENCH_HEADER = ("n,k,algo,restart,seed,wall_time_sec,iterations,swaps,"
                "ams,asw,converged,status")


class CliError(Exception):
    """Error with a dedicated exit code and user-facing message."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# argument handling


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="medsil",
        description="k-medoids clustering by direct optimization of the "
                    "average medoid silhouette")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common_input(sp):
        sp.add_argument("--input", required=True, help="input data file")
        sp.add_argument("--precomputed", action="store_true",
                        help="input is a square dissimilarity matrix")
        sp.add_argument("--metric", default=None,
                        help="metric for point input (default euclidean)")
        sp.add_argument("--output", default=None,
                        help="write the report here instead of stdout")

    run = sub.add_parser("run", help="cluster one input and report")
    common_input(run)
    run.add_argument("--k", required=True, type=int,
                     help="number of medoids")
    run.add_argument("--algo", default="fastermsc",
                     help="pamsil | pammedsil | fastmsc | fastermsc")
    run.add_argument("--init", default=None,
                     help="build | random (default: build, but random "
                          "for fastermsc)")
    run.add_argument("--seed", type=int, default=0, help="base random seed")
    run.add_argument("--restarts", type=int, default=1,
                     help="independent restarts with seeds seed, seed+1, ...")
    run.add_argument("--max-iter", type=int, default=100, dest="max_iter")
    run.add_argument("--true-labels", default=None, dest="true_labels",
                     help="ground-truth labels file (one per line); adds "
                          "ARI/NMI to the report")

    bench = sub.add_parser("bench", help="sweep (n, k, algo) grids, emit CSV")
    common_input(bench)
    bench.add_argument("--n-grid", required=True, dest="n_grid",
                       help="comma-separated sample sizes (prefix subsets "
                            "of the input)")
    bench.add_argument("--k-grid", required=True, dest="k_grid",
                       help="comma-separated medoid counts")
    bench.add_argument("--algos", required=True,
                       help="comma-separated algorithm names")
    bench.add_argument("--init", default=None)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--restarts", type=int, default=1)
    bench.add_argument("--max-iter", type=int, default=100, dest="max_iter")
    bench.add_argument("--timeout-sec", type=float, default=None,
                       dest="timeout_sec",
                       help="skip larger instances of a (algo, k) series "
                            "after a run exceeds this many seconds")

    ev = sub.add_parser("eval", help="evaluate a fixed medoid set")
    common_input(ev)
    ev.add_argument("--medoids", required=True,
                    help="comma-separated point indices")
    return parser


def _positive_int(value: int, what: str) -> int:
    if value < 1:
        raise CliError(EXIT_USAGE, f"{what} must be >= 1, got {value}")
    return value


def _check_algo(name: str) -> str:
    if name not in ALGOS:
        raise CliError(EXIT_BAD_ALGO,
                       f"unknown algo {name!r}; expected one of {ALGOS}")
    return name


def _check_metric(args) -> str:
    if args.precomputed:
        if args.metric is not None:
            raise CliError(EXIT_USAGE,
                           "--metric cannot be combined with --precomputed")
        return "precomputed"
    metric = args.metric if args.metric is not None else EUCLIDEAN
    if metric not in POINT_METRIC_NAMES:
        raise CliError(EXIT_BAD_METRIC,
                       f"unknown metric {metric!r}; expected one of "
                       f"{POINT_METRIC_NAMES}")
    return metric


def _check_init(name: str | None, algo: str) -> str:
    if name is None:
        return "random" if algo == "fastermsc" else "build"
    if name not in INITS:
        raise CliError(EXIT_USAGE,
                       f"unknown init {name!r}; expected one of {INITS}")
    return name


def _check_k(k: int, n: int) -> int:
    if k < 2 or k > n:
        raise CliError(EXIT_BAD_K,
                       f"k must satisfy 2 <= k <= n={n}, got {k}")
    return k


def _parse_grid(text: str, what: str) -> list[int]:
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise CliError(EXIT_USAGE, f"could not parse {what} {text!r}") from None
    if not values:
        raise CliError(EXIT_USAGE, f"{what} is empty")
    return values


def _thread_count() -> int:
    raw = os.environ.get("MEDSIL_THREADS", "1")
    try:
        threads = int(raw)
    except ValueError:
        raise CliError(EXIT_USAGE,
                       f"MEDSIL_THREADS must be an integer, got {raw!r}") from None
    if threads < 1:
        raise CliError(EXIT_USAGE, f"MEDSIL_THREADS must be >= 1, got {threads}")
    return threads


# ---------------------------------------------------------------------------
# data loading


def _load_provider(args, limit: int | None = None) -> tuple[DissimilarityProvider, str]:
    metric = _check_metric(args)
    if args.precomputed:
        if limit is None:
            provider = load_matrix(args.input)
        else:
            full = load_matrix(args.input).matrix()
            if limit > full.shape[0]:
                raise CliError(EXIT_DATA,
                               f"n={limit} exceeds available objects "
                               f"({full.shape[0]})")
            provider = from_matrix(full[:limit, :limit])
        return provider, metric
    points = load_points(args.input)
    if limit is not None:
        if limit > points.shape[0]:
            raise CliError(EXIT_DATA,
                           f"n={limit} exceeds available points "
                           f"({points.shape[0]})")
        points = points[:limit]
    return from_points(points, metric), metric


def _load_true_labels(path: str, n: int) -> list[str]:
    try:
        text = open(path, encoding="utf-8").read()
    except OSError as exc:
        raise CliError(EXIT_UNREADABLE, f"cannot read {path}: {exc}") from None
    labels = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(labels) != n:
        raise CliError(EXIT_DATA,
                       f"{path}: expected {n} labels, found {len(labels)}")
    return labels


# ---------------------------------------------------------------------------
# execution helpers


@dataclass
class _Run:
    restart: int
    seed: int
    result: ClusteringResult


def _initial_medoids(provider, k: int, init: str, seed: int) -> np.ndarray:
    if k == provider.n:
        return np.arange(k, dtype=np.int64)
    if init == "build":
        return build_init(provider, k)
    return random_init(provider.n, k, seed)


def _execute(provider, algo: str, k: int, init: str, seed: int,
             max_iter: int) -> ClusteringResult:
    medoids = _initial_medoids(provider, k, init, seed)
    fn = {"pamsil": pamsil, "pammedsil": pammedsil_naive,
          "fastmsc": fastmsc, "fastermsc": fastermsc}[algo]
    return fn(provider, medoids=medoids, max_iter=max_iter)


def _run_restarts(provider, algo: str, k: int, init: str, base_seed: int,
                  restarts: int, max_iter: int) -> list[_Run]:
    seeds = [base_seed + r for r in range(restarts)]
    threads = _thread_count()
    if threads == 1 or restarts == 1:
        results = [_execute(provider, algo, k, init, s, max_iter)
                   for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=min(threads, restarts)) as pool:
            futures = [pool.submit(_execute, provider, algo, k, init, s,
                                   max_iter) for s in seeds]
            results = [f.result() for f in futures]
    return [_Run(restart=r, seed=s, result=res)
            for r, (s, res) in enumerate(zip(seeds, results))]


def _score(run: _Run, algo: str) -> float:
    if algo == "pamsil":
        return run.result.asw if run.result.asw is not None else -np.inf
    return run.result.ams


def _best_run(runs: list[_Run], algo: str) -> _Run:
    best = runs[0]
    for candidate in runs[1:]:
        if _score(candidate, algo) > _score(best, algo):
            best = candidate
    return best


def _canonical_asw(provider, labels: np.ndarray) -> float | None:
    if np.unique(labels).shape[0] < 2:
        return None
    return eval_full_silhouette(provider, labels).average


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_run(args) -> int:
    algo = _check_algo(args.algo)
    init = _check_init(args.init, algo)
    _positive_int(args.restarts, "--restarts")
    _positive_int(args.max_iter, "--max-iter")
    if args.seed < 0:
        raise CliError(EXIT_USAGE, f"--seed must be >= 0, got {args.seed}")
    provider, metric = _load_provider(args)
    k = _check_k(args.k, provider.n)
    true_labels = None
    if args.true_labels is not None:
        true_labels = _load_true_labels(args.true_labels, provider.n)
    provider.matrix()
    warm_kernels()
    runs = _run_restarts(provider, algo, k, init, args.seed, args.restarts,
                         args.max_iter)
    best = _best_run(runs, algo)
    res = best.result
    report = {
        "schema": REPORT_SCHEMA,
        "input": {"path": args.input, "n": provider.n,
                  "precomputed": bool(args.precomputed), "metric": metric},
        "config": {"k": k, "algo": algo, "init": init, "seed": args.seed,
                   "restarts": args.restarts, "max_iter": args.max_iter},
        "best": {
            "restart": best.restart,
            "seed": best.seed,
            "medoids": res.medoids,
            "labels": res.labels,
            "ams": res.ams,
            "asw": _canonical_asw(provider, res.labels),
            "iterations": res.iterations,
            "swaps": res.swaps,
            "converged": res.converged,
            "wall_time_sec": res.wall_time,
        },
        "runs": [{
            "restart": run.restart,
            "seed": run.seed,
            "ams": run.result.ams,
            "iterations": run.result.iterations,
            "swaps": run.result.swaps,
            "converged": run.result.converged,
            "wall_time_sec": run.result.wall_time,
        } for run in runs],
    }
    if true_labels is not None:
        predicted = res.labels
        report["external"] = {"ari": ari(true_labels, predicted),
                              "nmi": nmi(true_labels, predicted)}
    _emit(json.dumps(report, indent=2, default=_jsonable), args.output)
    return EXIT_OK


def _cmd_eval(args) -> int:
    provider, metric = _load_provider(args)
    try:
        medoids = [int(tok) for tok in args.medoids.split(",") if tok.strip()]
    except ValueError:
        raise CliError(EXIT_USAGE,
                       f"could not parse --medoids {args.medoids!r}") from None
    try:
        breakdown = eval_medoid_silhouette(provider, medoids)
    except ValueError as exc:
        raise CliError(EXIT_BAD_K, str(exc)) from None
    report = {
        "schema": EVAL_SCHEMA,
        "input": {"path": args.input, "n": provider.n,
                  "precomputed": bool(args.precomputed), "metric": metric},
        "medoids": list(medoids),
        "per_point": breakdown.per_point,
        "average": breakdown.average,
    }
    _emit(json.dumps(report, indent=2, default=_jsonable), args.output)
    return EXIT_OK


def _bench_cells(args) -> list[tuple[str, int, list[int]]]:
    """Expand the grids into ((algo, k) group, n-list) work units."""
    n_grid = _parse_grid(args.n_grid, "--n-grid")
    k_grid = _parse_grid(args.k_grid, "--k-grid")
    algos = [tok.strip() for tok in args.algos.split(",") if tok.strip()]
    if not algos:
        raise CliError(EXIT_USAGE, "--algos is empty")
    for a in algos:
        _check_algo(a)
    for n in n_grid:
        if n < 2:
            raise CliError(EXIT_DATA, f"grid n={n} is too small")
    for k in k_grid:
        if k < 2:
            raise CliError(EXIT_BAD_K, f"grid k={k} must be >= 2")
    return [(algo, k, list(n_grid)) for algo in algos for k in k_grid]


def _bench_group(args, algo: str, k: int, n_list: list[int],
                 init: str) -> list[str]:
    """Run one (algo, k) series over the n grid, smallest-first skip logic."""
    rows: list[str] = []
    dead = False
    for n in n_list:
        if k > n:
            rows.append(f"{n},{k},{algo},0,,,,,,,,invalid-k")
            continue
        if dead:
            for r in range(args.restarts):
                rows.append(f"{n},{k},{algo},{r},{args.seed + r},,,,,,,skipped")
            continue
        provider, _ = _load_provider(args, limit=n)
        provider.matrix()
        for r in range(args.restarts):
            seed = args.seed + r
            if dead:
                rows.append(f"{n},{k},{algo},{r},{seed},,,,,,,skipped")
                continue
            result = _execute(provider, algo, k, init, seed, args.max_iter)
            status = "ok"
            if args.timeout_sec is not None and result.wall_time > args.timeout_sec:
                status = "timeout"
                dead = True
            asw = _canonical_asw(provider, result.labels)
            asw_txt = "" if asw is None else repr(asw)
            rows.append(
                f"{n},{k},{algo},{r},{seed},{result.wall_time:.6f},"
                f"{result.iterations},{result.swaps},{repr(result.ams)},"
                f"{asw_txt},{str(result.converged).lower()},{status}")
    return rows


def _cmd_bench(args) -> int:
    _positive_int(args.restarts, "--restarts")
    _positive_int(args.max_iter, "--max-iter")
    if args.timeout_sec is not None and args.timeout_sec <= 0:
        raise CliError(EXIT_USAGE, "--timeout-sec must be positive")
    groups = _bench_cells(args)
    init_by_algo = {algo: _check_init(args.init, algo)
                    for algo, _, _ in groups}
    # Validate input readability and grid feasibility up front.
    max_n = max(n for _, _, ns in groups for n in ns)
    _load_provider(args, limit=max_n)
    warm_kernels()
    threads = _thread_count()
    out = sys.stdout if args.output is None else open(args.output, "w",
                                                      encoding="utf-8")
    try:
        out.write(BENCH_HEADER + "\n")
        out.flush()
        if threads == 1 or len(groups) == 1:
            for algo, k, ns in groups:
                for row in _bench_group(args, algo, k, ns,
                                        init_by_algo[algo]):
                    out.write(row + "\n")
                    out.flush()
        else:
            with ThreadPoolExecutor(max_workers=min(threads, len(groups))) as pool:
                futures = [pool.submit(_bench_group, args, algo, k, ns,
                                       init_by_algo[algo])
                           for algo, k, ns in groups]
                for future in futures:
                    for row in future.result():
                        out.write(row + "\n")
                    out.flush()
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "bench":
            return _cmd_bench(args)
        return _cmd_eval(args)
    except CliError as exc:
        print(f"medsil: {exc}", file=sys.stderr)
        return exc.code
    except DataFormatError as exc:
        print(f"medsil: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"medsil: {exc}", file=sys.stderr)
        return EXIT_UNREADABLE
    except ValueError as exc:
        print(f"medsil: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
