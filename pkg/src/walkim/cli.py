"""Command-line interface.

Subcommands: probs (assign probabilities), seeds (greedy selection),
eval (Monte-Carlo spread of a seed file), oracle (exact verification
battery on a tiny graph), bench (robustness grid with CSV + figures),
scores (dump initial score vector).

Exit codes: 0 success, 1 verification failure, 2 usage, 3 domain/parse
error, 4 capacity guard, 5 I/O error. Output files are written to a
temporary sibling and atomically renamed, so failures never leave
partial outputs.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np

from . import graph as graphmod
from .errors import CapacityError, DomainError, EdgeListParseError
from .evaluate import mc_spread, robustness_bench
from .oracle import verification_battery
from .scores import score_est
from .select import mc_greedy, walk_greedy

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_CAPACITY = 4
EXIT_IO = 5


def _atomic_write(path, write_fn, binary=False):
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".walkim-tmp-")
    try:
        with os.fdopen(fd, "wb" if binary else "w") as f:
            write_fn(f)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path, payload):
    _atomic_write(path, lambda f: f.write(json.dumps(payload, indent=2) + "\n"))


def _default_threads():
    env = os.environ.get("WALKIM_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _load(path):
    return graphmod.load_graph(path)


def _model_from_args(args):
    return graphmod.ProbabilityModel(
        kind=args.model, p_t=args.p_t, p_u=args.p_u, rng_seed=args.rng_seed)


# -- subcommand handlers -----------------------------------------------------


def cmd_probs(args):
    g = _load(args.input)
    annotated = graphmod.assign_probabilities(g, _model_from_args(args))
    if args.binary:
        _atomic_write(args.output,
                      lambda f: _write_cache_to(annotated, f), binary=True)
    else:
        _atomic_write(args.output,
                      lambda f: graphmod.write_edge_list(annotated, f))
    print(json.dumps(annotated.summary()))
    return EXIT_OK


def _write_cache_to(g, fobj):
    # write_binary_cache wants a path; reuse its layout through a temp buffer
    buf = io.BytesIO()
    s, t, p = g.edge_list()
    buf.write(b"WIMG")
    buf.write(np.array([1, 0, g.n, g.m], dtype="<u8").tobytes())
    buf.write(g.labels.astype("<i8").tobytes())
    buf.write(g.out_indptr.astype("<i8").tobytes())
    buf.write(t.astype("<i8").tobytes())
    buf.write(p.astype("<f8").tobytes())
    fobj.write(buf.getvalue())


def cmd_seeds(args):
    if args.k < 1:
        raise UsageError("--k must be >= 1")
    if args.l < 1:
        raise UsageError("--l must be >= 1")
    g = _load(args.input)
    if args.algo == "walk-greedy":
        result = walk_greedy(g, args.k, args.l,
                             collect_diagnostics=args.diagnostics)
    else:
        result = mc_greedy(g, args.k, simulations=args.simulations,
                           rng_seed=args.rng_seed)
    payload = result.as_dict()
    payload["graph"] = g.summary()
    if args.diagnostics and result.diagnostics:
        payload["diagnostics"] = result.diagnostics
    _write_json(args.output, payload)
    print(f"selected {len(result.seeds)} seeds in "
          f"{result.wall_seconds:.2f}s")
    return EXIT_OK


def _read_seed_labels(path):
    with open(path) as f:
        text = f.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        return [int(tok) for tok in text.split()]
    if isinstance(data, dict):
        if "seeds" not in data:
            raise DomainError("seed file JSON lacks a 'seeds' field")
        return [int(s) for s in data["seeds"]]
    return [int(s) for s in data]


def cmd_eval(args):
    if args.simulations < 1:
        raise UsageError("--simulations must be >= 1")
    g = _load(args.input)
    labels = _read_seed_labels(args.seeds_file)
    seed_ids = g.to_ids(labels)
    est = mc_spread(g, seed_ids, args.simulations, args.rng_seed,
                    threads=args.threads)
    payload = est.as_dict()
    payload["seeds"] = labels
    _write_json(args.output, payload)
    print(f"mean spread {est.mean:.4f} "
          f"({100.0 * est.fraction_of_n:.3f}% of n={g.n})")
    return EXIT_OK


def cmd_oracle(args):
    g = _load(args.input)
    report = verification_battery(g, args.l)
    _write_json(args.output, report)
    for check in report["checks"]:
        status = "PASS" if check["passed"] else "FAIL"
        print(f"{status} {check['name']} {check['detail']}".rstrip())
    return EXIT_OK if report["all_passed"] else EXIT_CHECK_FAILED


def cmd_bench(args):
    g = _load(args.input)
    grid = [float(x) for x in args.grid.split(",") if x]
    for p in grid:
        if not (0.0 < p < 1.0):
            raise UsageError(f"grid value {p} outside (0, 1)")
    report = robustness_bench(g, args.model, grid, args.k, args.l,
                              rng_seed=args.rng_seed)
    os.makedirs(args.outdir, exist_ok=True)
    _write_json(os.path.join(args.outdir, "bench.json"), report)

    def write_csv(f):
        writer = csv.writer(f)
        writer.writerow(["p", "seconds", "aux_bytes"])
        for row in report["grid"]:
            writer.writerow([row["p"], row["seconds"], row["aux_bytes"]])

    _atomic_write(os.path.join(args.outdir, "bench.csv"), write_csv)
    if report["grid"]:
        _render_bench_figures(report, args.outdir)
        print(f"time ratio {report['time_ratio']:.3f}, "
              f"memory ratio {report['memory_ratio']:.3f}")
    return EXIT_OK


def _render_bench_figures(report, outdir):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ps = [row["p"] for row in report["grid"]]
    for key, ylabel, fname in (
            ("seconds", "selection time (s)", "bench_time.png"),
            ("aux_bytes", "auxiliary memory (bytes)", "bench_memory.png")):
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.plot(ps, [row[key] for row in report["grid"]], marker="o")
        ax.set_xscale("log")
        ax.set_xlabel(f"{report['model']} probability parameter")
        ax.set_ylabel(ylabel)
        ax.set_ylim(bottom=0)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(os.path.join(outdir, fname), dpi=150)
        plt.close(fig)


def cmd_scores(args):
    g = _load(args.input)
    vectors = score_est(g, args.l)
    if args.format == "npy":
        _atomic_write(args.output,
                      lambda f: np.save(f, vectors.total), binary=True)
    else:
        payload = {
            "L": args.l,
            "labels": [int(x) for x in g.labels],
            "scores": [float(x) for x in vectors.total],
        }
        _write_json(args.output, payload)
    print(f"wrote scores for {g.n} vertices")
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------


class UsageError(Exception):
    pass


def build_parser():
    parser = argparse.ArgumentParser(
        prog="walkim",
        description="Walk-score influence maximization toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--rng-seed", type=int, default=0)
        p.add_argument("input", help="edge list or binary graph cache")

    p = sub.add_parser("probs", help="assign influence probabilities")
    p.add_argument("--model", choices=["wc", "tr", "un"], default="wc")
    p.add_argument("--p-t", type=float, default=0.1)
    p.add_argument("--p-u", type=float, default=0.1)
    p.add_argument("--binary", action="store_true",
                   help="write a binary graph cache instead of text")
    add_common(p)
    p.add_argument("output")
    p.set_defaults(handler=cmd_probs)

    p = sub.add_parser("seeds", help="greedy seed selection")
    p.add_argument("--algo", choices=["walk-greedy", "mc-greedy"],
                   default="walk-greedy")
    p.add_argument("--k", type=int, default=50)
    p.add_argument("--l", type=int, default=3)
    p.add_argument("--simulations", type=int, default=10_000)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--diagnostics", action="store_true",
                   help="include lazy-update diagnostics in the output")
    add_common(p)
    p.add_argument("output")
    p.set_defaults(handler=cmd_seeds)

    p = sub.add_parser("eval", help="Monte-Carlo spread of a seed set")
    p.add_argument("--seeds-file", required=True)
    p.add_argument("--simulations", type=int, default=10_000)
    p.add_argument("--threads", type=int, default=None)
    add_common(p)
    p.add_argument("output")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("oracle", help="exact verification battery")
    p.add_argument("--l", type=int, default=3)
    add_common(p)
    p.add_argument("output")
    p.set_defaults(handler=cmd_oracle)

    p = sub.add_parser("bench", help="robustness grid benchmark")
    p.add_argument("--model", choices=["tr", "un"], default="un")
    p.add_argument("--grid", default="0.01,0.05,0.1,0.2")
    p.add_argument("--k", type=int, default=50)
    p.add_argument("--l", type=int, default=3)
    p.add_argument("--outdir", default="bench_output")
    add_common(p)
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser("scores", help="dump the initial score vector")
    p.add_argument("--l", type=int, default=3)
    p.add_argument("--format", choices=["json", "npy"], default="json")
    add_common(p)
    p.add_argument("output")
    p.set_defaults(handler=cmd_scores)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", None) is None:
        args.threads = _default_threads()
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EdgeListParseError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except CapacityError as exc:
        print(f"capacity error: {exc} (try a smaller graph)", file=sys.stderr)
        return EXIT_CAPACITY
    except OSError as exc:
        print(f"io error [{getattr(exc, 'filename', '?')}]: {exc}",
              file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
