"""Command-line harness for generation, scanning, testing, and experiments.

Every subcommand prints machine-readable output (JSON, or plain columns for
``net`` and CSV for ``run`` without ``--out``).  Exit codes: 0 on success,
1 on a validation problem, 2 on a runtime failure.

Any subcommand accepts ``--json-config FILE`` holding a JSON object of flag
defaults; explicit command-line flags win.  For ``run`` the file is the full
experiment description instead.
"""

from __future__ import annotations

import argparse
import dataclasses
import enum
import json
import sys

import numpy as np

from . import detect, net, theory
from .experiment import ExperimentConfig, csv_text, run_experiment, write_csv
from .model import NoiseFamily, generate_instance
from .perm import MCConfig
from .plotsvg import emit_plot
from .stats import scan_exact, scan_las

__all__ = ["main"]

_DEMO = tuple(tuple(float(1 + r * 4 + c) for c in range(4)) for r in range(3))


class _UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    """Argparse that reports bad usage as a validation error (exit 1)."""

    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {
            f.name: _jsonable(getattr(obj, f.name))
            for f in dataclasses.fields(obj)
        }
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _emit(obj) -> None:
    print(json.dumps(_jsonable(obj), indent=2))


def _load_matrix(args) -> np.ndarray:
    if getattr(args, "demo", False):
        return np.array(_DEMO)
    path = getattr(args, "input", None)
    if path is None:
        raise _UsageError("provide --input FILE or --demo")
    if path.endswith(".npy"):
        return np.load(path)
    if path.endswith(".json"):
        with open(path) as fh:
            return np.array(json.load(fh), dtype=np.float64)
    return np.loadtxt(path, delimiter=",", ndmin=2)


def _parse_sizes(value) -> tuple[tuple[int, int], ...]:
    """Accept '10x15,30x10' from the command line or [[10,15],...] from JSON."""
    if value is None:
        return ()
    if isinstance(value, str):
        pairs = []
        for chunk in value.split(","):
            parts = chunk.strip().lower().split("x")
            if len(parts) != 2:
                raise _UsageError(f"bad size {chunk!r}; expected MxN like 10x15")
            pairs.append((int(parts[0]), int(parts[1])))
        return tuple(pairs)
    return tuple((int(m), int(n)) for m, n in value)


def _mc_config(args) -> MCConfig:
    return MCConfig(
        B=args.B,
        kind=args.kind,
        seed=args.seed,
        restarts=args.restarts,
        max_iters=args.max_iters,
        exact_scan=getattr(args, "exact_scan", False),
    )


def _cmd_gen(args) -> int:
    inst = generate_instance(
        args.M, args.N, args.m, args.n, args.theta, args.family, args.seed
    )
    support = None
    if inst.support is not None:
        support = {"rows": list(inst.support.rows), "cols": list(inst.support.cols)}
    out = {
        "family": inst.family.value,
        "M": args.M,
        "N": args.N,
        "m": args.m,
        "n": args.n,
        "theta": inst.theta,
        "seed": inst.seed,
        "support": support,
    }
    if args.out:
        if args.out.endswith(".npy"):
            np.save(args.out, inst.data)
        else:
            np.savetxt(args.out, inst.data, delimiter=",", fmt="%.17g")
        out["path"] = args.out
    else:
        out["data"] = inst.data
    _emit(out)
    return 0


def _cmd_scan(args) -> int:
    X = _load_matrix(args)
    if args.exact:
        result = scan_exact(X, args.m, args.n)
    else:
        result = scan_las(
            X, args.m, args.n,
            restarts=args.restarts, max_iters=args.max_iters, seed=args.seed,
        )
    _emit(
        {
            "engine": "exact" if args.exact else "las",
            "value": result.value,
            "rows": list(result.support.rows),
            "cols": list(result.support.cols),
            "exact": result.exact,
            "restarts_used": result.restarts_used,
            "iterations": result.iterations,
        }
    )
    return 0


def _cmd_test(args) -> int:
    X = _load_matrix(args)
    outcome = detect.single_size_test(
        X, args.m, args.n, _mc_config(args), alpha=args.alpha
    )
    _emit(outcome)
    return 0


def _cmd_bonf(args) -> int:
    X = _load_matrix(args)
    cfg = _mc_config(args)
    sizes = _parse_sizes(args.sizes)
    if sizes:
        outcome = detect.bonferroni_full(
            X, sizes, cfg, alpha=args.alpha,
            share_permutations=args.share_permutations, workers=args.workers,
        )
        mode = "full"
    else:
        M, N = X.shape
        kM = net.default_k(M) if args.kM is None else args.kM
        kN = net.default_k(N) if args.kN is None else args.kN
        outcome = detect.bonferroni_net(
            X, kM, kN, cfg, alpha=args.alpha,
            share_permutations=args.share_permutations, workers=args.workers,
        )
        mode = "net"
    payload = _jsonable(outcome)
    payload["mode"] = mode
    _emit(payload)
    return 0


def _require(args, *names) -> None:
    missing = [f"--{n}" for n in names if getattr(args, n) is None]
    if missing:
        raise _UsageError(
            f"{args.command}: the following arguments are required: "
            + ", ".join(missing)
        )


def _cmd_net(args) -> int:
    _require(args, "M")
    k = net.default_k(args.M) if args.k is None else args.k
    built = net.build_net(args.M, k)
    width = args.M.bit_length()
    for c in sorted(built.elements, reverse=True):
        print(f"{c:0{width}b} {c}")
    return 0


def _cmd_regime(args) -> int:
    _require(args, "M", "N", "m", "n", "theta")
    _emit(theory.detection_ratios(args.theta, args.M, args.N, args.m, args.n))
    return 0


def _cmd_run(args) -> int:
    if args.json_config:
        with open(args.json_config) as fh:
            cfg = ExperimentConfig.from_json(fh.read())
    else:
        cfg = ExperimentConfig()
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if args.plot and not args.out:
        raise _UsageError("--plot requires --out")
    timing = not args.no_timing
    rows = run_experiment(cfg, workers=args.workers, timing=timing)
    if args.out:
        write_csv(rows, args.out, cfg, timing=timing)
        if args.plot:
            emit_plot(args.out, args.plot)
        kM, kN = cfg.effective_k
        echo = cfg.to_dict()
        echo["k_M"], echo["k_N"] = kM, kN
        _emit(
            {
                "rows": len(rows),
                "out": args.out,
                "plot": args.plot or None,
                "config": echo,
            }
        )
    else:
        sys.stdout.write(csv_text(rows, cfg, timing=timing))
    return 0


def _cmd_plot(args) -> int:
    _require(args, "csv", "out")
    emit_plot(args.csv, args.out)
    _emit({"out": args.out})
    return 0


def _add_matrix_source(sub) -> None:
    sub.add_argument("--input", help="matrix file (.npy, .json, or CSV)")
    sub.add_argument(
        "--demo", action="store_true",
        help="use the built-in 3x4 matrix with entries 1..12",
    )


def _add_mc_flags(sub) -> None:
    sub.add_argument("--B", type=int, default=500, help="permutation replicates")
    sub.add_argument(
        "--kind", default="bidimensional",
        choices=["unidimensional", "bidimensional"],
    )
    sub.add_argument("--alpha", type=float, default=0.05)
    sub.add_argument("--restarts", type=int, default=20)
    sub.add_argument("--max-iters", type=int, default=100)
    sub.add_argument(
        "--exact-scan", action="store_true",
        help="use the exhaustive scan instead of the restarted heuristic",
    )


def _build_parser():
    parser = _Parser(prog="subscan", description=__doc__.split("\n")[0])
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    registry = {}

    def new(name, func, **kwargs):
        sub = subs.add_parser(name, **kwargs)
        sub.add_argument(
            "--json-config", help="JSON object of default values for the flags"
        )
        sub.set_defaults(func=func)
        registry[name] = sub
        return sub

    sub = new("gen", _cmd_gen, help="generate a planted-submatrix instance")
    sub.add_argument("--family", default="gaussian")
    sub.add_argument("--M", type=int, default=200)
    sub.add_argument("--N", type=int, default=100)
    sub.add_argument("--m", type=int, default=10)
    sub.add_argument("--n", type=int, default=15)
    sub.add_argument("--theta", type=float, default=0.0)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", help="write the matrix here (.npy or CSV)")

    sub = new("scan", _cmd_scan, help="scan statistic of one matrix")
    _add_matrix_source(sub)
    sub.add_argument("--m", type=int, default=2)
    sub.add_argument("--n", type=int, default=2)
    sub.add_argument("--exact", action="store_true", help="exhaustive search")
    sub.add_argument("--restarts", type=int, default=20)
    sub.add_argument("--max-iters", type=int, default=100)
    sub.add_argument("--seed", type=int, default=0)

    sub = new("test", _cmd_test, help="single-size permutation test")
    _add_matrix_source(sub)
    sub.add_argument("--m", type=int, default=2)
    sub.add_argument("--n", type=int, default=2)
    sub.add_argument("--seed", type=int, default=0)
    _add_mc_flags(sub)

    sub = new("bonf", _cmd_bonf, help="size-adaptive Bonferroni test")
    _add_matrix_source(sub)
    sub.add_argument(
        "--sizes", help="explicit size list like 10x15,30x10 (full-grid factor)"
    )
    sub.add_argument("--kM", type=int, help="row net resolution (default: auto)")
    sub.add_argument("--kN", type=int, help="column net resolution (default: auto)")
    sub.add_argument("--share-permutations", action="store_true")
    sub.add_argument("--workers", type=int, default=1)
    sub.add_argument("--seed", type=int, default=0)
    _add_mc_flags(sub)

    sub = new("net", _cmd_net, help="list the dyadic size net for M")
    sub.add_argument("--M", type=int)
    sub.add_argument("--k", type=int, help="kept binary digits (default: auto)")
    sub.add_argument("--seed", type=int, default=0, help="unused; accepted for uniformity")

    sub = new("regime", _cmd_regime, help="detection-boundary ratios for a setting")
    sub.add_argument("--M", type=int)
    sub.add_argument("--N", type=int)
    sub.add_argument("--m", type=int)
    sub.add_argument("--n", type=int)
    sub.add_argument("--theta", type=float)
    sub.add_argument("--seed", type=int, default=0, help="unused; accepted for uniformity")

    sub = new("run", _cmd_run, help="run a full simulation grid to CSV")
    sub.add_argument("--out", help="CSV output path (default: CSV on stdout)")
    sub.add_argument("--plot", help="also render an SVG of the results")
    sub.add_argument("--workers", type=int, default=1)
    sub.add_argument("--no-timing", action="store_true")
    sub.add_argument("--seed", type=int, help="override the config seed")

    sub = new("plot", _cmd_plot, help="render a results CSV as SVG")
    sub.add_argument("--csv")
    sub.add_argument("--out")
    sub.add_argument("--seed", type=int, default=0, help="unused; accepted for uniformity")

    return parser, registry


def _apply_json_config(parser, registry, argv, args):
    with open(args.json_config) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise _UsageError("--json-config must hold a JSON object")
    sub = registry[args.command]
    dests = {a.dest for a in sub._actions} - {"help", "func", "json_config"}
    unknown = set(data) - dests
    if unknown:
        raise _UsageError(
            f"unknown config fields for {args.command!r}: {sorted(unknown)}"
        )
    sub.set_defaults(**data)
    return parser.parse_args(argv)


def _run_cli(argv) -> int:
    parser, registry = _build_parser()
    args = parser.parse_args(argv)
    if args.command != "run" and getattr(args, "json_config", None):
        args = _apply_json_config(parser, registry, argv, args)
    return args.func(args)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        return _run_cli(argv)
    except SystemExit as exc:  # argparse --help
        return 0 if exc.code in (None, 0) else 1
    except (ValueError, TypeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
