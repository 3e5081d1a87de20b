"""Command-line interface.

Subcommands: simulate, test, network, evaluate, bench. Machine-readable
output goes to files or stdout; progress and diagnostics go to stderr.
Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bench import ExperimentPlan, run_experiment, write_outputs
from .engine import GcConfig, PValueMatrix, gc_network, gc_test, resolve_lags
from .evaluation import EdgeScores, evaluate_scores
from .kernel_ridge import KernelConfig
from .panel import SplitSpec, read_panel_csv, write_panel_csv
from .simnet import NETWORK_NAMES, GroundTruth, NetworkSpec, generate

USAGE_ERROR = 1
RUNTIME_ERROR = 2
MAX_FAILED_PAIR_FRACTION = 0.2


class UsageError(Exception):
    """Bad inputs: malformed files, unknown names, mismatched node sets."""


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad flags; the CLI contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text} is not a positive integer")
    return value


def _nonnegative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"{text} is negative")
    return value


def _fraction(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not inside (0, 1)")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"{text} is not positive")
    return value


def _lags_arg(text: str):
    if text == "cao":
        return "cao"
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("lags must be a positive integer or 'cao'")
    return value


def _gamma_arg(text: str):
    if text == "auto":
        return None
    return _positive_float(text)


def _default_workers() -> int:
    env = os.environ.get("NLGRANGER_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lags", type=_lags_arg, default="cao",
                        help="lag order, or 'cao' for automatic selection (default)")
    parser.add_argument("--test", choices=("sign", "wilcoxon"), default="sign")
    parser.add_argument("--lambda", dest="ridge_lambda", type=_positive_float, default=1.0,
                        help="ridge penalty (default 1)")
    parser.add_argument("--gamma", type=_gamma_arg, default=None,
                        help="RBF width, or 'auto' for 1/n_features (default)")
    parser.add_argument("--split", type=_fraction, default=0.7,
                        help="training fraction of the rows (default 0.7)")
    parser.add_argument("--gap", type=_nonnegative_int, default=None,
                        help="rows discarded between train and test (default: lag order)")
    parser.add_argument("--quantiles", type=_nonnegative_int, default=1000,
                        help="quantile-grid size for preprocessing; 0 disables (default 1000)")
    parser.add_argument("--method", choices=("krr", "linear"), default="krr")


def _config_from_args(args) -> GcConfig:
    return GcConfig(
        lags=args.lags,
        split=SplitSpec(train_fraction=args.split, gap=args.gap),
        kernel=KernelConfig(ridge_lambda=args.ridge_lambda, gamma=args.gamma),
        test=args.test,
        n_quantiles=args.quantiles if args.quantiles else None,
        method="linear_f" if args.method == "linear" else "krr",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nlgranger", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", parents=[], help="generate benchmark panels")
    p_sim.add_argument("--network", required=True, choices=NETWORK_NAMES)
    p_sim.add_argument("--length", type=_positive_int, required=True)
    p_sim.add_argument("--seed", type=_nonnegative_int, default=0,
                       help="base seed; set k uses seed XOR k")
    p_sim.add_argument("--sets", type=_positive_int, default=1)
    p_sim.add_argument("--burn-in", type=_nonnegative_int, default=500)
    p_sim.add_argument("--out-dir", default=".")

    p_test = sub.add_parser("test", help="one directed causality test")
    p_test.add_argument("--input", required=True, help="panel CSV")
    p_test.add_argument("--source", required=True)
    p_test.add_argument("--target", required=True)
    _add_config_flags(p_test)

    p_net = sub.add_parser("network", help="all-pairs recovery on a panel CSV")
    p_net.add_argument("--input", required=True, help="panel CSV")
    p_net.add_argument("--workers", type=_positive_int, default=_default_workers())
    p_net.add_argument("--out", default="-", help="output JSON path, '-' for stdout")
    _add_config_flags(p_net)

    p_eval = sub.add_parser("evaluate", help="score a p-value matrix against truth")
    p_eval.add_argument("--pvalues", required=True, help="JSON from the network command")
    p_eval.add_argument("--truth", required=True, help="truth JSON {nodes, edges}")
    p_eval.add_argument("--threshold", type=_fraction, default=0.05)
    p_eval.add_argument("--out", default="-", help="output JSON path, '-' for stdout")

    p_bench = sub.add_parser("bench", help="full multi-set benchmark sweep")
    p_bench.add_argument("--networks", required=True,
                         help="comma-separated network names")
    p_bench.add_argument("--lengths", required=True,
                         help="comma-separated time-series lengths")
    p_bench.add_argument("--sets", type=_positive_int, default=50)
    p_bench.add_argument("--seed", type=_nonnegative_int, default=0)
    p_bench.add_argument("--burn-in", type=_nonnegative_int, default=500)
    p_bench.add_argument("--workers", type=_positive_int, default=_default_workers())
    p_bench.add_argument("--out-dir", required=True)
    p_bench.add_argument("--no-figures", action="store_true",
                         help="skip rendering metric boxplot PNGs")
    _add_config_flags(p_bench)
    return parser


def _write_json(payload, out: str) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")
        print(out)


def _truth_to_json(truth: GroundTruth) -> dict:
    return {
        "nodes": list(truth.names),
        "edges": [[src, dst] for src, dst in truth.edge_list()],
    }


def _truth_from_json(path: str) -> GroundTruth:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    names = tuple(doc["nodes"])
    adjacency = np.zeros((len(names), len(names)), dtype=bool)
    index = {name: i for i, name in enumerate(names)}
    for src, dst in doc["edges"]:
        adjacency[index[src], index[dst]] = True
    return GroundTruth(adjacency=adjacency, names=names)


def _cmd_simulate(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for k in range(args.sets):
        seed = args.seed ^ k
        spec = NetworkSpec(args.network, args.length, seed=seed, burn_in=args.burn_in)
        panel, truth = generate(spec)
        stem = f"{args.network}_len{args.length}_set{k}"
        panel_path = out_dir / f"{stem}.csv"
        truth_path = out_dir / f"{stem}_truth.json"
        write_panel_csv(panel, panel_path)
        truth_path.write_text(
            json.dumps(_truth_to_json(truth), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        print(panel_path)
        print(truth_path)
    return 0


def _read_panel(path: str):
    try:
        return read_panel_csv(path)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _cmd_test(args) -> int:
    panel = _read_panel(args.input)
    if args.source == args.target:
        raise UsageError("source and target must differ")
    config = _config_from_args(args)
    try:
        result = gc_test(panel, args.source, args.target, config)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from exc
    _write_json(
        {
            "source": args.source,
            "target": args.target,
            "p_value": result.p_value,
            "statistic": result.outcome.statistic,
            "n_effective": result.outcome.n_effective,
            "method": result.outcome.method,
            "lag_used": result.lags_used,
        },
        "-",
    )
    return 0


def _matrix_to_json(matrix: PValueMatrix, config: GcConfig) -> dict:
    values = [
        [None if np.isnan(v) else float(v) for v in row] for row in matrix.values
    ]
    doc = {
        "series": list(matrix.names),
        "pvalues": values,
        "lag_used": matrix.lag_used,
        "config": {
            "lags": config.lags,
            "train_fraction": config.split.train_fraction,
            "gap": config.split.gap,
            "lambda": config.kernel.ridge_lambda,
            "gamma": config.kernel.gamma if config.kernel.gamma is not None else "auto",
            "test": config.test,
            "quantiles": config.n_quantiles,
            "method": config.method,
        },
    }
    if matrix.failures:
        doc["failures"] = {
            f"{source}->{target}": message
            for (source, target), message in matrix.failures.items()
        }
    return doc


def _cmd_network(args) -> int:
    panel = _read_panel(args.input)
    config = _config_from_args(args)
    run_config = config
    if config.lags == "cao":
        lag = resolve_lags(panel, config)
        _log(f"selected lag order {lag} via embedding analysis")
        run_config = replace(config, lags=lag)
    matrix = gc_network(panel, run_config, workers=args.workers)
    _write_json(_matrix_to_json(matrix, config), args.out)
    n_pairs = len(matrix.names) * (len(matrix.names) - 1)
    if len(matrix.failures) > MAX_FAILED_PAIR_FRACTION * n_pairs:
        _log(f"{len(matrix.failures)} of {n_pairs} pairwise tests failed")
        return RUNTIME_ERROR
    return 0


def _cmd_evaluate(args) -> int:
    doc = json.loads(Path(args.pvalues).read_text(encoding="utf-8"))
    names = tuple(doc["series"])
    values = np.array(
        [[np.nan if v is None else v for v in row] for row in doc["pvalues"]], dtype=float
    )
    truth = _truth_from_json(args.truth)
    if set(names) != set(truth.names):
        missing = sorted(set(names) ^ set(truth.names))
        raise UsageError(f"node sets disagree between p-values and truth: {missing}")
    order = [truth.names.index(n) for n in names]
    adjacency = truth.adjacency[np.ix_(order, order)]
    off_diag = ~np.eye(len(names), dtype=bool)
    scores = EdgeScores(labels=adjacency[off_diag], pvalues=values[off_diag])
    report = evaluate_scores(scores, p_threshold=args.threshold)
    _write_json(report.to_dict(), args.out)
    return 0


def _cmd_bench(args) -> int:
    plan = ExperimentPlan(
        networks=tuple(n.strip() for n in args.networks.split(",") if n.strip()),
        lengths=tuple(int(t) for t in args.lengths.split(",") if t.strip()),
        n_sets=args.sets,
        base_seed=args.seed,
        workers=args.workers,
        burn_in=args.burn_in,
        config=_config_from_args(args),
    )
    _log(
        f"benchmarking {len(plan.networks)} network(s) x {len(plan.lengths)} length(s),"
        f" {plan.n_sets} sets, {plan.workers} workers"
    )
    result = run_experiment(plan)
    paths = write_outputs(result, args.out_dir)
    for path in paths.values():
        print(path)
    if not args.no_figures:
        from .figures import render_metric_boxplots

        for path in render_metric_boxplots(result, Path(args.out_dir) / "figures"):
            print(path)
    invalid = [s for s in result.summaries if not s.valid]
    for s in invalid:
        _log(f"combination {s.network}@{s.length} invalid: {s.n_failed}/{s.n_sets} sets failed")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "test": _cmd_test,
    "network": _cmd_network,
    "evaluate": _cmd_evaluate,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        _log(f"error: {exc}")
        return USAGE_ERROR
    except OSError as exc:
        _log(f"i/o error: {exc}")
        return RUNTIME_ERROR
    except Exception as exc:
        _log(f"failure: {exc}")
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
