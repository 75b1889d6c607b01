"""Command-line entry point for encoding, aggregation, querying, optimization,
and simulation. Every stochastic path honors --seed, so a fixed (argv, seed,
input files) triple fully determines the outputs."""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import matrix_mech, mdrq, simulate
from .quantile import quantile as quantile_search
from .domain import DomainSpec, parse_range
from .errors import CapacityError, MetricLdpError
from .metrics import metric_from_config, validate_metric

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2
EXIT_CAPACITY = 3

_TASK_ALIASES = {
    "freq": "frequency",
    "range": "range",
    "quantile": "quantile",
    "weighted": "weighted",
    "workload": "linear-workload",
    "es": "es_comparison",
}


def _load_json_arg(text: str):
    """Accept either inline JSON or a path to a JSON file."""
    text = text.strip()
    if text.startswith("{") or text.startswith("["):
        return json.loads(text)
    with open(text) as fh:
        return json.load(fh)


def _parse_dims(text: str) -> DomainSpec:
    return DomainSpec(tuple(int(v) for v in text.split(",")))


def _read_data_csv(path, ndim: int, weighted: bool):
    """One owner per line: D comma-separated coordinates, optional trailing
    weight column."""
    dataset, weights = [], []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec:
                continue
            values = [v.strip() for v in rec]
            if weighted:
                if len(values) != ndim + 1:
                    raise MetricLdpError(
                        f"expected {ndim} coordinates plus a weight, got {len(values)}"
                    )
                weights.append(float(values[-1]))
                values = values[:-1]
            elif len(values) == ndim + 1:
                values = values[:-1]  # ignore an unused weight column
            elif len(values) != ndim:
                raise MetricLdpError(
                    f"expected {ndim} coordinates per line, got {len(values)}"
                )
            dataset.append(tuple(int(v) for v in values))
    return dataset, weights


def _cmd_simulate(args) -> int:
    data = _load_json_arg(args.config)
    if args.task is not None:
        data["task"] = _TASK_ALIASES.get(args.task, args.task)
    if args.seed is not None:
        data["seed"] = args.seed
    config = simulate.config_from_json(data)
    result = simulate.run_experiment(config)
    text = result.to_csv()
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_optimize(args) -> int:
    if args.target == "prefix-scales":
        if args.epsilon is None:
            raise MetricLdpError("prefix-scales needs --epsilon")
        scales = matrix_mech.optimal_prefix_scales(args.epsilon, args.m)
        coeff = 2.0 * args.m * (args.m - 1) / args.epsilon**2
        print("scales:", ",".join(f"{s:g}" for s in scales))
        print(f"total_error_per_owner: {coeff:g}")
        return EXIT_OK
    # freq-scales
    if args.metric is None:
        raise MetricLdpError("freq-scales needs --metric")
    metric = metric_from_config(_load_json_arg(args.metric))
    result = matrix_mech.optimize_frequency_scales(metric, args.m)
    print("scales:", ",".join(f"{s:.10g}" for s in result.scales))
    print(f"objective_per_owner: {result.objective_per_n:.10g}")
    return EXIT_OK


def _cmd_encode(args) -> int:
    domain = _parse_dims(args.dims)
    dataset, weights = _read_data_csv(args.data, domain.ndim, args.weighted)
    rng = np.random.default_rng(args.seed)
    if args.weighted:
        reports = [
            mdrq.encode_weighted_private(x, w, args.delta, domain, args.epsilon, rng)
            for x, w in zip(dataset, weights)
        ]
    else:
        reports = mdrq.encode_dataset(dataset, domain, args.epsilon, rng)
    mdrq.write_report_csv(args.out, reports)
    return EXIT_OK


def _cmd_aggregate(args) -> int:
    reports = mdrq.read_report_csv(args.reports)
    if not reports:
        raise MetricLdpError("no reports found")
    domain = DomainSpec(reports[0].dims)
    obs = mdrq.accumulate_observations(reports, domain)
    mdrq.write_observations_csv(args.out, obs)
    print(f"owners: {obs.owner_count}")
    return EXIT_OK


def _cmd_query(args) -> int:
    domain = _parse_dims(args.dims)
    obs = mdrq.read_observations_csv(args.obs, args.n)
    if len(obs.values) != domain.total_size:
        obs = mdrq.Observations(
            np.pad(obs.values, (0, domain.total_size - len(obs.values))), args.n
        )
    if (args.range is None) == (args.quantile is None):
        raise MetricLdpError("give exactly one of --range or --quantile")
    if args.range is not None:
        query = parse_range(args.range)
        est = mdrq.estimate_range(obs, query, args.epsilon, domain)
        print(f"estimate: {est:.10g}")
    else:
        if domain.ndim != 1:
            raise MetricLdpError("quantile queries need a 1-dim domain")
        result = quantile_search(obs, args.quantile, domain.dims[0], args.epsilon, args.n)
        print(f"quantile: {result.value}")
        print(f"estimated_percentile: {result.estimated_percentile:.10g}")
        print(f"probes: {result.probes}")
    return EXIT_OK


def _cmd_validate_metric(args) -> int:
    metric = metric_from_config(_load_json_arg(args.metric))
    ndim = metric.ndim or 1
    domain = DomainSpec((args.m,) * ndim)
    report = validate_metric(metric, domain, seed=args.seed or 0)
    print(
        json.dumps(
            {
                "is_metric": report.is_metric,
                "zero_diagonal": report.zero_diagonal,
                "symmetric": report.symmetric,
                "triangle": report.triangle,
                "first_violation": report.first_violation,
                "exhaustive": report.exhaustive,
            }
        )
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metricldp",
        description="Private frequency, range, and quantile estimation tools.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a simulation described by a JSON config")
    p.add_argument("task", nargs="?", choices=sorted(_TASK_ALIASES) + ["es_comparison"],
                   help="task name; overrides the config's task field")
    p.add_argument("--config", required=True, help="JSON config (inline or path)")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.add_argument("--seed", type=int, help="master seed override")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("optimize", help="compute noise scales for a mechanism")
    p.add_argument("target", choices=["freq-scales", "prefix-scales"])
    p.add_argument("--metric", help="metric JSON (inline or path)")
    p.add_argument("--m", type=int, required=True, help="domain size")
    p.add_argument("--epsilon", type=float, help="epsilon for prefix-scales")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("encode", help="encode an owner dataset into reports")
    p.add_argument("--data", required=True, help="input CSV, one owner per line")
    p.add_argument("--dims", required=True, help="domain sizes, e.g. 4,4,8")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--out", required=True, help="output reports CSV")
    p.add_argument("--weighted", action="store_true",
                   help="treat the trailing column as a private weight")
    p.add_argument("--delta", type=float, default=10.0, help="weight upper bound")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("aggregate", help="fold reports into an observation vector")
    p.add_argument("--reports", required=True)
    p.add_argument("--out", required=True, help="output observations CSV")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_aggregate)

    p = sub.add_parser("query", help="answer a range or quantile query")
    p.add_argument("--obs", required=True, help="observations CSV")
    p.add_argument("--dims", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--n", type=int, required=True, help="owner count")
    p.add_argument("--range", help='range as "l1:r1,l2:r2,..."')
    p.add_argument("--quantile", type=float, help="quantile level p in (0,1]")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_query)

    p = sub.add_parser("validate-metric", help="check metric axioms on [m]")
    p.add_argument("--metric", required=True, help="metric JSON (inline or path)")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_validate_metric)

    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (MetricLdpError, FileNotFoundError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
