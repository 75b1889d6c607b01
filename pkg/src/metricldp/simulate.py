"""Desk-scale simulation harness: synthetic data, experiment loops, CSV output.

Each experiment row records the empirical mean squared error of a task next
to the analytic bound computed from the same parameters, so the two columns
are directly comparable downstream.
"""

from __future__ import annotations

import io
import json
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import matrix_mech, mdrq
from .quantile import quantile as _quantile_search, quantile_error_bound
from .domain import DomainSpec, RangeQuery
from .errors import DomainError
from .metrics import Metric, l1_metric, metric_from_config

CSV_HEADER = "task,epsilon,D,D_R,m,n,trials,empirical_mse,analytic_bound,wall_time_ms"

TASKS = ("frequency", "range", "quantile", "weighted", "linear-workload", "es_comparison")

DEFAULT_QUANTILE_PS = (0.25, 0.5, 0.9)
ZIPF_EXPONENT = 1.1


@dataclass(frozen=True)
class ExperimentConfig:
    task: str
    domain: DomainSpec
    n: int
    epsilons: tuple[float, ...]
    trials: int = 3
    query_count: int = 100
    seed: int = 0
    backend: str = "point_table"
    metric: Optional[Metric] = None
    # Task-specific knobs.
    weight_delta: float = 10.0
    quantile_ps: tuple[float, ...] = DEFAULT_QUANTILE_PS
    quantile_delta: float = 0.05
    s_sizes: tuple[int, ...] = ()

    def __post_init__(self):
        if self.task not in TASKS:
            raise DomainError(f"unknown task {self.task!r}")
        if self.trials < 1:
            raise DomainError("trials must be at least 1")
        if any(e <= 0 for e in self.epsilons):
            raise DomainError("epsilons must all be positive")


@dataclass(frozen=True)
class ResultRow:
    task: str
    epsilon: float
    D: int
    D_R: int
    m: int
    n: int
    trials: int
    empirical_mse: float
    analytic_bound: float
    wall_time_ms: float


@dataclass(frozen=True)
class ExperimentResult:
    rows: tuple[ResultRow, ...]

    def to_csv(self) -> str:
        """Render to CSV text. Wall time is zeroed so output is a pure
        function of the config and seed (the measured value stays on the row
        objects)."""
        out = io.StringIO()
        out.write(CSV_HEADER + "\n")
        for r in self.rows:
            out.write(
                f"{r.task},{r.epsilon:.10g},{r.D},{r.D_R},{r.m},{r.n},"
                f"{r.trials},{r.empirical_mse:.12g},{r.analytic_bound:.12g},0\n"
            )
        return out.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


def zipf_pmf(m: int, exponent: float = ZIPF_EXPONENT) -> np.ndarray:
    if exponent <= 1.0:
        raise DomainError("zipf exponent must exceed 1")
    weights = np.arange(1, m + 1, dtype=float) ** (-exponent)
    return weights / weights.sum()


def gen_zipf(n: int, domain: DomainSpec, exponent: float, seed) -> list[tuple[int, ...]]:
    """n values with each coordinate drawn independently from a truncated
    Zipf law over [m_d]; deterministic under the seed."""
    rng = np.random.default_rng(seed)
    cols = [
        rng.choice(np.arange(1, m + 1), size=n, p=zipf_pmf(m, exponent))
        for m in domain.dims
    ]
    return [tuple(int(c[i]) for c in cols) for i in range(n)]


def true_count(dataset, query: RangeQuery) -> int:
    return sum(1 for x in dataset if query.contains(x))


def true_weighted_count(dataset, weights, query: RangeQuery) -> float:
    return float(sum(w for x, w in zip(dataset, weights) if query.contains(x)))


def random_range(domain: DomainSpec, rng) -> RangeQuery:
    """Uniform interval per dimension: draw two values in [m_d] and sort."""
    bounds = []
    for m in domain.dims:
        a, b = rng.integers(1, m + 1, size=2)
        bounds.append((int(min(a, b)), int(max(a, b))))
    return RangeQuery(tuple(bounds))


def _true_percentiles(dataset, m: int, n: int) -> np.ndarray:
    counts = np.bincount([x[0] for x in dataset], minlength=m + 1)[1:]
    return np.cumsum(counts) / n


def _quantile_err(sigma: np.ndarray, x_hat: int, p: float) -> float:
    # Distance from p to the true percentile interval (sigma(x-1), sigma(x)].
    lo = sigma[x_hat - 2] if x_hat >= 2 else 0.0
    hi = sigma[x_hat - 1]
    if lo < p <= hi:
        return 0.0
    return min(abs(p - lo), abs(p - hi))


def _backend(name: str, obs, reports, epsilon, domain):
    if name == "point_table":
        return mdrq.PointTableBackend(obs, epsilon, domain)
    if name == "prefix_sum":
        return mdrq.PrefixSumBackend(obs, epsilon, domain)
    if name == "on_the_fly":
        return mdrq.OnTheFlyBackend(reports, epsilon, domain)
    raise DomainError(f"unknown backend {name!r}")


def _run_frequency(config, epsilon, rng):
    domain = config.domain
    errors = []
    for _ in range(config.trials):
        data = gen_zipf(config.n, domain, ZIPF_EXPONENT, rng)
        truth = np.zeros(domain.total_size)
        from .domain import flat_index

        for x in data:
            truth[flat_index(x, domain) - 1] += 1
        reports = mdrq.encode_dataset(data, domain, epsilon, rng)
        obs = mdrq.accumulate_observations(reports, domain)
        est = mdrq.estimate_all_points(obs, epsilon, domain)
        errors.append(np.mean((est - truth) ** 2))
    bound = mdrq.variance_bound_point(epsilon, domain.ndim, config.n)
    return float(np.mean(errors)), bound, domain.ndim


def _run_range(config, epsilon, rng):
    # Queries are posed on the dummy-extended domain so every query is
    # nontrivial in every dimension and one bound covers the row.
    base = config.domain
    ext = base.extended()
    errors = []
    for _ in range(config.trials):
        data = gen_zipf(config.n, base, ZIPF_EXPONENT, rng)
        reports = mdrq.encode_dataset(data, ext, epsilon, rng)
        obs = mdrq.accumulate_observations(reports, ext)
        backend = _backend(config.backend, obs, reports, epsilon, ext)
        for _ in range(config.query_count):
            query = random_range(base, rng)
            est = backend.range(query)
            errors.append((est - true_count(data, query)) ** 2)
    bound = mdrq.variance_bound_range(epsilon, ext.ndim, ext.ndim, config.n)
    return float(np.mean(errors)), bound, ext.ndim


def _run_quantile(config, epsilon, rng):
    domain = config.domain
    if domain.ndim != 1:
        raise DomainError("quantile task needs a 1-dim domain")
    m = domain.dims[0]
    errs = []
    for _ in range(config.trials):
        data = gen_zipf(config.n, domain, ZIPF_EXPONENT, rng)
        sigma = _true_percentiles(data, m, config.n)
        reports = mdrq.encode_dataset(data, domain, epsilon, rng)
        obs = mdrq.accumulate_observations(reports, domain)
        for p in config.quantile_ps:
            result = _quantile_search(obs, p, m, epsilon, config.n)
            errs.append(_quantile_err(sigma, result.value, p) ** 2)
    bound = quantile_error_bound(epsilon, config.n, m, config.quantile_delta) ** 2
    return float(np.mean(errs)), bound, 1


def _run_weighted(config, epsilon, rng):
    base = config.domain
    delta = config.weight_delta
    ext = mdrq.weighted_domain(base)
    errors = []
    for _ in range(config.trials):
        data = gen_zipf(config.n, base, ZIPF_EXPONENT, rng)
        weights = rng.uniform(0.0, delta, size=config.n)
        reports = [
            mdrq.encode_weighted_private(x, w, delta, base, epsilon, rng)
            for x, w in zip(data, weights)
        ]
        obs = mdrq.accumulate_observations(reports, ext)
        for _ in range(config.query_count):
            query = random_range(base, rng)
            est = mdrq.estimate_weighted_private(obs, query, delta, epsilon, base)
            errors.append((est - true_weighted_count(data, weights, query)) ** 2)
    bound = mdrq.weighted_variance_bound(
        epsilon, base.ndim, base.ndim, config.n, delta, private=True
    )
    return float(np.mean(errors)), bound, base.ndim


def _run_linear_workload(config, epsilon, rng):
    domain = config.domain
    if domain.ndim != 1:
        raise DomainError("linear-workload task needs a 1-dim domain")
    m = domain.dims[0]
    mech = matrix_mech.prefix_mechanism(epsilon, m)
    workload = mech.workload
    totals = []
    for _ in range(config.trials):
        data = gen_zipf(config.n, domain, ZIPF_EXPONENT, rng)
        hist = np.bincount([x[0] for x in data], minlength=m + 1)[1:].astype(float)
        reports = matrix_mech.encode_batch(mech, [x[0] for x in data], rng)
        est = matrix_mech.estimate_workload(reports, mech)
        totals.append(np.sum((est - workload @ hist) ** 2))
    bound = 2.0 * config.n * m * (m - 1) / epsilon**2
    return float(np.mean(totals)), bound, 1


def _run_es_comparison(config, epsilon):
    # Analytic comparison, no sampling: optimized per-owner objective for a
    # super-sensitive set of each requested size vs the uniform baseline.
    if config.domain.ndim != 1:
        raise DomainError("es_comparison needs a 1-dim domain")
    m = config.domain.dims[0]
    if not config.s_sizes:
        raise DomainError("es_comparison needs s_sizes")
    from .metrics import super_sensitive_metric

    baseline = 8.0 * m / epsilon**2
    rows = []
    for k in config.s_sizes:
        if not (1 <= k <= m):
            raise DomainError(f"sensitive-set size {k} outside [1, {m}]")
        metric = super_sensitive_metric(epsilon, set(range(1, k + 1)))
        result = matrix_mech.optimize_frequency_scales(metric, m)
        rows.append((k, result.objective_per_n * config.n, baseline * config.n))
    return rows


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run every (task, epsilon) cell of the config and collect result rows."""
    rows = []
    for epsilon in config.epsilons:
        start = time.perf_counter()
        rng = np.random.default_rng((config.seed, hash(epsilon) & 0xFFFFFFFF))
        if config.task == "es_comparison":
            for k, mse, bound in _run_es_comparison(config, epsilon):
                rows.append(
                    ResultRow(
                        config.task, epsilon, 1, k,
                        config.domain.dims[0], config.n, config.trials,
                        mse, bound, (time.perf_counter() - start) * 1000,
                    )
                )
            continue
        runner = {
            "frequency": _run_frequency,
            "range": _run_range,
            "quantile": _run_quantile,
            "weighted": _run_weighted,
            "linear-workload": _run_linear_workload,
        }[config.task]
        mse, bound, d_r = runner(config, epsilon, rng)
        rows.append(
            ResultRow(
                config.task, epsilon, config.domain.ndim, d_r,
                max(config.domain.dims), config.n, config.trials,
                mse, bound, (time.perf_counter() - start) * 1000,
            )
        )
    return ExperimentResult(tuple(rows))


def config_from_json(source) -> ExperimentConfig:
    """Build a config from a JSON object, text, or file path."""
    if isinstance(source, str):
        try:
            data = json.loads(source)
        except json.JSONDecodeError:
            with open(source) as fh:
                data = json.load(fh)
    elif isinstance(source, dict):
        data = source
    else:
        data = json.load(source)
    try:
        metric = None
        if "metric" in data and data["metric"] is not None:
            metric = metric_from_config(data["metric"])
        return ExperimentConfig(
            task=data["task"],
            domain=DomainSpec(tuple(data["dims"])),
            n=int(data["n"]),
            epsilons=tuple(float(e) for e in data["epsilons"]),
            trials=int(data.get("trials", 3)),
            query_count=int(data.get("query_count", 100)),
            seed=int(data.get("seed", 0)),
            backend=data.get("backend", "point_table"),
            metric=metric,
            weight_delta=float(data.get("weight_delta", 10.0)),
            quantile_ps=tuple(data.get("quantile_ps", DEFAULT_QUANTILE_PS)),
            quantile_delta=float(data.get("quantile_delta", 0.05)),
            s_sizes=tuple(int(k) for k in data.get("s_sizes", ())),
        )
    except KeyError as exc:
        raise DomainError(f"config missing required field {exc.args[0]!r}")


def default_metric(config: ExperimentConfig) -> Metric:
    if config.metric is not None:
        return config.metric
    return l1_metric(config.epsilons[0], config.domain.ndim)
