"""Metric functions on finite value domains: evaluation, validation, composition.

Supported families:
  * super_sensitive -- E(x,x') = eps if either value lies in the set S, else 2*eps
  * l1              -- E(x,y) = eps * sum_d |x[d] - y[d]| on a D-dim grid
  * table           -- explicit symmetric nonnegative matrix on [m]
  * sum             -- pointwise sum of two metrics (sequential composition)
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .domain import DomainSpec, as_point
from .errors import DomainError

# Exhaustive triangle checking is O(total_size^3); above this we sample.
EXHAUSTIVE_GATE = 256
DEFAULT_SAMPLE_TRIPLES = 100_000
DEFAULT_TRIANGLE_TOL = 1e-9

KINDS = ("super_sensitive", "l1", "table", "sum")


@dataclass(frozen=True)
class Metric:
    kind: str
    epsilon: float = 0.0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown metric kind {self.kind!r}")
        if self.kind != "table" and self.kind != "sum" and self.epsilon < 0:
            raise DomainError("epsilon must be nonnegative")

    @property
    def ndim(self) -> Optional[int]:
        """Coordinate count this metric expects, or None if any 1-dim domain fits."""
        if self.kind == "l1":
            return int(self.params.get("D", 1))
        if self.kind == "sum":
            a = self.params["parts"][0].ndim
            b = self.params["parts"][1].ndim
            return a if a is not None else b
        return 1

    @property
    def domain_size(self) -> Optional[int]:
        """Required 1-dim domain size, if the metric pins one down."""
        if self.kind == "table":
            return len(self.params["values"])
        if self.kind == "sum":
            for part in self.params["parts"]:
                if part.domain_size is not None:
                    return part.domain_size
        return None


def super_sensitive_metric(epsilon: float, sensitive: set) -> Metric:
    return Metric("super_sensitive", epsilon, {"S": frozenset(int(v) for v in sensitive)})


def l1_metric(epsilon: float, ndim: int = 1) -> Metric:
    return Metric("l1", epsilon, {"D": int(ndim)})


def table_metric(values) -> Metric:
    table = np.asarray(values, dtype=float)
    if table.ndim != 2 or table.shape[0] != table.shape[1]:
        raise DomainError("metric table must be square")
    if not np.all(np.isfinite(table)) or np.any(table < 0):
        raise DomainError("metric table entries must be finite and nonnegative")
    return Metric("table", 0.0, {"values": table})


def zero_metric() -> Metric:
    return l1_metric(0.0, 1)


def eval_metric(metric: Metric, x, x2) -> float:
    """Evaluate E(x, x'); symmetric and deterministic."""
    x = as_point(x)
    x2 = as_point(x2)
    if metric.kind == "l1":
        want = metric.ndim
        if len(x) != want or len(x2) != want:
            raise DomainError(f"l1 metric expects {want}-dim values")
        return metric.epsilon * sum(abs(a - b) for a, b in zip(x, x2))
    if len(x) != 1 or len(x2) != 1:
        raise DomainError(f"{metric.kind} metric expects scalar values")
    a, b = x[0], x2[0]
    if metric.kind == "super_sensitive":
        if a < 1 or b < 1:
            raise DomainError("values must be >= 1")
        if a == b:
            return 0.0
        sens = metric.params["S"]
        return metric.epsilon if (a in sens or b in sens) else 2.0 * metric.epsilon
    if metric.kind == "table":
        table = metric.params["values"]
        m = len(table)
        if not (1 <= a <= m and 1 <= b <= m):
            raise DomainError(f"value outside table domain [1, {m}]")
        return float(table[a - 1, b - 1])
    # sum
    e1, e2 = metric.params["parts"]
    return eval_metric(e1, x, x2) + eval_metric(e2, x, x2)


def compose_metrics(e1: Metric, e2: Metric) -> Metric:
    """Metric of the sequential composition: pointwise sum of e1 and e2."""
    n1, n2 = e1.ndim, e2.ndim
    if n1 is not None and n2 is not None and n1 != n2:
        raise DomainError(f"metric dimension mismatch: {n1} vs {n2}")
    s1, s2 = e1.domain_size, e2.domain_size
    if s1 is not None and s2 is not None and s1 != s2:
        raise DomainError(f"metric domain size mismatch: {s1} vs {s2}")
    return Metric("sum", 0.0, {"parts": (e1, e2)})


@dataclass(frozen=True)
class ValidationReport:
    zero_diagonal: bool
    symmetric: bool
    triangle: bool
    first_violation: Optional[tuple] = None
    exhaustive: bool = True

    @property
    def is_metric(self) -> bool:
        return self.zero_diagonal and self.symmetric and self.triangle


def validate_metric(
    metric: Metric,
    domain: DomainSpec,
    tolerance: float = DEFAULT_TRIANGLE_TOL,
    sample_triples: int = DEFAULT_SAMPLE_TRIPLES,
    seed: int = 0,
) -> ValidationReport:
    """Check the metric axioms on `domain`.

    Exhaustive (all pairs, all triples) when total_size <= EXHAUSTIVE_GATE,
    otherwise a seeded random-triple sampler. Violations are reported, never
    raised.
    """
    size = domain.total_size
    pts = list(domain.points())
    simple = domain.ndim == 1
    values = [p[0] if simple else p for p in pts]

    def ev(a, b):
        return eval_metric(metric, a, b)

    if size <= EXHAUSTIVE_GATE:
        dist = np.empty((size, size))
        for i, a in enumerate(values):
            for j, b in enumerate(values):
                dist[i, j] = ev(a, b)
        zero_diag = bool(np.all(dist.diagonal() == 0.0))
        symmetric = bool(np.array_equal(dist, dist.T))
        finite_nonneg = bool(np.all(np.isfinite(dist)) and np.all(dist >= 0))
        triangle = True
        violation = None
        for i in range(size):
            # require dist[i, k] <= dist[i, j] + dist[j, k] for all j, k
            via = dist[i, :][:, None] + dist  # via[j, k] = d(i,j) + d(j,k)
            worst = via.min(axis=0)
            bad = dist[i] > worst + tolerance
            if bad.any():
                k = int(np.argmax(bad))
                j = int(np.argmin(via[:, k]))
                violation = (values[i], values[j], values[k])
                triangle = False
                break
        return ValidationReport(
            zero_diag and finite_nonneg, symmetric, triangle, violation, True
        )

    rng = np.random.default_rng(seed)
    zero_diag = symmetric = triangle = True
    violation = None
    for _ in range(sample_triples):
        i, j, k = rng.integers(0, size, size=3)
        a, b, c = values[i], values[j], values[k]
        if ev(a, a) != 0.0:
            zero_diag = False
        if ev(a, b) != ev(b, a):
            symmetric = False
        if ev(a, c) > ev(a, b) + ev(b, c) + tolerance:
            triangle = False
            if violation is None:
                violation = (a, b, c)
    return ValidationReport(zero_diag, symmetric, triangle, violation, False)


def metric_from_config(config) -> Metric:
    """Build a metric from its JSON config form.

    {"kind":"super_sensitive","epsilon":1.0,"S":[3,7]}
    {"kind":"l1","epsilon":0.5}            (optional "D", default 1)
    {"kind":"table","values":[[...]]}
    """
    if isinstance(config, str):
        config = json.loads(config)
    kind = config.get("kind")
    if kind == "super_sensitive":
        return super_sensitive_metric(float(config["epsilon"]), set(config["S"]))
    if kind == "l1":
        return l1_metric(float(config["epsilon"]), int(config.get("D", 1)))
    if kind == "table":
        return table_metric(config["values"])
    raise DomainError(f"unknown metric config kind {kind!r}")


def metric_to_config(metric: Metric) -> dict[str, Any]:
    if metric.kind == "super_sensitive":
        return {
            "kind": "super_sensitive",
            "epsilon": metric.epsilon,
            "S": sorted(metric.params["S"]),
        }
    if metric.kind == "l1":
        return {"kind": "l1", "epsilon": metric.epsilon, "D": metric.ndim}
    if metric.kind == "table":
        return {"kind": "table", "values": metric.params["values"].tolist()}
    raise DomainError(f"metric kind {metric.kind!r} has no config form")
