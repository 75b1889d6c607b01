"""Quantile queries over a 1-dim domain via binary search on the range oracle.

The percentile of x is estimated as the privatized count of [1, x] divided by
n; the p-quantile is located by binary search over that monotone (in
expectation) curve, with a short linear scan at the end and a deterministic
fallback when noise breaks monotonicity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .domain import DomainSpec, RangeQuery
from .errors import DomainError
from .mdrq import Observations, estimate_range

# Switch from bisection to a linear scan once the bracket is this small.
SCAN_WINDOW = 10


@dataclass(frozen=True)
class QuantileResult:
    value: int
    estimated_percentile: float
    probes: int


def percentile(
    obs: Observations,
    x: int,
    epsilon: float,
    n: int,
    correction: Optional[float] = None,
) -> float:
    """Estimated percentile of x: privatized count of [1, x] over n.

    x = 0 is the defined boundary with percentile 0. The estimate can land
    outside [0, 1] because of noise.
    """
    if n <= 0:
        raise DomainError("n must be positive")
    m = len(obs.values)
    if not (0 <= x <= m):
        raise DomainError(f"value {x} outside [0, {m}]")
    if x == 0:
        return 0.0
    domain = DomainSpec((m,))
    return estimate_range(obs, RangeQuery(((1, x),)), epsilon, domain, correction) / n


def quantile(
    obs: Observations,
    p: float,
    m: int,
    epsilon: float,
    n: int,
    correction: Optional[float] = None,
) -> QuantileResult:
    """Locate the p-quantile: the first x with sigma(x-1) < p <= sigma(x)."""
    if not (0.0 < p <= 1.0):
        raise DomainError(f"p must lie in (0, 1], got {p}")
    if m < 1 or len(obs.values) != m:
        raise DomainError(f"observations cover {len(obs.values)} cells, expected {m}")

    cache: dict[int, float] = {0: 0.0}
    probes = 0

    def sigma(x: int) -> float:
        nonlocal probes
        if x not in cache:
            cache[x] = percentile(obs, x, epsilon, n, correction)
            probes += 1
        return cache[x]

    lo, hi = 1, m
    while hi - lo > SCAN_WINDOW:
        mid = math.ceil((lo + hi) / 2)
        if sigma(mid) < p:
            lo = mid
        else:
            hi = mid

    answer = None
    for x in range(lo, hi + 1):
        if sigma(x - 1) < p <= sigma(x):
            answer = x
            break
    if answer is None:
        # Noise broke monotonicity in the scan window; take the closest match.
        answer = min(range(lo, hi + 1), key=lambda x: (abs(sigma(x) - p), x))
    return QuantileResult(answer, sigma(answer), probes)


def percentile_error_bound(epsilon: float, n: int, delta: float) -> float:
    """High-probability bound on |estimated - true| percentile of one value."""
    if epsilon <= 0 or n < 1 or not (0.0 < delta < 1.0):
        raise DomainError("need epsilon > 0, n >= 1, delta in (0, 1)")
    e = math.exp(epsilon)
    return (e + 1.0) / (e - 1.0) * math.sqrt(2.0 / n * math.log(1.0 / delta))


def quantile_error_bound(epsilon: float, n: int, m: int, delta: float) -> float:
    """Bound on the quantile search error, union-bounded over the probed values."""
    if m < 2:
        raise DomainError("m must be at least 2")
    if epsilon <= 0 or n < 1 or not (0.0 < delta < 1.0):
        raise DomainError("need epsilon > 0, n >= 1, delta in (0, 1)")
    e = math.exp(epsilon)
    inner = math.log(2.0 * math.log2(m) / delta)
    return 2.0 * (e + 1.0) / (e - 1.0) * math.sqrt(2.0 / n * inner)
