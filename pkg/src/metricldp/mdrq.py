"""Multi-dimensional range counting under the scaled-L1 metric.

Owners encode each coordinate as a +/-1 threshold vector and flip every bit
independently with probability 1/(e^eps + 1). The collector aggregates the
per-cell products into an observation vector and inverts the (sparse,
recursive) +/-1 transform to recover unbiased point and range estimates.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .domain import (
    DENSE_CELL_GATE,
    DomainSpec,
    RangeQuery,
    as_point,
    flat_index,
)
from .errors import CapacityError, DomainError, ShapeError


def flip_probability(epsilon: float) -> float:
    """Per-bit flip probability 1/(e^eps + 1)."""
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    return 1.0 / (math.exp(epsilon) + 1.0)


def correction_factor(epsilon: float, ndim: int) -> float:
    """Debiasing scale ((e^eps + 1)/(e^eps - 1))^D."""
    e = math.exp(epsilon)
    return ((e + 1.0) / (e - 1.0)) ** ndim


@dataclass(frozen=True)
class ReportMatrix:
    """One owner's perturbed encoding: D rows, row d of length m_d, entries +/-1."""

    rows: tuple[np.ndarray, ...]

    def __post_init__(self):
        rows = tuple(np.asarray(r, dtype=np.int8) for r in self.rows)
        for r in rows:
            if r.ndim != 1 or not np.all(np.abs(r) == 1):
                raise DomainError("report rows must be 1-dim with entries in {-1, +1}")
        object.__setattr__(self, "rows", rows)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(len(r) for r in self.rows)


@dataclass(frozen=True)
class Observations:
    """Dense per-cell aggregate o_x = sum_i prod_d R_i[d, x[d]] plus owner count."""

    values: np.ndarray
    owner_count: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.int64)
        object.__setattr__(self, "values", v)
        if np.any(np.abs(v) > self.owner_count):
            raise DomainError("|o_x| cannot exceed the owner count")
        if v.size and np.any((v - self.owner_count) % 2 != 0):
            raise DomainError("every o_x must have the same parity as the owner count")


def threshold_rows(x, domain: DomainSpec) -> list[np.ndarray]:
    """Unperturbed encoding: row d is -1 below x[d], +1 from x[d] on."""
    x = domain.require(x)
    rows = []
    for v, m in zip(x, domain.dims):
        row = np.ones(m, dtype=np.int8)
        row[: v - 1] = -1
        rows.append(row)
    return rows


def _encode_rows(x, domain: DomainSpec, flip_prob: float, rng) -> ReportMatrix:
    # Internal: tests drive flip_prob = 0 to exercise the noiseless algebra.
    rows = threshold_rows(x, domain)
    if flip_prob > 0.0:
        for row in rows:
            flips = rng.random(len(row)) < flip_prob
            row[flips] *= -1
    return ReportMatrix(tuple(rows))


def encode_value(x, domain: DomainSpec, epsilon: float, rng) -> ReportMatrix:
    """Encode one owner's value under the scaled-L1 guarantee."""
    return _encode_rows(x, domain, flip_probability(epsilon), rng)


def encode_dataset(
    dataset, domain: DomainSpec, epsilon: float, rng
) -> list[ReportMatrix]:
    """Encode many owners with vectorized flip draws (one block per dimension)."""
    dataset = [domain.require(x) for x in dataset]
    n = len(dataset)
    p = flip_probability(epsilon)
    per_dim = []
    for d, m in enumerate(domain.dims):
        base = np.ones((n, m), dtype=np.int8)
        cols = np.arange(1, m + 1)
        vals = np.array([x[d] for x in dataset])
        base[cols[None, :] < vals[:, None]] = -1
        base[rng.random((n, m)) < p] *= -1
        per_dim.append(base)
    return [
        ReportMatrix(tuple(per_dim[d][i] for d in range(domain.ndim)))
        for i in range(n)
    ]


def accumulate_observations(
    reports: Iterable[ReportMatrix], domain: DomainSpec
) -> Observations:
    """o_x = sum_i prod_d R_i[d, x[d]], accumulated in integer arithmetic."""
    if domain.total_size > DENSE_CELL_GATE:
        raise CapacityError(
            f"{domain.total_size} cells exceeds the dense gate {DENSE_CELL_GATE}"
        )
    total = np.zeros(domain.total_size, dtype=np.int64)
    n = 0
    for report in reports:
        if report.dims != domain.dims:
            raise ShapeError(f"report dims {report.dims} != domain {domain.dims}")
        cell = report.rows[0].astype(np.int64)
        for row in report.rows[1:]:
            cell = np.kron(row.astype(np.int64), cell)
        total += cell
        n += 1
    return Observations(total, n)


def observation_at(reports: list[ReportMatrix], x, domain: DomainSpec) -> int:
    """Single observation cell computed from raw reports (on-the-fly backend)."""
    x = domain.require(x)
    total = 0
    for report in reports:
        prod = 1
        for d, v in enumerate(x):
            prod *= int(report.rows[d][v - 1])
        total += prod
    return total


# ---------------------------------------------------------------------------
# Sparse rows of the inverse transform.


@dataclass(frozen=True)
class SparseRow:
    """Sparse row vector as (1-based flat index, coefficient) pairs, indices increasing."""

    entries: tuple[tuple[int, float], ...]

    def dot(self, values: np.ndarray) -> float:
        return float(sum(c * values[i - 1] for i, c in self.entries))

    def to_dense(self, size: int) -> np.ndarray:
        out = np.zeros(size)
        for i, c in self.entries:
            out[i - 1] = c
        return out


def _base_inverse_row(v: int, m: int) -> list[tuple[int, float]]:
    # Row v of the m x m base inverse: 1/2 (e_1 + e_m) for v = 1,
    # 1/2 (e_v - e_{v-1}) otherwise. Collapses to [1] when m = 1.
    if v == 1:
        if m == 1:
            return [(0, 1.0)]
        return [(0, 0.5), (m - 1, 0.5)]
    return [(v - 2, -0.5), (v - 1, 0.5)]


def _lift(inner: list[tuple[int, float]], blocks: list[tuple[int, float]], width: int):
    return sorted(
        (b * width + i, bc * ic) for b, bc in blocks for i, ic in inner
    )


def binv_row(x, domain: DomainSpec) -> SparseRow:
    """Row ind(x) of the inverse transform, built by the block recursion.

    Exactly 2^D entries of magnitude 2^-D (dimensions of size 1 contribute a
    single unit coefficient instead).
    """
    x = domain.require(x)
    entries = [(0, 1.0)]
    width = 1
    for v, m in zip(x, domain.dims):
        entries = _lift(entries, _base_inverse_row(v, m), width)
        width *= m
    return SparseRow(tuple((i + 1, c) for i, c in entries))


def _base_range_blocks(l: int, r: int, m: int) -> list[tuple[int, float]]:
    # Sum of base-inverse rows l..r; the interior terms telescope away.
    if (l, r) == (1, m):
        return [(m - 1, 1.0)]
    if l == 1:
        return [(r - 1, 0.5), (m - 1, 0.5)]
    return [(l - 2, -0.5), (r - 1, 0.5)]


def range_row_sum(query: RangeQuery, domain: DomainSpec) -> SparseRow:
    """Sparse sum of binv_row over all cells of the query, via per-dimension
    cancellation: 2^{D_R} entries of magnitude 2^{-D_R}."""
    query.validate(domain)
    entries = [(0, 1.0)]
    width = 1
    for (l, r), m in zip(query.bounds, domain.dims):
        entries = _lift(entries, _base_range_blocks(l, r, m), width)
        width *= m
    return SparseRow(tuple((i + 1, c) for i, c in entries))


# ---------------------------------------------------------------------------
# Estimators.


def _correction(epsilon: Optional[float], ndim: int, override: Optional[float]) -> float:
    if override is not None:
        return override
    if epsilon is None:
        raise DomainError("need epsilon or an explicit correction factor")
    return correction_factor(epsilon, ndim)


def estimate_point(
    obs: Observations,
    x,
    epsilon: float,
    domain: DomainSpec,
    correction: Optional[float] = None,
) -> float:
    """Unbiased (possibly negative) frequency estimate of a single cell."""
    scale = _correction(epsilon, domain.ndim, correction)
    return scale * binv_row(x, domain).dot(obs.values)


def estimate_range(
    obs: Observations,
    query: RangeQuery,
    epsilon: float,
    domain: DomainSpec,
    correction: Optional[float] = None,
    dummy_extension: bool = False,
) -> float:
    """Unbiased range-count estimate; identical linear functional to summing
    estimate_point over the query cells.

    With dummy_extension the query is given in the original coordinates while
    the observations were built over domain.extended(), which makes every
    dimension of the query nontrivial.
    """
    if dummy_extension:
        query.validate(domain)
        domain = domain.extended()
    scale = _correction(epsilon, domain.ndim, correction)
    if len(obs.values) != domain.total_size:
        raise ShapeError(
            f"observations cover {len(obs.values)} cells, expected {domain.total_size}"
        )
    return scale * range_row_sum(query, domain).dot(obs.values)


def estimate_all_points(
    obs: Observations,
    epsilon: float,
    domain: DomainSpec,
    correction: Optional[float] = None,
) -> np.ndarray:
    """Full estimated frequency vector, via the separable inverse transform."""
    scale = _correction(epsilon, domain.ndim, correction)
    grid = obs.values.astype(float).reshape(domain.dims, order="F")
    for axis, m in enumerate(domain.dims):
        if m == 1:
            continue
        moved = np.moveaxis(grid, axis, 0)
        out = np.empty_like(moved)
        out[0] = 0.5 * (moved[0] + moved[m - 1])
        out[1:] = 0.5 * (moved[1:] - moved[:-1])
        grid = np.moveaxis(out, 0, axis)
    return scale * grid.reshape(-1, order="F")


def variance_bound_range(epsilon: float, ndim: int, nontrivial: int, n: int) -> float:
    """Analytic worst-case squared error for a range with D_R nontrivial dims
    (constant 1)."""
    if not (0 <= nontrivial <= ndim):
        raise DomainError("nontrivial dimension count outside [0, D]")
    e = math.exp(epsilon)
    ratio = (e + 1.0) / (e - 1.0)
    shrink = ((e - 1.0) / (e + 1.0)) ** (2 * ndim)
    return ratio ** (2 * ndim) * 2.0 ** (-nontrivial) * (1.0 - shrink) * n


def variance_bound_point(epsilon: float, ndim: int, n: int) -> float:
    """Analytic worst-case squared error of a single-cell estimate (constant 1)."""
    return variance_bound_range(epsilon, ndim, ndim, n)


# ---------------------------------------------------------------------------
# Weighted range queries.


def round_weight(w: float, delta: float, rng) -> int:
    """Randomized rounding of w in [0, delta] to {1, 2}: 2 with probability w/delta."""
    if delta <= 0:
        raise DomainError("delta must be positive")
    if not (0.0 <= w <= delta):
        raise DomainError(f"weight {w} outside [0, {delta}]")
    return 2 if rng.random() < w / delta else 1


def weighted_domain(domain: DomainSpec) -> DomainSpec:
    """Domain with the rounded-weight coordinate appended (size 2)."""
    return DomainSpec(domain.dims + (2,))


def encode_weighted_private(
    x, w: float, delta: float, domain: DomainSpec, epsilon: float, rng
) -> ReportMatrix:
    """Private-weight encoding: round the weight, append it as dimension D+1."""
    rounded = round_weight(w, delta, rng)
    return encode_value(
        as_point(x) + (rounded,), weighted_domain(domain), epsilon, rng
    )


def estimate_weighted_private(
    obs: Observations,
    query: RangeQuery,
    delta: float,
    epsilon: float,
    domain: DomainSpec,
    correction: Optional[float] = None,
) -> float:
    """delta * estimate of R x [2, 2] on the (D+1)-dim observations."""
    if delta < 0:
        raise DomainError("delta must be nonnegative")
    ext = weighted_domain(domain)
    if len(obs.values) != ext.total_size:
        raise ShapeError(
            f"observations cover {len(obs.values)} cells, expected {ext.total_size}"
        )
    if query.ndim != domain.ndim:
        raise ShapeError("query dimensionality does not match the value domain")
    if delta == 0:
        return 0.0
    lifted = query.product(RangeQuery(((2, 2),)))
    return delta * estimate_range(obs, lifted, epsilon, ext, correction)


def estimate_weighted_nonprivate(group_estimators, query: RangeQuery) -> float:
    """Weighted sum of per-weight-group unweighted range estimates.

    `group_estimators` maps each exact weight to a callable query -> estimate.
    """
    return float(
        sum(w * estimator(query) for w, estimator in group_estimators.items())
    )


def weighted_variance_bound(
    epsilon: float, ndim: int, nontrivial: int, n: int, delta: float, private: bool
) -> float:
    """Theorem-style bound on the weighted estimate's squared error (constant 1)."""
    if private:
        return delta**2 * variance_bound_range(epsilon, ndim + 1, nontrivial + 1, n)
    return delta**2 * variance_bound_range(epsilon, ndim, nontrivial, n)


# ---------------------------------------------------------------------------
# Estimator backends (equivalent answers, different cost profiles).


class PointTableBackend:
    """Precomputes every cell estimate; a range is the sum over its cells."""

    def __init__(self, obs: Observations, epsilon, domain: DomainSpec, correction=None):
        self.domain = domain
        self.points = estimate_all_points(obs, epsilon, domain, correction)

    def point(self, x) -> float:
        return float(self.points[flat_index(x, self.domain) - 1])

    def range(self, query: RangeQuery) -> float:
        return float(sum(self.point(x) for x in query.points()))


class PrefixSumBackend:
    """Point table plus a D-dim prefix-sum grid; a range costs 2^D lookups."""

    def __init__(self, obs: Observations, epsilon, domain: DomainSpec, correction=None):
        self.domain = domain
        self.points = estimate_all_points(obs, epsilon, domain, correction)
        grid = self.points.reshape(domain.dims, order="F")
        for axis in range(domain.ndim):
            grid = np.cumsum(grid, axis=axis)
        self.prefix = grid

    def point(self, x) -> float:
        return float(self.points[flat_index(x, self.domain) - 1])

    def range(self, query: RangeQuery) -> float:
        query.validate(self.domain)
        total = 0.0
        for mask in range(1 << self.domain.ndim):
            corner = []
            sign = 1.0
            for d, (l, r) in enumerate(query.bounds):
                if mask >> d & 1:
                    corner.append(l - 1)
                    sign = -sign
                else:
                    corner.append(r)
            if any(c == 0 for c in corner):
                continue
            total += sign * float(self.prefix[tuple(c - 1 for c in corner)])
        return total


class OnTheFlyBackend:
    """Keeps raw reports; computes only the observation cells a query needs."""

    def __init__(self, reports: list[ReportMatrix], epsilon, domain: DomainSpec, correction=None):
        self.reports = list(reports)
        self.domain = domain
        self.scale = _correction(epsilon, domain.ndim, correction)
        self._cache: dict[int, int] = {}

    def _obs(self, idx: int) -> int:
        if idx not in self._cache:
            from .domain import point_of_index

            self._cache[idx] = observation_at(
                self.reports, point_of_index(idx, self.domain), self.domain
            )
        return self._cache[idx]

    def _apply(self, row: SparseRow) -> float:
        return self.scale * float(sum(c * self._obs(i) for i, c in row.entries))

    def point(self, x) -> float:
        return self._apply(binv_row(x, self.domain))

    def range(self, query: RangeQuery) -> float:
        return self._apply(range_row_sum(query, self.domain))


# ---------------------------------------------------------------------------
# Portable report / observation files.


def write_report_csv(path, reports: Iterable[ReportMatrix]) -> None:
    """CSV with header owner_id,dim,bits; bits is a +/- string of length m_d."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["owner_id", "dim", "bits"])
        for owner, report in enumerate(reports, start=1):
            for d, row in enumerate(report.rows, start=1):
                bits = "".join("+" if v > 0 else "-" for v in row)
                writer.writerow([owner, d, bits])


def read_report_csv(path) -> list[ReportMatrix]:
    owners: dict[int, dict[int, np.ndarray]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            bits = rec["bits"]
            if set(bits) - {"+", "-"}:
                raise DomainError(f"bad bits string {bits!r}")
            row = np.array([1 if ch == "+" else -1 for ch in bits], dtype=np.int8)
            owners.setdefault(int(rec["owner_id"]), {})[int(rec["dim"])] = row
    reports = []
    for owner in sorted(owners):
        rows = owners[owner]
        reports.append(ReportMatrix(tuple(rows[d] for d in sorted(rows))))
    return reports


def write_observations_csv(path, obs: Observations) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["flat_index", "value"])
        for idx, value in enumerate(obs.values, start=1):
            writer.writerow([idx, int(value)])


def read_observations_csv(path, owner_count: int) -> Observations:
    values = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            values[int(rec["flat_index"])] = int(rec["value"])
    dense = np.zeros(max(values) if values else 0, dtype=np.int64)
    for idx, value in values.items():
        dense[idx - 1] = value
    return Observations(dense, owner_count)
