"""Generic metric-LDP matrix mechanism for linear counting workloads.

Owners report A @ h_x + Lap(s); the collector reconstructs W @ c as
B @ sum(reports). Includes the privacy feasibility check, variance
accounting, the all-ranges/prefix strategy for 1-dim range workloads,
and scale optimization for frequency workloads.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InfeasibleError, ShapeError
from .metrics import Metric, eval_metric

FACTORIZATION_TOL = 1e-9

# Dense W_m is O(m^2) x m; keep desk-scale.
MAX_DOMAIN = 4096


@dataclass(frozen=True)
class MatrixMechanism:
    """Strategy A (p x m), reconstruction B (q x p), workload W = B A, scales s.

    scales[k] == 0 marks a noiseless row (no Laplace draw for row k).
    """

    strategy: np.ndarray
    reconstruction: np.ndarray
    scales: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.strategy, dtype=float)
        b = np.asarray(self.reconstruction, dtype=float)
        s = np.asarray(self.scales, dtype=float)
        if a.ndim != 2 or b.ndim != 2 or b.shape[1] != a.shape[0]:
            raise ShapeError(f"incompatible shapes A{a.shape}, B{b.shape}")
        if s.shape != (a.shape[0],):
            raise ShapeError(f"scales must have length {a.shape[0]}")
        if np.any(s < 0) or not np.all(np.isfinite(s)):
            raise DomainError("scales must be finite and nonnegative")
        object.__setattr__(self, "strategy", a)
        object.__setattr__(self, "reconstruction", b)
        object.__setattr__(self, "scales", s)

    @property
    def workload(self) -> np.ndarray:
        return self.reconstruction @ self.strategy

    @property
    def domain_size(self) -> int:
        return self.strategy.shape[1]

    @property
    def report_length(self) -> int:
        return self.strategy.shape[0]


def laplace_noise(scales, rng) -> np.ndarray:
    """Inverse-CDF Laplace draws, one per positive scale (zero scale -> 0).

    Uniform draws are consumed in row order, skipping zero-scale rows, so a
    seeded generator replays exactly.
    """
    scales = np.asarray(scales, dtype=float)
    out = np.zeros_like(scales)
    live = scales > 0
    if live.any():
        u = rng.random(int(live.sum()))
        centered = u - 0.5
        out[live] = -scales[live] * np.sign(centered) * np.log1p(-2.0 * np.abs(centered))
    return out


def encode(mech: MatrixMechanism, x: int, rng) -> np.ndarray:
    """One owner's report A @ h_x + Lap(s)."""
    m = mech.domain_size
    if not (1 <= x <= m):
        raise DomainError(f"value {x} outside [1, {m}]")
    return mech.strategy[:, x - 1] + laplace_noise(mech.scales, rng)


def encode_batch(mech: MatrixMechanism, values, rng) -> np.ndarray:
    """Reports for many owners (rows), vectorized; one noise matrix draw."""
    values = np.asarray(values, dtype=int)
    if values.size and (values.min() < 1 or values.max() > mech.domain_size):
        raise DomainError("value outside domain")
    base = mech.strategy[:, values - 1].T  # (n, p)
    noise = np.zeros_like(base)
    live = mech.scales > 0
    if live.any() and len(values):
        u = rng.random((len(values), int(live.sum())))
        centered = u - 0.5
        noise[:, live] = (
            -mech.scales[live] * np.sign(centered) * np.log1p(-2.0 * np.abs(centered))
        )
    return base + noise


def check_privacy(mech: MatrixMechanism, metric: Metric, m: int | None = None, tol: float = 1e-9):
    """Verify sum_k |a_k^T (h_x - h_x')| / s_k <= E(x, x') for every pair.

    Convention: 0/0 = 0 (zero coefficient on a noiseless row), c/0 = inf.
    Returns {"feasible": bool, "worst_pair": (x, x', lhs, rhs) | None}.
    """
    if m is None:
        m = mech.domain_size
    a = mech.strategy
    s = mech.scales
    for x in range(1, m + 1):
        for x2 in range(x + 1, m + 1):
            diff = np.abs(a[:, x - 1] - a[:, x2 - 1])
            lhs = 0.0
            for k in range(len(s)):
                if diff[k] == 0.0:
                    continue
                if s[k] == 0.0:
                    lhs = math.inf
                    break
                lhs += diff[k] / s[k]
            rhs = eval_metric(metric, x, x2)
            if lhs > rhs + tol:
                return {"feasible": False, "worst_pair": (x, x2, lhs, rhs)}
    return {"feasible": True, "worst_pair": None}


def estimate_workload(reports, mech: MatrixMechanism) -> np.ndarray:
    """B @ sum_i r_i, the unbiased workload estimate."""
    p = mech.report_length
    total = np.zeros(p)
    for r in np.atleast_2d(np.asarray(reports, dtype=float)) if len(reports) else []:
        if r.shape != (p,):
            raise ShapeError(f"report length {r.shape} != {p}")
        total += r
    return mech.reconstruction @ total


def expected_total_sq_error(mech: MatrixMechanism, n: int) -> float:
    """2n * Trace[B^T B diag(s^2)]."""
    b = mech.reconstruction
    col_norms = np.einsum("ij,ij->j", b, b)
    return 2.0 * n * float(col_norms @ (mech.scales**2))


# ---------------------------------------------------------------------------
# All-ranges workload and the prefix strategy (1-dim range queries).


def range_workload(m: int) -> np.ndarray:
    """W_m: one row per interval [l, r], lexicographic in (l, r)."""
    if not (1 <= m <= MAX_DOMAIN):
        raise DomainError(f"domain size {m} outside [1, {MAX_DOMAIN}]")
    rows = []
    for l in range(1, m + 1):
        for r in range(l, m + 1):
            row = np.zeros(m)
            row[l - 1 : r] = 1.0
            rows.append(row)
    return np.array(rows)


def prefix_strategy(m: int):
    """(W_m, L_m, B) with W_m = B @ L_m.

    L_m is the lower-triangular ones matrix (row k answers prefix [1, k]);
    each range [l, r] is reconstructed as prefix(r) - prefix(l-1).
    """
    w = range_workload(m)
    lower = np.tril(np.ones((m, m)))
    b = np.zeros((w.shape[0], m))
    q = 0
    for l in range(1, m + 1):
        for r in range(l, m + 1):
            b[q, r - 1] = 1.0
            if l >= 2:
                b[q, l - 2] = -1.0
            q += 1
    return w, lower, b


def optimal_prefix_scales(epsilon: float, m: int) -> np.ndarray:
    """Closed-form optimum for the prefix strategy under the scaled-L1 metric:
    s_k = 1/epsilon for k < m and s_m = 0 (the full prefix is input-independent)."""
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    s = np.full(m, 1.0 / epsilon)
    s[m - 1] = 0.0
    return s


def prefix_mechanism(epsilon: float, m: int) -> MatrixMechanism:
    _, lower, b = prefix_strategy(m)
    return MatrixMechanism(lower, b, optimal_prefix_scales(epsilon, m))


def frequency_mechanism(scales) -> MatrixMechanism:
    """Identity workload: A = B = I_m with the given per-value scales."""
    scales = np.asarray(scales, dtype=float)
    m = len(scales)
    eye = np.eye(m)
    return MatrixMechanism(eye, eye, scales)


# ---------------------------------------------------------------------------
# Frequency-scale optimization: minimize 2n sum s_x^2 subject to
# 1/s_x + 1/s_x' <= E(x, x').


@dataclass(frozen=True)
class FrequencyScales:
    scales: np.ndarray
    objective_per_n: float  # 2 * sum s_x^2


def _golden_section(f, lo: float, hi: float, iters: int = 200) -> float:
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def _optimize_super_sensitive(metric: Metric, m: int) -> FrequencyScales:
    # Orbit symmetry: one rate a = 1/s for values in S, one rate b for the rest.
    eps = metric.epsilon
    sens = {v for v in metric.params["S"] if 1 <= v <= m}
    k = len(sens)
    if k == m:
        s_in, s_out = 2.0 / eps, 0.0
    elif k == 0:
        s_in, s_out = 0.0, 1.0 / eps
    else:
        # Active boundary: a + b = eps (mixed pairs); in-in pairs cap a at eps/2.
        hi = eps / 2.0 if k >= 2 else eps * (1.0 - 1e-9)
        lo = eps * 1e-9

        def objective(a):
            b = eps - a
            return k / (a * a) + (m - k) / (b * b)

        a_star = _golden_section(objective, lo, hi)
        # Polish with the stationarity condition a/(eps-a) = (k/(m-k))^(1/3),
        # clamped to the in-in cap; golden section alone is within ~1e-12.
        ratio = (k / (m - k)) ** (1.0 / 3.0)
        a_closed = eps * ratio / (1.0 + ratio)
        if k >= 2:
            a_closed = min(a_closed, eps / 2.0)
        if objective(a_closed) <= objective(a_star):
            a_star = a_closed
        s_in, s_out = 1.0 / a_star, 1.0 / (eps - a_star)
    scales = np.array([s_in if x in sens else s_out for x in range(1, m + 1)])
    return FrequencyScales(scales, 2.0 * float(np.sum(scales**2)))


def _optimize_general(pairwise: np.ndarray, m: int) -> FrequencyScales:
    from scipy.optimize import minimize

    # Variables are rates t = 1/s; objective sum 1/t^2 is convex, constraints
    # t_i + t_j <= E(i, j) are linear.
    t0 = np.array([pairwise[i][np.arange(m) != i].min() / 2.0 for i in range(m)])
    cons = []
    for i in range(m):
        for j in range(i + 1, m):
            cons.append(
                {
                    "type": "ineq",
                    "fun": lambda t, i=i, j=j: pairwise[i, j] - t[i] - t[j],
                }
            )
    floor = t0.min() * 1e-6
    res = minimize(
        lambda t: float(np.sum(1.0 / t**2)),
        t0,
        jac=lambda t: -2.0 / t**3,
        bounds=[(floor, None)] * m,
        constraints=cons,
        method="SLSQP",
        options={"maxiter": 500, "ftol": 1e-14},
    )
    t = np.maximum(res.x, floor)
    # Feasibility projection: shrink all rates by the worst violation ratio.
    worst = max(
        (t[i] + t[j]) / pairwise[i, j] for i in range(m) for j in range(i + 1, m)
    )
    if worst > 1.0:
        t = t / worst
    scales = 1.0 / t
    return FrequencyScales(scales, 2.0 * float(np.sum(scales**2)))


def optimize_frequency_scales(metric: Metric, m: int) -> FrequencyScales:
    """Optimal Laplace scales for the identity workload (A = B = I_m)."""
    if not (1 <= m <= MAX_DOMAIN):
        raise DomainError(f"domain size {m} outside [1, {MAX_DOMAIN}]")
    if m == 1:
        return FrequencyScales(np.zeros(1), 0.0)
    pairwise = np.array(
        [[eval_metric(metric, x, y) for y in range(1, m + 1)] for x in range(1, m + 1)]
    )
    off = pairwise[~np.eye(m, dtype=bool)]
    if np.any(off <= 0):
        raise InfeasibleError("some distinct pair has E(x, x') = 0")
    if metric.kind == "super_sensitive":
        return _optimize_super_sensitive(metric, m)
    return _optimize_general(pairwise, m)


# ---------------------------------------------------------------------------
# Serialization.


def mechanism_to_json(mech: MatrixMechanism) -> str:
    return json.dumps(
        {
            "A": mech.strategy.tolist(),
            "B": mech.reconstruction.tolist(),
            "s": mech.scales.tolist(),
        }
    )


def mechanism_from_json(text: str) -> MatrixMechanism:
    raw = json.loads(text)
    return MatrixMechanism(
        np.array(raw["A"], dtype=float),
        np.array(raw["B"], dtype=float),
        np.array(raw["s"], dtype=float),
    )


def write_reports_csv(path, reports) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["owner_id", "k", "value"])
        for owner, report in enumerate(reports, start=1):
            for k, value in enumerate(report, start=1):
                writer.writerow([owner, k, repr(float(value))])


def read_reports_csv(path) -> np.ndarray:
    rows: dict[int, dict[int, float]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            rows.setdefault(int(rec["owner_id"]), {})[int(rec["k"])] = float(
                rec["value"]
            )
    if not rows:
        return np.zeros((0, 0))
    p = max(max(cols) for cols in rows.values())
    out = np.zeros((len(rows), p))
    for i, owner in enumerate(sorted(rows)):
        for k, value in rows[owner].items():
            out[i, k - 1] = value
    return out
