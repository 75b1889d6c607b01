"""Finite multi-dimensional value domains, flat indexing, and range queries."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

# Dense observation vectors above this many cells are refused.
DENSE_CELL_GATE = 2**24


@dataclass(frozen=True)
class DomainSpec:
    """A product domain [m_1] x ... x [m_D] of positive integer coordinates."""

    dims: tuple[int, ...]

    def __post_init__(self):
        if len(self.dims) == 0:
            raise DomainError("domain needs at least one dimension")
        if any(int(m) != m or m < 1 for m in self.dims):
            raise DomainError(f"dimension sizes must be positive integers, got {self.dims}")
        object.__setattr__(self, "dims", tuple(int(m) for m in self.dims))

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def total_size(self) -> int:
        return math.prod(self.dims)

    def contains(self, x) -> bool:
        x = as_point(x)
        return len(x) == self.ndim and all(1 <= v <= m for v, m in zip(x, self.dims))

    def require(self, x) -> tuple[int, ...]:
        x = as_point(x)
        if not self.contains(x):
            raise DomainError(f"value {x} outside domain {self.dims}")
        return x

    def points(self):
        """Iterate all domain values in flat-index order (dimension 1 fastest)."""
        idx = [1] * self.ndim
        for _ in range(self.total_size):
            yield tuple(idx)
            for d in range(self.ndim):
                if idx[d] < self.dims[d]:
                    idx[d] += 1
                    break
                idx[d] = 1

    def extended(self) -> "DomainSpec":
        """Domain with one dummy value appended to every dimension."""
        return DomainSpec(tuple(m + 1 for m in self.dims))


def as_point(x) -> tuple[int, ...]:
    """Normalize a scalar or sequence to a coordinate tuple."""
    if isinstance(x, (int,)):
        return (x,)
    try:
        return tuple(int(v) for v in x)
    except TypeError:
        raise DomainError(f"cannot interpret {x!r} as a domain value")


def flat_index(x, domain: DomainSpec) -> int:
    """1-based flat index of x: ind(x) = 1 + sum_d (prod_{j<d} m_j) (x[d]-1)."""
    x = domain.require(x)
    idx = 1
    stride = 1
    for v, m in zip(x, domain.dims):
        idx += stride * (v - 1)
        stride *= m
    return idx


def point_of_index(idx: int, domain: DomainSpec) -> tuple[int, ...]:
    """Inverse of flat_index (1-based both ways)."""
    if not (1 <= idx <= domain.total_size):
        raise DomainError(f"flat index {idx} outside [1, {domain.total_size}]")
    rem = idx - 1
    coords = []
    for m in domain.dims:
        coords.append(rem % m + 1)
        rem //= m
    return tuple(coords)


@dataclass(frozen=True)
class RangeQuery:
    """Per-dimension closed intervals [l_d, r_d], 1-based inclusive."""

    bounds: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "bounds", tuple((int(l), int(r)) for l, r in self.bounds)
        )
        for l, r in self.bounds:
            if l < 1 or r < l:
                raise DomainError(f"bad interval [{l}, {r}]")

    @property
    def ndim(self) -> int:
        return len(self.bounds)

    def validate(self, domain: DomainSpec) -> None:
        if self.ndim != domain.ndim:
            raise DomainError(
                f"query has {self.ndim} dimensions, domain has {domain.ndim}"
            )
        for (l, r), m in zip(self.bounds, domain.dims):
            if r > m:
                raise DomainError(f"interval [{l}, {r}] exceeds dimension size {m}")

    def nontrivial_count(self, domain: DomainSpec) -> int:
        """Number of dimensions whose interval is strictly inside [1, m_d]."""
        self.validate(domain)
        return sum(
            1 for (l, r), m in zip(self.bounds, domain.dims) if (l, r) != (1, m)
        )

    def contains(self, x) -> bool:
        x = as_point(x)
        return len(x) == self.ndim and all(
            l <= v <= r for v, (l, r) in zip(x, self.bounds)
        )

    def points(self):
        idx = [l for l, _ in self.bounds]
        total = math.prod(r - l + 1 for l, r in self.bounds)
        for _ in range(total):
            yield tuple(idx)
            for d, (l, r) in enumerate(self.bounds):
                if idx[d] < r:
                    idx[d] += 1
                    break
                idx[d] = l

    def product(self, other: "RangeQuery") -> "RangeQuery":
        return RangeQuery(self.bounds + other.bounds)


def parse_range(text: str) -> RangeQuery:
    """Parse "l1:r1,l2:r2,..." into a RangeQuery."""
    bounds = []
    for part in text.split(","):
        try:
            l, r = part.split(":")
            bounds.append((int(l), int(r)))
        except ValueError:
            raise DomainError(f"cannot parse range component {part!r}")
    return RangeQuery(tuple(bounds))
