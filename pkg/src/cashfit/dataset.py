"""Binned Poisson count data with non-uniform bins and gaps.

A dataset is a sorted sequence of bins ``[x_lo, x_hi)`` carrying integer
counts. Consecutive bins are either contiguous or separated by a gap, an
interval that holds no data and is excluded from the model integral. Bins
and gaps together tile the range ``[x_A, x_B]``.

All scalars that the fitting formulas need (total counts, range, gap
moments) are computed once at construction.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import (
    DatasetError,
    GapBinOverlap,
    NegativeWidth,
    NonIntegerCount,
    OverlappingBins,
    TilingError,
)

__all__ = [
    "AUTO",
    "Bin",
    "Gap",
    "BinnedDataset",
    "build_dataset",
    "from_edges",
    "uniform_dataset",
    "nonzero_bins",
]

AUTO: Literal["auto"] = "auto"

#: Relative tolerance (times the range) below which two edges coincide.
CONTIGUITY_RTOL = 1e-9


@dataclass(frozen=True)
class Bin:
    x_lo: float
    x_hi: float
    count: int

    @property
    def center(self) -> float:
        return 0.5 * (self.x_lo + self.x_hi)

    @property
    def width(self) -> float:
        return self.x_hi - self.x_lo


@dataclass(frozen=True)
class Gap:
    x_a: float
    x_b: float

    @property
    def length(self) -> float:
        return self.x_b - self.x_a

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.x_a + self.x_b)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BinnedDataset:
    """Validated, immutable binned dataset.

    Use :func:`build_dataset` rather than calling this constructor directly.

    Attributes
    ----------
    x_lo, x_hi, counts : ndarray
        Bin edges and integer counts, sorted by ``x_lo``.
    gaps : tuple of Gap
        Excluded intervals, sorted.
    x_A, x_B : float
        Start and end of the range.
    """

    x_lo: np.ndarray
    x_hi: np.ndarray
    counts: np.ndarray
    gaps: tuple[Gap, ...]
    x_A: float
    x_B: float
    centers: np.ndarray = field(init=False)
    widths: np.ndarray = field(init=False)
    offsets: np.ndarray = field(init=False)
    N: int = field(init=False)
    M: int = field(init=False)
    n: int = field(init=False)
    R: float = field(init=False)
    R_G: float = field(init=False)
    S_G: float = field(init=False)
    R_m: float = field(init=False)
    S_A2: float = field(init=False)
    S_B: float = field(init=False)

    def __post_init__(self) -> None:
        put = object.__setattr__
        centers = 0.5 * (self.x_lo + self.x_hi)
        put(self, "centers", _readonly(centers))
        put(self, "widths", _readonly(self.x_hi - self.x_lo))
        put(self, "offsets", _readonly(centers - self.x_A))
        put(self, "N", int(self.counts.size))
        put(self, "M", int(self.counts.sum()))
        put(self, "n", int(np.count_nonzero(self.counts)))

        R = float(self.x_B - self.x_A)
        lengths = [g.length for g in self.gaps]
        R_G = float(sum(lengths))
        S_G = float(sum(L * (g.midpoint - self.x_A) for L, g in zip(lengths, self.gaps)))
        S_A2 = float(sum(g.x_b**2 - g.x_a**2 for g in self.gaps))
        S_B = float(sum((L / R) * (self.x_B - g.midpoint) for L, g in zip(lengths, self.gaps)))
        if R_G == 0.0 and S_G == 0.0:
            R_m = R
        else:
            R_m = (R * R - 2.0 * S_G) / (R - R_G)
        put(self, "R", R)
        put(self, "R_G", R_G)
        put(self, "S_G", S_G)
        put(self, "R_m", R_m)
        put(self, "S_A2", S_A2)
        put(self, "S_B", S_B)

    @property
    def bins(self) -> tuple[Bin, ...]:
        return tuple(
            Bin(float(lo), float(hi), int(c))
            for lo, hi, c in zip(self.x_lo, self.x_hi, self.counts)
        )

    @property
    def covered_length(self) -> float:
        """Total width of all bins, ``R - R_G``."""
        return self.R - self.R_G

    def summary(self) -> dict:
        return {
            "N": self.N,
            "M": self.M,
            "n": self.n,
            "R": self.R,
            "R_G": self.R_G,
            "R_m": self.R_m,
            "S_G": self.S_G,
            "S_B": self.S_B,
            "x_A": self.x_A,
            "x_B": self.x_B,
            "gaps": [[g.x_a, g.x_b] for g in self.gaps],
        }

    def __repr__(self) -> str:
        return (
            f"BinnedDataset(N={self.N}, M={self.M}, n={self.n}, "
            f"range=[{self.x_A}, {self.x_B}], gaps={len(self.gaps)})"
        )


def _as_count(value, index: int) -> int:
    if isinstance(value, bool):
        raise NonIntegerCount(f"count must be an integer, got {value!r}", index)
    if isinstance(value, numbers.Integral):
        c = int(value)
    elif isinstance(value, numbers.Real) and float(value).is_integer():
        c = int(value)
    else:
        raise NonIntegerCount(f"count must be an integer, got {value!r}", index)
    if c < 0:
        raise NonIntegerCount(f"count must be non-negative, got {c}", index)
    return c


def build_dataset(
    bins: Sequence[Bin],
    gaps: Sequence[Gap] | Literal["auto"] = AUTO,
    x_range: tuple[float, float] | None = None,
) -> BinnedDataset:
    """Validate bins and gaps and return a :class:`BinnedDataset`.

    Parameters
    ----------
    bins : sequence of Bin
        Bins sorted by lower edge.
    gaps : sequence of Gap or ``AUTO``
        With ``AUTO`` every void between non-contiguous consecutive bins
        becomes a gap. An explicit list must cover each void exactly;
        zero-length gaps are accepted and have no effect.
    x_range : (x_A, x_B), optional
        Must coincide with the outer bin edges if given.
    """
    bins = list(bins)
    if not bins:
        raise DatasetError("dataset needs at least one bin")

    lo = np.array([float(b.x_lo) for b in bins])
    hi = np.array([float(b.x_hi) for b in bins])
    counts = np.array([_as_count(b.count, i) for i, b in enumerate(bins)], dtype=np.int64)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        bad = int(np.flatnonzero(~(np.isfinite(lo) & np.isfinite(hi)))[0])
        raise DatasetError("bin edges must be finite", bad)
    for i in range(len(bins)):
        if not hi[i] > lo[i]:
            raise NegativeWidth(f"bin width must be positive, got [{lo[i]}, {hi[i]}]", i)

    x_A, x_B = float(lo[0]), float(hi[-1])
    R = x_B - x_A
    tol = CONTIGUITY_RTOL * R

    for i in range(1, len(bins)):
        if lo[i] < lo[i - 1]:
            raise DatasetError("bins must be sorted by x_lo", i)
        if lo[i] < hi[i - 1] - tol:
            raise OverlappingBins(
                f"bin [{lo[i]}, {hi[i]}] overlaps previous bin ending at {hi[i - 1]}", i
            )
    # snap near-contiguous edges so the tiling is exact
    for i in range(1, len(bins)):
        if abs(lo[i] - hi[i - 1]) <= tol:
            lo[i] = hi[i - 1]

    voids = [
        (float(hi[i - 1]), float(lo[i]))
        for i in range(1, len(bins))
        if lo[i] - hi[i - 1] > tol
    ]

    if isinstance(gaps, str):
        if gaps != AUTO:
            raise ValueError(f"gaps must be a sequence of Gap or {AUTO!r}")
        gap_list = [Gap(a, b) for a, b in voids]
    else:
        gap_list = _match_gaps(list(gaps), voids, lo, hi, x_A, x_B, tol)

    if x_range is not None:
        xa, xb = float(x_range[0]), float(x_range[1])
        if abs(xa - x_A) > tol or abs(xb - x_B) > tol:
            raise TilingError(
                f"range [{xa}, {xb}] does not match the bin tiling [{x_A}, {x_B}]"
            )

    return BinnedDataset(
        x_lo=_readonly(lo),
        x_hi=_readonly(hi),
        counts=_readonly(counts),
        gaps=tuple(gap_list),
        x_A=x_A,
        x_B=x_B,
    )


def _match_gaps(gaps, voids, lo, hi, x_A, x_B, tol) -> list[Gap]:
    order = sorted(range(len(gaps)), key=lambda j: (float(gaps[j].x_a), float(gaps[j].x_b)))
    for j in order:
        g = gaps[j]
        if not (np.isfinite(g.x_a) and np.isfinite(g.x_b)):
            raise DatasetError("gap edges must be finite", j)
        if g.x_b < g.x_a:
            raise NegativeWidth(f"gap [{g.x_a}, {g.x_b}] has negative length", j)
        if g.x_a < x_A - tol or g.x_b > x_B + tol:
            raise TilingError(f"gap [{g.x_a}, {g.x_b}] lies outside [{x_A}, {x_B}]", j)
        overlap = np.minimum(hi, g.x_b) - np.maximum(lo, g.x_a)
        if np.any(overlap > tol):
            raise GapBinOverlap(f"gap [{g.x_a}, {g.x_b}] overlaps bin {int(np.argmax(overlap))}", j)
    for prev, cur in zip(order, order[1:]):
        if gaps[cur].x_a < gaps[prev].x_b - tol:
            raise TilingError("gaps overlap each other", cur)

    matched: list[Gap] = []
    used = set()
    for a, b in voids:
        hit = [
            j for j in order
            if j not in used and abs(gaps[j].x_a - a) <= tol and abs(gaps[j].x_b - b) <= tol
        ]
        if not hit:
            raise TilingError(f"void [{a}, {b}] between bins is not covered by exactly one gap")
        used.add(hit[0])
        matched.append(Gap(a, b))
    for j in order:
        if j in used:
            continue
        g = gaps[j]
        if g.x_b - g.x_a > tol:
            # a nonzero gap that overlaps no bin but matches no void only partially covers one
            raise TilingError(f"gap [{g.x_a}, {g.x_b}] does not exactly cover a void", j)
        matched.append(Gap(float(g.x_a), float(g.x_a)))
    matched.sort(key=lambda g: (g.x_a, g.x_b))
    return matched


def from_edges(
    edges: Sequence[tuple[float, float]] | np.ndarray,
    counts: Sequence[int] | np.ndarray,
    gaps: Sequence[Gap] | Literal["auto"] = AUTO,
) -> BinnedDataset:
    """Build a dataset from ``(x_lo, x_hi)`` pairs and matching counts."""
    edges = list(edges)
    counts = list(counts)
    if len(edges) != len(counts):
        raise DatasetError(f"{len(edges)} bins but {len(counts)} counts")
    return build_dataset([Bin(lo, hi, c) for (lo, hi), c in zip(edges, counts)], gaps)


def uniform_dataset(
    counts: Sequence[int] | np.ndarray, x_range: tuple[float, float] | None = None
) -> BinnedDataset:
    """Equal-width contiguous bins over ``x_range`` (default: unit bins from 0)."""
    counts = np.asarray(counts)
    N = counts.size
    x_A, x_B = (0.0, float(N)) if x_range is None else x_range
    e = np.linspace(x_A, x_B, N + 1)
    return from_edges(zip(e[:-1], e[1:]), counts.tolist(), gaps=())


def nonzero_bins(ds: BinnedDataset) -> list[tuple[float, int]]:
    """``(x_center - x_A, count)`` for every bin with a positive count."""
    idx = np.flatnonzero(ds.counts)
    return [(float(ds.offsets[i]), int(ds.counts[i])) for i in idx]
