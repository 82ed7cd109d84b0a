"""Non-negative extension of the linear model.

When the two-parameter line has no acceptable solution, the data are fit by
the best of three one-parameter lines that are non-negative by construction:

* ``PivotA``:   ``f(x) = lam * (x - x_A)``        (zero at the range start)
* ``PivotB``:   ``f(x) = lam * (1 - (x - x_A)/R)`` (zero at the range end)
* ``Constant``: ``f(x) = lam``

Each has a closed-form maximum-likelihood ``lam``. Its Cash value is
evaluated bin by bin from the means.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .cash import cash_from_means, poisson_means_standard
from .dataset import BinnedDataset
from .errors import EmptyData
from .solver import NoAcceptableSolution, StandardFit, fit_standard

__all__ = [
    "ModelKind",
    "Fallback",
    "ExtendedFit",
    "fit_pivot_a",
    "fit_pivot_b",
    "fit_constant",
    "fallback_means",
    "fit_extended",
]

TIE_TOL = 1e-12


class ModelKind(str, enum.Enum):
    STANDARD = "Standard"
    PIVOT_A = "PivotA"
    PIVOT_B = "PivotB"
    CONSTANT = "Constant"
    DEGENERATE_EMPTY = "DegenerateEmpty"

    def __str__(self) -> str:
        return self.value


class Fallback(NamedTuple):
    kind: ModelKind
    lam: float
    c: float


def fallback_means(ds: BinnedDataset, kind: ModelKind, lam: float) -> np.ndarray:
    """Bin means of a one-parameter model."""
    if kind is ModelKind.PIVOT_A:
        return lam * ds.offsets * ds.widths
    if kind is ModelKind.PIVOT_B:
        return lam * (1.0 - ds.offsets / ds.R) * ds.widths
    if kind in (ModelKind.CONSTANT, ModelKind.DEGENERATE_EMPTY):
        return lam * ds.widths
    raise ValueError(f"{kind} is not a one-parameter model")


def _fallback(ds: BinnedDataset, kind: ModelKind, lam: float) -> Fallback:
    c, _ = cash_from_means(ds, fallback_means(ds, kind, lam))
    return Fallback(kind, float(lam), c)


def fit_pivot_a(ds: BinnedDataset) -> Fallback:
    """Line through zero at ``x_A``: ``lam = 2M / (R^2 - 2 S_G)``."""
    if ds.M == 0:
        raise EmptyData("pivoted model needs at least one count")
    return _fallback(ds, ModelKind.PIVOT_A, 2.0 * ds.M / (ds.R * ds.R - 2.0 * ds.S_G))


def fit_pivot_b(ds: BinnedDataset) -> Fallback:
    """Line through zero at ``x_B``: ``lam = 2M / (R - 2 S_B)``."""
    if ds.M == 0:
        raise EmptyData("pivoted model needs at least one count")
    return _fallback(ds, ModelKind.PIVOT_B, 2.0 * ds.M / (ds.R - 2.0 * ds.S_B))


def fit_constant(ds: BinnedDataset) -> Fallback:
    """Constant density ``lam = M / (R - R_G)``; zero for empty data."""
    return _fallback(ds, ModelKind.CONSTANT, ds.M / (ds.R - ds.R_G))


@dataclass(frozen=True)
class ExtendedFit:
    """Unique non-negative best-fit line.

    ``a`` is set only for the standard model. ``alternatives`` lists the
    three one-parameter fits (empty when ``M == 0``).
    """

    kind: ModelKind
    lam: float
    c_min: float
    a: float | None = None
    alternatives: tuple[Fallback, ...] = ()
    standard: StandardFit | NoAcceptableSolution | None = field(default=None, repr=False)

    def means(self, ds: BinnedDataset) -> np.ndarray:
        if self.kind is ModelKind.STANDARD:
            return poisson_means_standard(ds, self.a, self.lam)
        return fallback_means(ds, self.kind, self.lam)

    def density(self, ds: BinnedDataset, x) -> np.ndarray:
        """Model density ``f(x)`` in counts per unit x."""
        u = np.asarray(x, dtype=float) - ds.x_A
        if self.kind is ModelKind.STANDARD:
            return self.lam * (1.0 + self.a * u)
        if self.kind is ModelKind.PIVOT_A:
            return self.lam * u
        if self.kind is ModelKind.PIVOT_B:
            return self.lam * (1.0 - u / ds.R)
        return self.lam * np.ones_like(u)


def fit_extended(ds: BinnedDataset, internal_zeros: bool = False) -> ExtendedFit:
    """Standard fit when acceptable, else the lowest-C one-parameter line.

    Ties within ``TIE_TOL`` go to PivotA, then PivotB, then Constant.
    """
    if ds.M == 0:
        return ExtendedFit(kind=ModelKind.DEGENERATE_EMPTY, lam=0.0, c_min=0.0)

    alternatives = (fit_pivot_a(ds), fit_pivot_b(ds), fit_constant(ds))
    std = fit_standard(ds, internal_zeros=internal_zeros)
    if isinstance(std, StandardFit):
        return ExtendedFit(
            kind=ModelKind.STANDARD,
            lam=std.lam,
            c_min=std.c_min,
            a=std.a,
            alternatives=alternatives,
            standard=std,
        )
    best = alternatives[0]
    for alt in alternatives[1:]:
        if alt.c < best.c - TIE_TOL:
            best = alt
    return ExtendedFit(
        kind=best.kind, lam=best.lam, c_min=best.c, alternatives=alternatives, standard=std
    )
