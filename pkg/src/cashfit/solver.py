"""Semi-analytical maximum-likelihood fit of the linear model.

The model density is ``f(x) = lam * (1 + a (x - x_A))``. Eliminating ``lam``
from the likelihood equations leaves a single equation ``F(a) = 0`` with

    g(a) = sum_i y_i d_i / (1 + a d_i),        d_i = x_i - x_A
    F(a) = 1 + (R_m / 2) * (a - M / g(a))

Over the non-empty bins, ``g`` has poles at ``-1/d_i`` and one zero between
each consecutive pair of poles. The zeros of ``g`` are the poles of ``F``,
and ``F`` decreases between its poles. So ``F`` has ``n - 1`` zeros: one
between each pair of its poles and one "external" zero beyond the outermost
pole, on the side given by the sign of ``F(+-inf)``. Only the external zero
can give a non-negative model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .cash import cash_standard, poisson_means_standard
from .dataset import BinnedDataset
from .errors import (
    BracketFailure,
    DegenerateAsymptote,
    EmptyData,
    EvaluationAtSingularity,
    InsufficientData,
    SingularDenominator,
)

__all__ = [
    "FZero",
    "SolverDiagnostics",
    "StandardFit",
    "NoAcceptableSolution",
    "g",
    "F",
    "F_infinity",
    "g_singularities",
    "find_g_zeros",
    "find_F_zeros",
    "lambda_of_a",
    "acceptability_interval",
    "classify_acceptability",
    "fit_standard",
]

SINGULAR_RTOL = 1e-13
FINF_TOL = 1e-12
# roots this close (relative) to an acceptability edge are taken to lie on it
EDGE_RTOL = 1e-12
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class FZero:
    a: float
    acceptable: bool
    external: bool


@dataclass(frozen=True)
class SolverDiagnostics:
    g_singularities: tuple[float, ...]
    F_singularities: tuple[float, ...]
    F_infinity: float | None
    F_zeros: tuple[FZero, ...]
    acceptability_interval: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "g_singularities": list(self.g_singularities),
            "F_singularities": list(self.F_singularities),
            "F_infinity": self.F_infinity,
            "F_zeros": [
                {"a": z.a, "acceptable": z.acceptable, "external": z.external}
                for z in self.F_zeros
            ],
            "acceptability_interval": list(self.acceptability_interval),
        }


@dataclass(frozen=True)
class StandardFit:
    """Acceptable best fit of ``f(x) = lam * (1 + a (x - x_A))``."""

    a: float
    lam: float
    c_min: float
    diagnostics: SolverDiagnostics = field(repr=False)

    acceptable = True

    def means(self, ds: BinnedDataset) -> np.ndarray:
        return poisson_means_standard(ds, self.a, self.lam)


@dataclass(frozen=True)
class NoAcceptableSolution:
    """The standard model has no non-negative maximum-likelihood solution.

    ``a`` and ``lam`` hold the rejected external zero when one was found.
    """

    reason: str
    diagnostics: SolverDiagnostics = field(repr=False)
    a: float | None = None
    lam: float | None = None

    acceptable = False


# ---------------------------------------------------------------------------
# g, F and their building blocks


def _nonzero(ds: BinnedDataset) -> tuple[np.ndarray, np.ndarray]:
    pos = ds.counts > 0
    return ds.offsets[pos], ds.counts[pos].astype(float)


def g_singularities(ds: BinnedDataset) -> np.ndarray:
    """Poles ``-1/d_j`` of g, one per non-empty bin, ascending."""
    d, _ = _nonzero(ds)
    return -1.0 / d


def _check_not_singular(ds: BinnedDataset, a: np.ndarray) -> None:
    s = g_singularities(ds)
    if s.size == 0:
        return
    close = np.abs(a[..., None] - s) <= SINGULAR_RTOL * np.abs(s)
    if np.any(close):
        bad = a[np.any(close, axis=-1)].ravel()[0]
        raise EvaluationAtSingularity(f"g is singular at a={bad!r}")


def _g_raw(d, y, a):
    with np.errstate(divide="ignore", invalid="ignore"):
        t = 1.0 + np.multiply.outer(a, d)
        return np.sum(y * d / t, axis=-1)


def _g_and_slope(d, y, a):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        t = 1.0 + np.multiply.outer(a, d)
        z = d / t
        return np.sum(y * z, axis=-1), -np.sum(y * z * z, axis=-1)


def _F_raw(ds: BinnedDataset, a):
    """F without singularity checks.

    At an exact pole of g this returns the finite limit ``1 + a R_m / 2``.
    """
    d, y = _nonzero(ds)
    gv = _g_raw(d, y, a)
    with np.errstate(divide="ignore", invalid="ignore"):
        return 1.0 + 0.5 * ds.R_m * (a - ds.M / gv)


def _F_and_slope(ds: BinnedDataset, a):
    d, y = _nonzero(ds)
    gv, gp = _g_and_slope(d, y, a)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        f = 1.0 + 0.5 * ds.R_m * (a - ds.M / gv)
        fp = 0.5 * ds.R_m * (1.0 + ds.M * gp / (gv * gv))
    return f, fp


def _scalar_or_array(value, like):
    return float(value) if np.ndim(like) == 0 else value


def g(ds: BinnedDataset, a):
    """``sum y_i d_i / (1 + a d_i)`` over non-empty bins. Accepts arrays."""
    arr = np.asarray(a, dtype=float)
    _check_not_singular(ds, arr)
    d, y = _nonzero(ds)
    return _scalar_or_array(_g_raw(d, y, arr), a)


def F(ds: BinnedDataset, a):
    """``1 + (R_m/2) (a - M/g(a))``. Raises at poles of g or F. Accepts arrays."""
    arr = np.asarray(a, dtype=float)
    _check_not_singular(ds, arr)
    d, y = _nonzero(ds)
    gv = _g_raw(d, y, arr)
    if np.any(gv == 0):
        raise EvaluationAtSingularity("F is singular where g(a) = 0")
    return _scalar_or_array(1.0 + 0.5 * ds.R_m * (arr - ds.M / gv), a)


def F_infinity(ds: BinnedDataset) -> float:
    """Common limit of F at both infinities."""
    if ds.M == 0:
        raise EmptyData("F_infinity needs at least one count")
    d, y = _nonzero(ds)
    return float(1.0 - 0.5 * ds.R_m * np.sum(y / d) / ds.M)


def lambda_of_a(ds: BinnedDataset, a: float) -> float:
    """Normalization that maximizes the likelihood at fixed slope ``a``."""
    den = ds.R * (1.0 + a * ds.R / 2.0) - (ds.R_G + a * ds.S_G)
    # below this the sign of the denominator is rounding noise
    noise = 8 * _EPS * (ds.R + abs(a) * ds.R * ds.R / 2.0 + ds.R_G + abs(a * ds.S_G))
    if abs(den) <= noise:
        raise SingularDenominator(f"lambda(a) is singular at a={a!r}")
    return ds.M / den


def acceptability_interval(ds: BinnedDataset) -> tuple[float, float]:
    """Open interval of slopes that make some bin mean negative."""
    return -2.0 / float(ds.widths[0]), -1.0 / (ds.R - float(ds.widths[-1]) / 2.0)


def classify_acceptability(ds: BinnedDataset, a: float) -> bool:
    lo, hi = acceptability_interval(ds)
    return bool(a < lo or a >= hi)


# ---------------------------------------------------------------------------
# root isolation


def _solve_decreasing(fun, lo, hi, maxiter=200):
    """Vectorized safeguarded Newton for functions decreasing on (lo, hi).

    Each function must be positive near ``lo`` and negative near ``hi``.
    The endpoints may be poles and are never evaluated. A Newton step is
    taken only if it stays inside the current bracket and at least halves
    the previous step, otherwise the bracket is bisected.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    x = 0.5 * (lo + hi)
    step_old = hi - lo
    done = np.zeros(x.shape, dtype=bool)
    for _ in range(maxiter):
        f, fp = fun(x)
        live = ~done
        lo = np.where(live & (f > 0), x, lo)
        hi = np.where(live & (f < 0), x, hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f / fp
        # a Newton correction below rounding means x is already the root
        conv = (f == 0) | (np.abs(step) <= 2 * _EPS * np.abs(x))
        newton = x - step
        ok = (
            np.isfinite(newton)
            & (newton > lo)
            & (newton < hi)
            & (np.abs(step) <= 0.5 * np.abs(step_old))
        )
        x_new = np.where(ok, newton, 0.5 * (lo + hi))
        step_old = np.where(ok, step, 0.5 * (hi - lo))
        scale = np.maximum(np.abs(lo), np.abs(hi))
        tight = (np.abs(x_new - x) <= 2 * _EPS * np.abs(x_new)) | (hi - lo <= 4 * _EPS * scale)
        x = np.where(live & ~conv, x_new, x)
        done |= live & (conv | tight)
        if done.all():
            break
    else:  # pragma: no cover - bisection alone converges in ~1100 steps worst case
        raise BracketFailure("bracketed Newton iteration did not converge")
    return x


def find_g_zeros(ds: BinnedDataset) -> np.ndarray:
    """The ``n - 1`` zeros of g, one between each pair of its poles."""
    if ds.n < 2:
        raise InsufficientData(f"g has no zeros with n={ds.n} non-empty bins")
    d, y = _nonzero(ds)
    poles = -1.0 / d
    return _solve_decreasing(lambda a: _g_and_slope(d, y, a), poles[:-1], poles[1:])


def _internal_F_zeros(ds: BinnedDataset, s: np.ndarray) -> np.ndarray:
    if s.size < 2:
        return np.empty(0)
    return _solve_decreasing(lambda a: _F_and_slope(ds, a), s[:-1], s[1:])


def _near_pole(fun, pole: float, direction: int, gap: float, want: float) -> float:
    """A point beside ``pole`` (on the side ``direction``) where fun has sign ``want``."""
    eps0 = max(1e-12, 1e-9 * gap, 8 * np.spacing(abs(pole)))
    candidates = [eps0 * 2.0**-k for k in range(60)] + [eps0 * 2.0**k for k in range(1, 60)]
    for eps in candidates:
        if eps >= gap:
            continue
        p = pole + direction * eps
        if p == pole:
            continue
        v = fun(p)
        if np.isfinite(v) and np.sign(v) == want:
            return p
    raise BracketFailure(f"no sign-correct endpoint next to pole {pole!r}")


def _external_zero(ds: BinnedDataset, poles: np.ndarray, s: np.ndarray, finf: float) -> float:
    fun = lambda a: float(_F_raw(ds, a))  # noqa: E731
    span = float(poles[-1] - poles[0])
    if finf > 0:
        edge, direction, gap = float(s[0]), -1, float(s[0] - poles[0])
    else:
        edge, direction, gap = float(s[-1]), 1, float(poles[-1] - s[-1])
    # F -> -inf left of its pole and +inf right of it
    near = _near_pole(fun, edge, direction, gap, want=direction)
    reach = span
    far = edge + direction * reach
    while np.sign(fun(far)) != np.sign(finf):
        reach *= 2.0
        far = edge + direction * reach
        if not math.isfinite(far):
            raise BracketFailure("external zero bracket expansion overflowed")
    lo, hi = sorted((near, far))
    xtol = 1e-15 * max(span, abs(edge))
    return float(brentq(fun, lo, hi, xtol=xtol, rtol=4 * _EPS, maxiter=500))


def find_F_zeros(ds: BinnedDataset) -> list[FZero]:
    """All ``n - 1`` zeros of F, ascending, labelled external/acceptable."""
    if ds.n < 2:
        raise InsufficientData(f"F has no zeros with n={ds.n} non-empty bins")
    finf = F_infinity(ds)
    if abs(finf) <= FINF_TOL:
        raise DegenerateAsymptote(f"F_infinity={finf!r} is zero within tolerance")
    poles = g_singularities(ds)
    s = find_g_zeros(ds)
    a = _snap_to_edge(_external_zero(ds, poles, s, finf), acceptability_interval(ds))
    return _label_zeros(ds, _internal_F_zeros(ds, s), a, finf)


def _label_zeros(ds, internal, external, finf) -> list[FZero]:
    zeros = [FZero(float(a), classify_acceptability(ds, float(a)), False) for a in internal]
    ext = FZero(external, classify_acceptability(ds, external), True)
    return [ext] + zeros if finf > 0 else zeros + [ext]


# ---------------------------------------------------------------------------
# the fit


def _snap_to_edge(a: float, interval: tuple[float, float]) -> float:
    # A fit whose line vanishes exactly at the first or last bin centre has its
    # root on an edge, and rounding can leave it on either side. Snapping lets
    # the boundary convention (left edge excluded, right edge included) decide.
    for edge in interval:
        if abs(a - edge) <= EDGE_RTOL * abs(edge):
            return edge
    return a


def fit_standard(ds: BinnedDataset, internal_zeros: bool = False) -> StandardFit | NoAcceptableSolution:
    """Best fit of the two-parameter linear model, if it is non-negative.

    Parameters
    ----------
    ds : BinnedDataset
    internal_zeros : bool
        Also locate the ``n - 2`` zeros of F between its poles. They are
        never acceptable and only feed the diagnostics.

    Returns
    -------
    StandardFit or NoAcceptableSolution
    """
    interval = acceptability_interval(ds)
    poles = g_singularities(ds)
    finf = F_infinity(ds) if ds.M > 0 else None

    def diag(s=(), zeros=()):
        return SolverDiagnostics(
            g_singularities=tuple(float(p) for p in poles),
            F_singularities=tuple(float(v) for v in s),
            F_infinity=finf,
            F_zeros=tuple(zeros),
            acceptability_interval=interval,
        )

    if ds.n <= 1:
        return NoAcceptableSolution(f"n={ds.n} non-empty bins cannot constrain two parameters", diag())

    s = find_g_zeros(ds)
    internal = _internal_F_zeros(ds, s) if internal_zeros else np.empty(0)
    if abs(finf) <= FINF_TOL:
        zeros = [FZero(float(a), classify_acceptability(ds, float(a)), False) for a in internal]
        return NoAcceptableSolution("F_infinity vanishes; no external zero", diag(s, zeros))

    a = _snap_to_edge(_external_zero(ds, poles, s, finf), interval)
    zeros = _label_zeros(ds, internal, a, finf)
    if not classify_acceptability(ds, a):
        try:
            lam = lambda_of_a(ds, a)
        except SingularDenominator:
            # a bin with counts centred at R_m/2 puts the zero at -2/R_m, where
            # the model integrates to zero and lam diverges; always unacceptable
            lam = None
        return NoAcceptableSolution(
            "external zero lies inside the unacceptable interval", diag(s, zeros), a=a, lam=lam
        )
    lam = lambda_of_a(ds, a)
    return StandardFit(a=a, lam=lam, c_min=cash_standard(ds, a, lam), diagnostics=diag(s, zeros))
