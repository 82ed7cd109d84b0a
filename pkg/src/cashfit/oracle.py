"""Brute-force cross-checks for the solver.

Nothing here calls the solver or the closed-form Cash expressions. Grid
searches evaluate the Cash statistic bin by bin. Root counts come from
scanning for sign changes.
"""

from __future__ import annotations

from typing import Callable, NamedTuple, Sequence

import numpy as np

from .dataset import BinnedDataset
from .errors import CashFitError

__all__ = [
    "OracleResult",
    "Bracket",
    "as_grid",
    "grid_minimize_cash",
    "grid_minimize_nonnegative",
    "grid_minimize_fallbacks",
    "scan_sign_changes",
    "scan_root_counts",
]


class OracleResult(NamedTuple):
    a: float
    lam: float
    c: float
    kind: str


class Bracket(NamedTuple):
    lo: float
    hi: float
    direction: str  # "down" for + -> -, "up" for - -> +


def as_grid(grid) -> np.ndarray:
    """Accept an array or a ``(lo, hi, steps)`` triple."""
    if isinstance(grid, tuple) and len(grid) == 3:
        lo, hi, steps = grid
        return np.linspace(float(lo), float(hi), int(steps))
    return np.asarray(grid, dtype=float).ravel()


def _cash_batch(ds: BinnedDataset, mu_nz: np.ndarray, empty_sum: np.ndarray) -> np.ndarray:
    """Cash statistic for a batch of models.

    ``mu_nz`` holds the means of the non-empty bins (last axis) and
    ``empty_sum`` the summed means of the empty bins. Invalid models get inf.
    """
    y = ds.counts[ds.counts > 0].astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = 2.0 * (mu_nz - y + y * np.log(y / mu_nz))
    c = terms.sum(axis=-1) + 2.0 * empty_sum
    bad = np.any(~(mu_nz > 0), axis=-1) | (empty_sum < 0) | ~np.isfinite(c)
    return np.where(bad, np.inf, c)


def grid_minimize_cash(
    ds: BinnedDataset,
    a_grid,
    lambda_grid,
    include_fallbacks: bool = True,
    chunk: int = 256,
) -> OracleResult:
    """Grid argmin of the Cash statistic over non-negative linear models.

    Every ``(a, lam)`` pair of the product grid is evaluated with bin means
    ``lam (1 + a (x_i - x_A)) dx_i``; models with a negative mean are skipped.
    With ``include_fallbacks`` the three one-parameter families are also
    scanned: constant and pivot-at-B over ``|lambda_grid|``, pivot-at-A over
    ``|lambda_grid| * 2 / R``.
    """
    a_vals = as_grid(a_grid)
    l_vals = as_grid(lambda_grid)
    u = ds.centers - ds.x_A
    best = OracleResult(float("nan"), float("nan"), float("inf"), "none")

    for start in range(0, a_vals.size, chunk):
        a = a_vals[start:start + chunk]
        shape = (1.0 + a[:, None] * u)  # (A, N)
        mu = l_vals[None, :, None] * shape[:, None, :] * ds.widths  # (A, L, N)
        pos = ds.counts > 0
        ok = np.all(mu >= 0, axis=-1)
        c = _cash_batch(ds, mu[..., pos], mu[..., ~pos].sum(axis=-1))
        c = np.where(ok, c, np.inf)
        i, j = np.unravel_index(np.argmin(c), c.shape)
        if c[i, j] < best.c:
            best = OracleResult(float(a[i]), float(l_vals[j]), float(c[i, j]), "Standard")

    if include_fallbacks:
        lam = np.abs(l_vals)
        for r in grid_minimize_fallbacks(ds, lam, lam * 2.0 / (ds.x_B - ds.x_A), lam):
            if r.c < best.c:
                best = r
    return best


def grid_minimize_fallbacks(ds: BinnedDataset, lam_a, lam_b, lam_c) -> list[OracleResult]:
    """Best grid point of each one-parameter family, in PivotA, PivotB, Constant order."""
    R = ds.x_B - ds.x_A
    u = ds.centers - ds.x_A
    shapes = {
        "PivotA": (u, as_grid(lam_a)),
        "PivotB": (1.0 - u / R, as_grid(lam_b)),
        "Constant": (np.ones_like(u), as_grid(lam_c)),
    }
    pos = ds.counts > 0
    out = []
    for kind, (shape, lam) in shapes.items():
        mu = lam[:, None] * shape * ds.widths
        c = _cash_batch(ds, mu[:, pos], mu[:, ~pos].sum(axis=-1))
        k = int(np.argmin(c))
        out.append(OracleResult(float("nan"), float(lam[k]), float(c[k]), kind))
    return out


def grid_minimize_nonnegative(
    ds: BinnedDataset, steps: int = 400, f_max: float | None = None, refine: int = 3
) -> OracleResult:
    """Grid argmin over every non-negative line.

    A line is parameterized by its densities at the first and last bin
    centers, both on ``[0, f_max]``. This covers every linear model with
    non-negative means, including those the one-parameter fallbacks miss.
    Bin means are linear in the two densities and C is convex in the means,
    so after the coarse pass the grid is zoomed ``refine`` times onto a
    window of two cells around the best point.

    The result is reported as ``(a, lam)``; ``a`` is ``inf`` for a line
    through ``x_A``.
    """
    x1, xN = float(ds.centers[0]), float(ds.centers[-1])
    if f_max is None:
        f_max = 3.0 * float(np.max((ds.counts + 1.0) / ds.widths))
    pos = ds.counts > 0
    lo1 = loN = 0.0
    hi1 = hiN = f_max
    best = None
    for _ in range(refine + 1):
        g1, gN = np.linspace(lo1, hi1, steps), np.linspace(loN, hiN, steps)
        f1, fN = np.meshgrid(g1, gN, indexing="ij")
        slope = np.zeros_like(f1) if xN == x1 else (fN - f1) / (xN - x1)
        mu = (f1[..., None] + slope[..., None] * (ds.centers - x1)) * ds.widths
        c = _cash_batch(ds, mu[..., pos], mu[..., ~pos].sum(axis=-1))
        c = np.where(np.all(mu >= 0, axis=-1), c, np.inf)
        i, j = np.unravel_index(np.argmin(c), c.shape)
        if best is None or c[i, j] <= best[0]:
            best = (float(c[i, j]), float(f1[i, j]), float(slope[i, j]))
        h1, hN = 2.0 * (g1[1] - g1[0]), 2.0 * (gN[1] - gN[0])
        lo1, hi1 = max(0.0, f1[i, j] - h1), f1[i, j] + h1
        loN, hiN = max(0.0, fN[i, j] - hN), fN[i, j] + hN
    c_best, f1_best, slope_best = best
    lam = f1_best - slope_best * (x1 - ds.x_A)  # density at x_A
    a = slope_best / lam if lam != 0 else float("inf")
    return OracleResult(float(a), float(lam), c_best, "Nonnegative")


def _safe_eval(fn: Callable, x: np.ndarray) -> np.ndarray:
    try:
        with np.errstate(all="ignore"):
            return np.asarray(fn(x), dtype=float)
    except (CashFitError, ZeroDivisionError):
        out = np.empty_like(x)
        for k, xi in enumerate(x):
            try:
                out[k] = fn(float(xi))
            except (CashFitError, ZeroDivisionError):
                out[k] = np.nan
        return out


def scan_sign_changes(
    fn: Callable,
    lo: float,
    hi: float,
    steps: int,
    exclude: Sequence[float] = (),
) -> list[Bracket]:
    """Sign-change brackets of ``fn`` on ``[lo, hi]``.

    The interval is split at every point of ``exclude`` and each open piece
    is sampled at ``steps`` interior points, so brackets never straddle an
    excluded singularity. Non-finite samples are dropped.
    """
    if steps < 2:
        raise ValueError("steps must be >= 2")
    cuts = sorted(float(e) for e in exclude if lo < e < hi)
    edges = [float(lo)] + cuts + [float(hi)]
    out: list[Bracket] = []
    for left, right in zip(edges[:-1], edges[1:]):
        x = np.linspace(left, right, steps + 2)[1:-1]
        v = _safe_eval(fn, x)
        keep = np.isfinite(v)
        x, v = x[keep], v[keep]
        s = np.sign(v)
        # exact zeros are dropped so the bracket straddles them
        nz = s != 0
        x, s = x[nz], s[nz]
        for k in np.flatnonzero(s[:-1] * s[1:] < 0):
            out.append(Bracket(float(x[k]), float(x[k + 1]), "down" if s[k] > 0 else "up"))
    return out


def scan_root_counts(
    fn: Callable,
    points: Sequence[float],
    steps: int = 4000,
    far: float = 1e8,
    bridge: bool = False,
) -> tuple[int, int]:
    """Count zero crossings and jump crossings of a decreasing-between-poles function.

    ``points`` are analytically known special points, for both g and F the
    poles of g. The axis is split there. Each piece is sampled uniformly plus
    geometrically towards its ends. Beyond the outermost points it is sampled
    geometrically out to ``far`` times their span; much further out, rounding
    in ``a - M/g(a)`` swamps the sign of F.

    A ``+ -> -`` change is counted as a zero and a ``- -> +`` change as a jump
    (a pole missing from ``points``). With ``bridge`` the points are treated
    as removable: the signs on either side of each are compared too. Use it
    for F, which is finite at the poles of g.
    """
    pts = np.sort(np.asarray(points, dtype=float))
    span = float(pts[-1] - pts[0]) if pts.size > 1 else max(1.0, abs(float(pts[0])))
    tail = span * np.geomspace(1e-13, far, steps)
    unit = np.geomspace(1e-13, 0.5, steps // 2)
    pieces = [pts[0] - tail[::-1]]
    for left, right in zip(pts[:-1], pts[1:]):
        w = right - left
        x = np.concatenate([np.linspace(left, right, steps + 2)[1:-1], left + w * unit, right - w * unit])
        x = np.unique(x)
        pieces.append(x[(x > left) & (x < right)])
    pieces.append(pts[-1] + tail)
    # samples within a few ulps of a listed point carry no sign information
    guard = 64 * np.spacing(np.abs(pts))
    near = np.abs(np.concatenate(pieces)[:, None] - pts[None, :]) <= guard
    pieces = [x[~m.any(axis=1)] for x, m in zip(pieces, np.split(near, np.cumsum([x.size for x in pieces])[:-1]))]

    down = up = 0
    signs = []
    for x in pieces:
        v = _safe_eval(fn, x)
        # exact zeros are dropped; the sign change across them still counts
        keep = np.isfinite(v) & (v != 0)
        s = np.sign(v[keep])
        ch = s[:-1] * s[1:] < 0
        down += int(np.sum(ch & (s[:-1] > 0)))
        up += int(np.sum(ch & (s[:-1] < 0)))
        signs.append((s[0], s[-1]) if s.size else (0.0, 0.0))
    if bridge:
        for (_, last), (first, _) in zip(signs[:-1], signs[1:]):
            if last > 0 > first:
                down += 1
            elif last < 0 < first:
                up += 1
    return down, up
