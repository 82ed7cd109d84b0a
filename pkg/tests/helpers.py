"""Shared datasets, generators and independent reference computations for the tests."""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from cashfit.dataset import Bin, BinnedDataset, build_dataset, from_edges, uniform_dataset


def counts_at(N: int, positions: dict[int, int]) -> list[int]:
    y = [0] * N
    for i, c in positions.items():
        y[i] = c
    return y


# 1-based bin labels 38 and 89 of 100 unit bins
def m2_dataset() -> BinnedDataset:
    return uniform_dataset(counts_at(100, {37: 1, 88: 1}), (0.0, 100.0))


def m3_dataset() -> BinnedDataset:
    return uniform_dataset(counts_at(100, {12: 1, 37: 1, 88: 1}), (0.0, 100.0))


def m5_dataset() -> BinnedDataset:
    # counts at centers 9.5, 29.5, ..., 89.5 of 100 unit bins
    return uniform_dataset(counts_at(100, {9: 1, 29: 1, 49: 1, 69: 1, 89: 1}), (0.0, 100.0))


def gap_dataset() -> BinnedDataset:
    bins = [Bin(float(i), float(i + 1), 1) for i in range(3)]
    bins += [Bin(6.0 + 0.5 * k, 6.5 + 0.5 * k, 1) for k in range(6)]
    return build_dataset(bins)


# ---------------------------------------------------------------------------
# random datasets


def random_dataset(rng: np.random.Generator, n_max: int = 30, m_max: int = 20, gaps: bool = True) -> BinnedDataset:
    """Random non-uniform binning with optional gaps and counts drawn from a random line."""
    N = int(rng.integers(1, n_max + 1))
    widths = rng.uniform(0.2, 3.0, N) if rng.random() < 0.7 else np.full(N, rng.uniform(0.5, 2.0))
    spacers = np.zeros(N)
    if gaps and N > 1 and rng.random() < 0.5:
        k = int(rng.integers(1, min(3, N - 1) + 1))
        where = rng.choice(np.arange(1, N), size=k, replace=False)
        spacers[where] = rng.uniform(0.1, 5.0, k)
    x0 = rng.uniform(-50.0, 50.0)
    lo = x0 + np.cumsum(spacers) + np.concatenate([[0.0], np.cumsum(widths)[:-1]])
    hi = lo + widths
    centers = 0.5 * (lo + hi)
    # counts from a random non-negative line, sometimes steep enough to vanish at an end
    f0, f1 = rng.uniform(0.0, 1.0, 2) ** rng.choice([1.0, 3.0])
    t = (centers - lo[0]) / (hi[-1] - lo[0])
    p = np.maximum(widths * (f0 + (f1 - f0) * t), 0.0) + 1e-12
    M = int(rng.integers(0, m_max + 1))
    counts = rng.multinomial(M, p / p.sum())
    return from_edges(list(zip(lo, hi)), counts.tolist())


@st.composite
def datasets(draw, n_max: int = 20, m_max: int = 15, gaps: bool = True, min_n: int = 0):
    """Hypothesis strategy for small binned datasets."""
    N = draw(st.integers(max(1, min_n), n_max))
    widths = draw(st.lists(st.floats(0.25, 4.0), min_size=N, max_size=N))
    spacers = [0.0] * N
    if gaps and N > 1:
        for i in range(1, N):
            if draw(st.booleans()) and draw(st.booleans()):
                spacers[i] = draw(st.floats(0.1, 5.0))
    x0 = draw(st.floats(-20.0, 20.0))
    counts = draw(st.lists(st.integers(0, 4), min_size=N, max_size=N).filter(
        lambda c: sum(c) <= m_max and sum(1 for v in c if v) >= min_n
    ))
    edges = []
    x = x0
    for w, s in zip(widths, spacers):
        x += s
        edges.append((x, x + w))
        x += w
    return from_edges(edges, counts)


# ---------------------------------------------------------------------------
# reference computations that share no code with the package


def cash_reference(y, mu) -> float:
    """Unconstrained ``2 sum(mu - y + y ln(y/mu))``; negative empty-bin means are allowed."""
    y = np.asarray(y, dtype=float)
    mu = np.asarray(mu, dtype=float)
    pos = y > 0
    return float(2.0 * np.sum(mu - y) + 2.0 * np.sum(y[pos] * np.log(y[pos] / mu[pos])))


def linear_means(ds: BinnedDataset, a: float, lam: float) -> np.ndarray:
    c = 0.5 * (np.asarray(ds.x_lo) + np.asarray(ds.x_hi))
    w = np.asarray(ds.x_hi) - np.asarray(ds.x_lo)
    return lam * (1.0 + a * (c - ds.x_A)) * w


def normalized_gradient(ds: BinnedDataset, a: float, lam: float) -> tuple[float, float]:
    """``|dC/dp| / sqrt(d2C/dp2)`` for p in (a, lam) by central differences.

    The step is a small fraction of the local curvature scale, so the
    result is dimensionless and insensitive to parameter units.
    """
    y = ds.counts

    def C(a_, lam_):
        return cash_reference(y, linear_means(ds, a_, lam_))

    def scaled(fn, x0, scale):
        h = 1e-4 * scale
        f_p, f_0, f_m = fn(x0 + h), fn(x0), fn(x0 - h)
        d1 = (f_p - f_m) / (2 * h)
        d2 = (f_p - 2 * f_0 + f_m) / (h * h)
        return abs(d1) / np.sqrt(abs(d2)) if d2 != 0 else np.inf

    d = ds.offsets[y > 0]
    t = 1.0 + a * d
    # scale estimates only pick the step size
    sig_a = 1.0 / np.sqrt(2.0 * np.sum(y[y > 0] * d * d / (t * t)))
    sig_l = abs(lam) / np.sqrt(2.0 * ds.M)
    ga = scaled(lambda v: C(v, lam), a, sig_a)
    gl = scaled(lambda v: C(a, v), lam, sig_l)
    return float(ga), float(gl)
