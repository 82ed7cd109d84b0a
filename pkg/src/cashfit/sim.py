"""Monte Carlo acceptance-fraction experiments.

Events are drawn from a uniform, linearly increasing or linearly decreasing
density on the range, binned into equal bins, and fit with the standard
linear model. Each trial records whether the fit is acceptable and whether
``F_infinity < 0``.

Trial ``k`` of a run seeded with ``seed`` draws from its own PCG64 stream
seeded by ``SeedSequence([seed, k])``. Serial and parallel runs therefore
give identical results.
"""

from __future__ import annotations

import csv
import enum
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .dataset import BinnedDataset, from_edges
from .errors import PositionOutOfRange
from .solver import F_infinity, StandardFit, fit_standard

__all__ = [
    "Shape",
    "SimConfig",
    "TrialOutcome",
    "SimResult",
    "DEFAULT_M_GRID",
    "trial_rng",
    "sample_positions",
    "bin_events",
    "run_trial",
    "run_acceptance_experiment",
    "run_grid",
    "results_to_csv",
]

DEFAULT_M_GRID = (1, 2, 3, 5, 8, 12, 20, 30, 50, 80, 120, 200)
GENERATOR = "numpy PCG64, per-trial SeedSequence([seed, trial])"
_MASK64 = (1 << 64) - 1


class Shape(str, enum.Enum):
    UNIFORM = "uniform"
    INCREASING = "increasing"
    DECREASING = "decreasing"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SimConfig:
    shape: Shape = Shape.UNIFORM
    M: int = 10
    N: int = 100
    trials: int = 100
    seed: int = 0
    x_range: tuple[float, float] = (0.0, 100.0)

    def __post_init__(self):
        object.__setattr__(self, "shape", Shape(self.shape))
        object.__setattr__(self, "x_range", tuple(float(v) for v in self.x_range))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.M < 0:
            raise ValueError("M must be >= 0")
        if not self.x_range[1] > self.x_range[0]:
            raise ValueError("x_range must be increasing")


@dataclass(frozen=True)
class TrialOutcome:
    trial: int
    acceptable: bool
    finf_negative: bool
    n: int


@dataclass(frozen=True)
class SimResult:
    config: SimConfig
    fraction_acceptable: float
    fraction_Finf_negative: float
    outcomes: tuple[TrialOutcome, ...] = field(repr=False)
    metadata: dict = field(default_factory=dict, repr=False)

    def to_dict(self, outcomes: bool = False) -> dict:
        cfg = asdict(self.config)
        cfg["shape"] = str(self.config.shape)
        cfg["x_range"] = list(self.config.x_range)
        out = {
            "config": cfg,
            "fraction_acceptable": self.fraction_acceptable,
            "fraction_Finf_negative": self.fraction_Finf_negative,
            "metadata": dict(self.metadata),
        }
        if outcomes:
            out["outcomes"] = [asdict(o) for o in self.outcomes]
        return out

    def csv_row(self) -> dict:
        return {
            "M": self.config.M,
            "shape": str(self.config.shape),
            "trials": self.config.trials,
            "fraction_acceptable": self.fraction_acceptable,
            "fraction_Finf_negative": self.fraction_Finf_negative,
        }


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed & _MASK64, trial])))


def sample_positions(shape, M: int, x_range: tuple[float, float], rng: np.random.Generator) -> np.ndarray:
    """Draw ``M`` event positions by inverse-transform sampling.

    For a uniform variate ``u`` the unit-range position is ``u``, ``sqrt(u)``
    (density ``2y``) or ``1 - sqrt(u)`` (density ``2 - 2y``). It is then
    scaled onto ``x_range``.
    """
    shape = Shape(shape)
    if M < 0:
        raise ValueError("M must be >= 0")
    x_A, x_B = x_range
    u = rng.random(M)
    if shape is Shape.INCREASING:
        y = np.sqrt(u)
    elif shape is Shape.DECREASING:
        y = 1.0 - np.sqrt(u)
    else:
        y = u
    return x_A + y * (x_B - x_A)


def bin_events(positions, N: int, x_range: tuple[float, float]) -> BinnedDataset:
    """Histogram events into ``N`` equal bins.

    Bins are half-open ``[lo, hi)`` except the last, which includes ``x_B``.
    """
    x = np.asarray(positions, dtype=float)
    x_A, x_B = float(x_range[0]), float(x_range[1])
    outside = (x < x_A) | (x > x_B) | ~np.isfinite(x)
    if np.any(outside):
        k = int(np.flatnonzero(outside)[0])
        raise PositionOutOfRange(f"event {k} at x={x[k]!r} lies outside [{x_A}, {x_B}]")
    edges = np.linspace(x_A, x_B, N + 1)
    idx = np.minimum(np.searchsorted(edges, x, side="right") - 1, N - 1)
    counts = np.bincount(idx, minlength=N)
    return from_edges(zip(edges[:-1], edges[1:]), counts.tolist(), gaps=())


def run_trial(cfg: SimConfig, trial: int) -> TrialOutcome:
    rng = trial_rng(cfg.seed, trial)
    ds = bin_events(sample_positions(cfg.shape, cfg.M, cfg.x_range, rng), cfg.N, cfg.x_range)
    finf_neg = ds.M > 0 and F_infinity(ds) < 0
    acceptable = isinstance(fit_standard(ds), StandardFit)
    return TrialOutcome(trial=trial, acceptable=acceptable, finf_negative=bool(finf_neg), n=ds.n)


def _run_block(cfg: SimConfig, trials: Sequence[int]) -> list[TrialOutcome]:
    return [run_trial(cfg, k) for k in trials]


def run_acceptance_experiment(cfg: SimConfig, workers: int = 1) -> SimResult:
    """Run ``cfg.trials`` independent trials and tally the outcomes."""
    trials = range(cfg.trials)
    if workers > 1 and cfg.trials > 1:
        blocks = [list(trials[i::workers]) for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_run_block, [cfg] * len(blocks), blocks)
            outcomes = sorted((o for part in parts for o in part), key=lambda o: o.trial)
    else:
        outcomes = _run_block(cfg, trials)
    n_acc = sum(o.acceptable for o in outcomes)
    n_neg = sum(o.finf_negative for o in outcomes)
    return SimResult(
        config=cfg,
        fraction_acceptable=n_acc / cfg.trials,
        fraction_Finf_negative=n_neg / cfg.trials,
        outcomes=tuple(outcomes),
        metadata={"generator": GENERATOR},
    )


def run_grid(
    shapes: Iterable = (Shape.UNIFORM,),
    Ms: Iterable[int] = DEFAULT_M_GRID,
    N: int = 100,
    trials: int = 100,
    seed: int = 0,
    x_range: tuple[float, float] = (0.0, 100.0),
    workers: int = 1,
) -> list[SimResult]:
    """Acceptance fractions over a grid of shapes and total counts."""
    out = []
    for shape in shapes:
        for M in Ms:
            cfg = SimConfig(shape=shape, M=M, N=N, trials=trials, seed=seed, x_range=x_range)
            res = run_acceptance_experiment(cfg, workers=workers)
            res.metadata["M_grid"] = "default (artifact choice)" if tuple(Ms) == DEFAULT_M_GRID else "user"
            out.append(res)
    return out


def results_to_csv(results: Iterable[SimResult]) -> str:
    buf = io.StringIO()
    cols = ["M", "shape", "trials", "fraction_acceptable", "fraction_Finf_negative"]
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in results:
        w.writerow(r.csv_row())
    return buf.getvalue()
