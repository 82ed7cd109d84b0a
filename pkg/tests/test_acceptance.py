"""Acceptance criteria, each checked at its stated tolerance.

Run ``pytest tests/test_acceptance.py -v`` and read the "acceptance criteria"
section of the terminal summary: one PASS/FAIL line per criterion.
"""

from __future__ import annotations

import math
import statistics
import time

import numpy as np
import pytest

from cashfit.cash import cash_from_means, cash_standard, poisson_means_standard
from cashfit.extended import ModelKind, fit_constant, fit_extended, fit_pivot_a, fit_pivot_b
from cashfit.oracle import grid_minimize_fallbacks, grid_minimize_nonnegative, scan_root_counts
from cashfit.sim import DEFAULT_M_GRID, Shape, SimConfig, run_acceptance_experiment, run_grid
from cashfit.solver import (
    FINF_TOL,
    F_infinity,
    NoAcceptableSolution,
    StandardFit,
    find_F_zeros,
    find_g_zeros,
    fit_standard,
    lambda_of_a,
)

from helpers import gap_dataset, linear_means, m2_dataset, m3_dataset, normalized_gradient, random_dataset

# ---------------------------------------------------------------------------
# 1-4: golden examples


def test_criterion_1_m2_golden(detail):
    ds = m2_dataset()
    (a_c,) = find_g_zeros(ds)
    finf = F_infinity(ds)
    (z,) = find_F_zeros(ds)
    lam = lambda_of_a(ds, z.a)
    detail(f"a_c={a_c:.5f} F_inf={finf:.5f} a={z.a:.5f} lambda={lam:.5f}")
    assert a_c == pytest.approx(-0.019, abs=1e-3)
    assert finf == pytest.approx(0.051, abs=1e-3)
    assert z.external and z.a == pytest.approx(-0.077, abs=1e-3)
    assert not z.acceptable
    assert isinstance(fit_standard(ds), NoAcceptableSolution)
    assert lam == pytest.approx(-0.007, abs=5e-4)


def test_criterion_1_runtime(detail):
    times = []
    for _ in range(7):
        t0 = time.perf_counter()
        ds = m2_dataset()
        fit_standard(ds, internal_zeros=True)
        times.append(time.perf_counter() - t0)
    med = statistics.median(times)
    detail(f"median build+fit {1e3 * med:.2f} ms")
    assert med < 0.010


def test_criterion_2_m2_extended(detail):
    ds = m2_dataset()
    fit = fit_extended(ds)
    c = {alt.kind: alt.c for alt in fit.alternatives}
    detail(f"C_A={c[ModelKind.PIVOT_A]:.4f} C_B={c[ModelKind.PIVOT_B]:.4f} C_C={c[ModelKind.CONSTANT]:.4f} kind={fit.kind}")
    assert c[ModelKind.PIVOT_A] == pytest.approx(15.081, abs=5e-3)
    assert c[ModelKind.PIVOT_B] == pytest.approx(18.141, abs=5e-3)
    assert c[ModelKind.CONSTANT] == pytest.approx(15.648, abs=5e-3)
    assert fit.kind is ModelKind.PIVOT_A


def test_criterion_3_m3_golden(detail):
    ds = m3_dataset()
    std = fit_standard(ds)
    fit = fit_extended(ds)
    c = {alt.kind: alt.c for alt in fit.alternatives}
    detail(
        f"C_min={fit.c_min:.4f} C_A={c[ModelKind.PIVOT_A]:.4f} "
        f"C_B={c[ModelKind.PIVOT_B]:.4f} C_C={c[ModelKind.CONSTANT]:.4f}"
    )
    assert isinstance(std, StandardFit)
    assert std.c_min == pytest.approx(20.996, abs=5e-3)
    assert c[ModelKind.PIVOT_A] == pytest.approx(23.245, abs=5e-3)
    assert c[ModelKind.PIVOT_B] == pytest.approx(22.413, abs=5e-3)
    assert c[ModelKind.CONSTANT] == pytest.approx(21.039, abs=5e-3)
    assert fit.kind is ModelKind.STANDARD
    assert all(fit.c_min < v for v in c.values())


def test_criterion_4_gap_golden(detail):
    ds = gap_dataset()
    std = fit_standard(ds)
    A, B, C = fit_pivot_a(ds), fit_pivot_b(ds), fit_constant(ds)
    detail(f"a={std.a:.4f} lambda={std.lam:.4f} C_min={std.c_min:.4f} C_A={A.c:.4f} C_B={B.c:.4f} C_C={C.c:.4f}")
    assert isinstance(std, StandardFit)
    assert std.a == pytest.approx(0.188, abs=2e-3)
    assert std.lam == pytest.approx(0.812, abs=5e-3)
    assert std.c_min == pytest.approx(0.078, abs=5e-3)
    assert math.isclose(C.lam, 1.5, rel_tol=1e-15)
    assert math.isclose(A.lam, 1.0 / 3.0, rel_tol=1e-15)
    assert math.isclose(B.lam, 3.0, rel_tol=1e-15)
    assert C.c == pytest.approx(1.019, abs=5e-3)
    assert A.c == pytest.approx(2.735, abs=5e-3)
    assert B.c == pytest.approx(14.177, abs=5e-3)


# ---------------------------------------------------------------------------
# 5-6: simulation

SIM_SEED = 1


def test_criterion_5_uniform_acceptance(detail):
    t0 = time.perf_counter()
    results = run_grid(shapes=[Shape.UNIFORM], Ms=DEFAULT_M_GRID, N=100, trials=100, seed=SIM_SEED)
    elapsed = time.perf_counter() - t0
    frac = {r.config.M: r.fraction_acceptable for r in results}
    high = {M: f for M, f in frac.items() if M >= 50}
    detail(f"M=1: {frac[1]:.2f}; min over M>=50: {min(high.values()):.2f}; {elapsed:.1f} s")
    assert frac[1] == 0.0
    assert all(f >= 0.98 for f in high.values())
    assert elapsed < 30.0


def test_criterion_6_finf_ordering(detail):
    neg = {
        shape: run_acceptance_experiment(
            SimConfig(shape=shape, M=200, N=100, trials=200, seed=SIM_SEED)
        ).fraction_Finf_negative
        for shape in (Shape.UNIFORM, Shape.INCREASING)
    }
    detail(f"Finf<0 uniform={neg[Shape.UNIFORM]:.3f} increasing={neg[Shape.INCREASING]:.3f}")
    assert neg[Shape.UNIFORM] >= 0.95
    assert neg[Shape.INCREASING] <= neg[Shape.UNIFORM] - 0.2


# ---------------------------------------------------------------------------
# 7: property suite on random datasets

N_DATASETS = 500
PROPERTY_SEED = 7


def _F_reference(ds):
    """F built from scratch: bin offsets, counts and gap edges only."""
    pos = ds.counts > 0
    d = ds.offsets[pos]
    y = ds.counts[pos].astype(float)
    R = ds.x_B - ds.x_A
    R_G = sum(g.x_b - g.x_a for g in ds.gaps)
    S_G = sum((g.x_b - g.x_a) * (0.5 * (g.x_a + g.x_b) - ds.x_A) for g in ds.gaps)
    R_m = (R * R - 2 * S_G) / (R - R_G)

    def g(a):
        a = np.asarray(a, dtype=float)
        with np.errstate(divide="ignore"):
            return np.sum(y * d / (1.0 + a[..., None] * d), axis=-1)

    def F(a):
        return 1.0 + 0.5 * R_m * (np.asarray(a, dtype=float) - ds.M / g(a))

    return -1.0 / d, g, F


def _check_dataset(ds, rng, stats):
    fit = fit_extended(ds, internal_zeros=True)
    std = fit.standard

    # (c) non-negative means
    mu = fit.means(ds)
    scale = max(1.0, float(np.max(np.abs(mu))))
    if np.any(mu < -1e-12 * scale):
        stats["c"].append(repr(ds))

    # (d) grid oracle
    if fit.kind is ModelKind.STANDARD:
        grid_c = grid_minimize_nonnegative(ds, steps=160).c
    elif fit.kind is ModelKind.DEGENERATE_EMPTY:
        grid_c = 0.0
    else:
        lam_grids = [np.linspace(0.0, 4.0 * alt.lam, 3000) for alt in fit.alternatives]
        grid_c = min(r.c for r in grid_minimize_fallbacks(ds, *lam_grids))
    if grid_c < fit.c_min - 1e-6:
        stats["d"].append(f"{ds!r}: grid {grid_c} < {fit.c_min}")

    # (e) closed form vs definitional Cash
    probes = []
    lo, hi = -2.0 / ds.widths[0], -1.0 / (ds.R - ds.widths[-1] / 2.0)
    if isinstance(std, StandardFit):
        probes.append((std.a, std.lam))
    for _ in range(3):
        probes.append((hi + rng.exponential(2.0 / ds.R), rng.uniform(0.05, 3.0)))
    probes.append((lo - rng.exponential(1.0), -rng.uniform(0.05, 3.0)))
    for a, lam in probes:
        c_closed = cash_standard(ds, a, lam)
        c_def, _ = cash_from_means(ds, poisson_means_standard(ds, a, lam))
        if math.isinf(c_closed) and math.isinf(c_def):
            continue
        if not abs(c_closed - c_def) <= 1e-9 * max(1.0, abs(c_def)):
            stats["e"].append(f"{ds!r} a={a} lam={lam}: {c_closed} vs {c_def}")
        stats["e_checked"] += 1

    # (f) stationarity
    if isinstance(std, StandardFit):
        ga, gl = normalized_gradient(ds, std.a, std.lam)
        stats["f_worst"] = max(stats["f_worst"], ga, gl)
        if ga > 1e-4 or gl > 1e-4:
            stats["f"].append(f"{ds!r}: {ga:.2e}, {gl:.2e}")
        stats["f_checked"] += 1

    if ds.n < 2 or abs(F_infinity(ds)) <= FINF_TOL:
        return
    stats["ab_checked"] += 1

    # (a) root counts against a sign-change scan of an independent F
    poles, g_ref, F_ref = _F_reference(ds)
    g_down, g_up = scan_root_counts(g_ref, poles)
    F_down, F_up = scan_root_counts(F_ref, poles, bridge=True)
    zeros = find_F_zeros(ds)
    n_g = len(find_g_zeros(ds))
    if (g_down, g_up, F_down, F_up) != (n_g, 0, len(zeros), n_g) or len(zeros) != ds.n - 1:
        stats["a"].append(f"{ds!r}: scan g {g_down}/{g_up} F {F_down}/{F_up}; solver {n_g} g, {len(zeros)} F")

    # (b) at most one zero gives non-negative means
    ok = 0
    for z in zeros:
        den = float(np.sum((1.0 + z.a * ds.offsets) * ds.widths))
        if den == 0.0:
            continue  # the model integrates to zero, no finite normalization
        m = linear_means(ds, z.a, ds.M / den)
        if np.all(m >= -1e-12 * np.max(np.abs(m))):
            ok += 1
    if ok > 1 or sum(z.acceptable for z in zeros) > 1:
        stats["b"].append(f"{ds!r}: {ok} acceptable zeros")


@pytest.fixture(scope="module")
def property_run():
    rng = np.random.default_rng(PROPERTY_SEED)
    stats = {k: [] for k in "abcdef"}
    stats.update(ab_checked=0, e_checked=0, f_checked=0, f_worst=0.0)
    t0 = time.perf_counter()
    for _ in range(N_DATASETS):
        ds = random_dataset(rng, n_max=30, m_max=20, gaps=True)
        _check_dataset(ds, rng, stats)
    stats["elapsed"] = time.perf_counter() - t0
    return stats


def test_criterion_7a_root_counts(property_run, detail):
    detail(f"(a) {len(property_run['a'])} mismatches over {property_run['ab_checked']} datasets")
    assert property_run["a"] == []


def test_criterion_7b_unique_acceptable(property_run, detail):
    detail(f"(b) {len(property_run['b'])} violations")
    assert property_run["b"] == []


def test_criterion_7c_nonnegative(property_run, detail):
    detail(f"(c) {len(property_run['c'])} violations")
    assert property_run["c"] == []


def test_criterion_7d_grid_oracle(property_run, detail):
    detail(f"(d) {len(property_run['d'])} violations")
    assert property_run["d"] == []


def test_criterion_7e_closed_form(property_run, detail):
    detail(f"(e) {len(property_run['e'])} of {property_run['e_checked']} disagree")
    assert property_run["e"] == []


def test_criterion_7f_stationarity(property_run, detail):
    detail(f"(f) worst {property_run['f_worst']:.1e} over {property_run['f_checked']} fits")
    assert property_run["f"] == []


def test_criterion_7_runtime(property_run, detail):
    detail(f"{N_DATASETS} datasets in {property_run['elapsed']:.1f} s")
    assert property_run["elapsed"] < 60.0
