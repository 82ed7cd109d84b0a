#!/usr/bin/env python3
"""Fit the four worked datasets and print every reported quantity.

Datasets, all on unit bins over [0, 100] unless noted:

* two counts, in bins 38 and 89 (1-based)
* three counts, in bins 13, 38 and 89
* five counts, at centres 9.5, 29.5, ..., 89.5
* nine counts of 1: bins [0,1], [1,2], [2,3] and six half-unit bins on [6, 9]
"""

from __future__ import annotations

import json

from cashfit import Bin, build_dataset, fit_extended, uniform_dataset
from cashfit.cli import dumps


def one_hot(N, idx):
    y = [0] * N
    for i in idx:
        y[i] = 1
    return y


DATASETS = {
    "two_counts": uniform_dataset(one_hot(100, [37, 88]), (0.0, 100.0)),
    "three_counts": uniform_dataset(one_hot(100, [12, 37, 88]), (0.0, 100.0)),
    "five_counts": uniform_dataset(one_hot(100, [9, 29, 49, 69, 89]), (0.0, 100.0)),
    "gap": build_dataset(
        [Bin(i, i + 1, 1) for i in range(3)] + [Bin(6 + 0.5 * k, 6.5 + 0.5 * k, 1) for k in range(6)]
    ),
}


def summarize(ds):
    fit = fit_extended(ds, internal_zeros=True)
    diag = fit.standard.diagnostics
    out = {
        "kind": str(fit.kind),
        "a": fit.a,
        "lambda": fit.lam,
        "c_min": fit.c_min,
        "F_infinity": diag.F_infinity,
        "g_zeros": list(diag.F_singularities),
        "F_zeros": [(z.a, z.external, z.acceptable) for z in diag.F_zeros],
        "fallbacks": {str(alt.kind): {"lambda": alt.lam, "c": alt.c} for alt in fit.alternatives},
    }
    if not fit.standard.acceptable:
        out["rejected"] = {"a": fit.standard.a, "lambda": fit.standard.lam}
    return out


def main() -> int:
    report = {name: summarize(ds) for name, ds in DATASETS.items()}
    print(dumps(json.loads(dumps(report))))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
