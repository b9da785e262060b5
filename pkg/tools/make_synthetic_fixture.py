#!/usr/bin/env python3
"""Regenerate the bundled synthetic electricity-style fixture CSV.

The real 1970 US electricity production-cost data (158 firms; response
``cost`` plus seven predictors) could not be vendored, so the package
ships this synthetic stand-in with the same schema and the same
qualitative character: a dominant output scale, positive prices moving
with a common factor, and cost shares that almost sum to one, which
makes the design severely ill-conditioned in one trailing direction.
The cost equation puts genuine signal on those trailing directions so
that truncating components inflates the residual variance.

Deterministic: rerunning this script reproduces the committed file
byte for byte.  See README for how to swap in the real dataset.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

SEED = 11
N = 158

COLUMNS = (
    "cost",
    "output",
    "wage",
    "labor_cs",
    "capital_price",
    "capital_cs",
    "fuel_price",
    "fuel_cs",
)

OUT = Path(__file__).resolve().parent.parent / "src" / "pcreg" / "data" / "electricity_synthetic.csv"


def generate(seed: int = SEED, n: int = N) -> dict[str, np.ndarray]:
    rng = np.random.default_rng(seed)
    log_q = rng.normal(6.2, 1.4, n)
    output = np.exp(log_q) / 1000.0
    common = rng.normal(0.0, 1.0, n)
    size = (log_q - 6.2) / 1.4
    wage = 2.0 + 0.35 * common + 0.18 * size + rng.normal(0.0, 0.06, n)
    capital_price = 70.0 + 8.0 * common + 3.0 * size + rng.normal(0.0, 2.0, n)
    fuel_price = 30.0 + 4.0 * common - 2.0 * size + rng.normal(0.0, 1.5, n)
    # Cost shares live near the simplex; the small jitter keeps the design
    # full rank while leaving one singular value tiny.
    shares = rng.dirichlet((9.0, 14.0, 22.0), size=n) + rng.normal(0.0, 0.0015, (n, 3))
    labor_cs, capital_cs, fuel_cs = shares.T
    cost = (
        0.30
        + 0.92 * output
        + 0.55 * wage
        + 0.012 * capital_price
        + 0.020 * fuel_price
        + 3.5 * labor_cs
        - 2.0 * capital_cs
        + 1.2 * fuel_cs
        + rng.normal(0.0, 0.25, n)
    )
    return {
        "cost": cost,
        "output": output,
        "wage": wage,
        "labor_cs": labor_cs,
        "capital_price": capital_price,
        "capital_cs": capital_cs,
        "fuel_price": fuel_price,
        "fuel_cs": fuel_cs,
    }


def main() -> None:
    data = generate()
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with OUT.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COLUMNS)
        for i in range(N):
            # repr keeps full double precision so the file round-trips exactly
            writer.writerow([repr(float(data[c][i])) for c in COLUMNS])
    print(f"wrote {OUT} ({N} rows)")


if __name__ == "__main__":
    main()
