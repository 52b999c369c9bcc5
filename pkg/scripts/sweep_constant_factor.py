#!/usr/bin/env python3
"""Trend tables for the inequality's constant block.

Sweeps the effective-dimension parameter alpha and the ball radius on a
flat weighted model with an exponential decay profile (b0 = b1 = 1) and
prints how ((1+b0)/exp(2 r0 b1 + b0))^((n+alpha-1)/(n+alpha)) responds:
decreasing in alpha when the base is below 1, and non-increasing in the
domain radius through r0. Combined CSVs land in --out-dir.
"""

import argparse
import json
import sys
from pathlib import Path

import becomp.cli as cli

BASE = {
    "manifold": {"n": 3, "warp": {"kind": "euclidean"},
                 "density": {"kind": "constant", "w0": 1.0}},
    "alpha": 1.0,
    "profile": {"family": "exponential", "params": {"lambda0": 1.0, "a": 1.0}},
    "domains": [{"kind": "ball", "radius": 1.0}],
    "functions": [{"family": "constant", "c": 1.0}],
    "checks": ["moments", "sobolev"],
    "tolerances": {"quadrature": 1e-10, "ode": 1e-10, "verdict": 1e-8},
    "r_max": 300.0,
}


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out-dir", default="out/sweeps")
    args = parser.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    for param, values in (("alpha", [0.25, 0.5, 1.0, 2.0]),
                          ("domains.0.radius", [1.0, 2.0, 4.0])):
        rows = cli.sweep(json.loads(json.dumps(BASE)), param, values,
                         csv_path=out / f"sweep_{param.replace('.', '_')}.csv")
        print(f"\nsweep over {param}:")
        print(f"{'value':>8}  {'constant factor':>16}")
        for row in rows:
            if row["check"] == "sobolev":
                print(f"{row['value']:>8g}  {row['sobolev_constant']:>16.10f}")
    print(f"\nCSV tables in {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
