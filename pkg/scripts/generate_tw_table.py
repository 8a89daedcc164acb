"""Regenerate the frozen Tracy-Widom GUE table shipped in ``polymerlab/data``.

The grid is evaluated with the Fredholm-determinant oracle, compared point by
point with the Painleve II oracle, and its moments are checked against the
published values before the file is written.

    python3 scripts/generate_tw_table.py [--out PATH]
"""

import argparse
from pathlib import Path

import numpy as np

from polymerlab.tracywidom import (
    PUBLISHED_MOMENTS,
    TWReference,
    generate_table,
    painleve_cdf,
    write_table,
)

# moment tolerances: the table stops at [-6, 4], which truncates the higher moments slightly
MOMENT_TOL = {"mean": 1e-6, "variance": 1e-5, "skewness": 1e-4, "excess_kurtosis": 1e-3}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    default = Path(__file__).resolve().parents[1] / "src" / "polymerlab" / "data" / "tw_gue.csv"
    ap.add_argument("--out", type=Path, default=default)
    args = ap.parse_args()

    x, cdf, pdf = generate_table()
    cross = painleve_cdf(x)
    dev = np.abs(cross - cdf).max()
    print(f"max |Fredholm - Painleve II| on grid: {dev:.2e}")
    if dev > 1e-10:
        raise SystemExit("oracles disagree")

    ref = TWReference(x, cdf, pdf)
    for name, value in ref.moments().items():
        err = abs(value - PUBLISHED_MOMENTS[name])
        print(f"{name:>16s}: table {value:+.10f}  published {PUBLISHED_MOMENTS[name]:+.10f}  diff {err:.1e}")
        if err > MOMENT_TOL[name]:
            raise SystemExit(f"{name} outside tolerance {MOMENT_TOL[name]}")
    print(f"F(-6) = {cdf[0]:.3e}, 1 - F(4) = {1 - cdf[-1]:.3e}")

    write_table(args.out, x, cdf, pdf)
    print(f"wrote {len(x)} rows to {args.out}")


if __name__ == "__main__":
    main()
