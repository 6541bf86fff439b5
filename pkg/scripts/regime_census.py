"""Regime maps on an (s, log t) grid and the set of regimes each contains."""
import argparse
from collections import Counter
from pathlib import Path

import numpy as np

from lvswitch import io as lvio
from lvswitch.presets import bottom_pair, top_pair
from lvswitch.regimes import regime_map

PAIRS = {
    "top_rho5.5": lambda: top_pair(5.5),
    "top_rho4.5": lambda: top_pair(4.5),
    "bottom_rho6.2": lambda: bottom_pair(6.2),
    "bottom_rho6.8": lambda: bottom_pair(6.8),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/census")
    parser.add_argument("--s-range", type=float, nargs=2, default=(0.25, 0.55))
    parser.add_argument("--t-range", type=float, nargs=2, default=(0.1, 100.0))
    parser.add_argument("--grid", type=int, default=40)
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    s_grid = np.linspace(*args.s_range, args.grid)
    t_grid = np.geomspace(*args.t_range, args.grid)
    for name, make in PAIRS.items():
        rm = regime_map(make(), s_grid, t_grid, workers=args.threads)
        rows = [
            (s, t, rm.lambda_x[i, j], rm.lambda_y[i, j], rm.labels[i, j])
            for i, s in enumerate(rm.s)
            for j, t in enumerate(rm.t)
        ]
        lvio.write_csv(out / f"{name}.csv", ["s", "t", "lambda_x", "lambda_y", "regime"], rows)
        counts = Counter(rm.labels.ravel().tolist())
        print(f"{name}: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))


if __name__ == "__main__":
    main()
