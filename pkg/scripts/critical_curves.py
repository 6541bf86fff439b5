"""Critical switching-rate curves t_x(s), t_y(s) for the preset pairs.

Writes one CSV per (pair, species) with columns s, t_critical, u, v and
prints a short quasi-convexity summary.
"""
import argparse
from pathlib import Path

import numpy as np

from lvswitch import io as lvio
from lvswitch.presets import bottom_pair, top_pair
from lvswitch.regimes import check_quasi_convex, critical_curve, transport_to_uv

PAIRS = {
    "top_rho5.5": lambda: top_pair(5.5),
    "top_rho4.5": lambda: top_pair(4.5),
    "bottom_rho6.2": lambda: bottom_pair(6.2),
    "bottom_rho6.8": lambda: bottom_pair(6.8),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/curves")
    parser.add_argument("--grid", type=int, default=200)
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, make in PAIRS.items():
        pair = make()
        for species in ("x", "y"):
            curve = critical_curve(pair, species, s_count=args.grid, workers=args.threads)
            path = out / f"{name}_{species}.csv"
            if curve.s.size == 0:
                lvio.write_csv(path, ["s", "t_critical", "u", "v"], [], comments=["empty domain"])
                print(f"{name} {species}: empty domain")
                continue
            u, v = transport_to_uv(pair, curve)
            rows = list(zip(curve.s, curve.t, u, v))
            lvio.write_csv(path, ["s", "t_critical", "u", "v"], rows, comments=[f"domain={curve.domain}"])
            finite = np.isfinite(curve.t)
            order = np.argsort(u)
            report = check_quasi_convex(v[order], positions=u[order])
            print(
                f"{name} {species}: {finite.sum()}/{len(finite)} finite, "
                f"t in [{np.nanmin(curve.t):.4g}, {np.nanmax(curve.t):.4g}], "
                f"quasi-convex in u: {report.quasi_convex} (max violation {report.max_violation:.2e})"
            )


if __name__ == "__main__":
    main()
