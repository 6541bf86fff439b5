"""Tangency sets and how much of a persistence run each region C(z) captures.

For every preset pair, reports |T|, the residuals of its points and, at a
persistence point of the regime map, the post-burn-in time fraction of a
simulated trajectory inside each C(z) (and inside Gamma' when defined).
"""
import argparse
from pathlib import Path

import numpy as np

from lvswitch import io as lvio
from lvswitch.env_model import SwitchRates
from lvswitch.errors import PreconditionViolated
from lvswitch.geometry import contains, gamma_prime, support_region, tangency_set
from lvswitch.pdmp import occupation_fraction, simulate_pdmp
from lvswitch.presets import bottom_pair, top_pair
from lvswitch.regimes import Regime, regime_map

PAIRS = {
    "top_rho5.5": lambda: top_pair(5.5),
    "top_rho4.5": lambda: top_pair(4.5),
    "bottom_rho6.2": lambda: bottom_pair(6.2),
    "bottom_rho6.8": lambda: bottom_pair(6.8),
}


def persistence_point(pair):
    """Grid point of the regime map farthest inside the persistence regime."""
    rm = regime_map(pair, np.linspace(0.05, 0.95, 37), np.geomspace(0.1, 300.0, 37))
    score = np.minimum(rm.lambda_x, rm.lambda_y)
    score[rm.labels != Regime.PERSISTENCE_BOTH.value] = -np.inf
    i, j = np.unravel_index(np.argmax(score), score.shape)
    if not np.isfinite(score[i, j]):
        return None
    return float(rm.s[i]), float(rm.t[j])


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/support")
    parser.add_argument("--horizon", type=float, default=2000.0)
    parser.add_argument("--seed", type=int, default=3)
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = {}
    for name, make in PAIRS.items():
        pair = make()
        tset = tangency_set(pair)
        entry = {"tangency": [p.as_dict() for p in tset.points], "count": len(tset)}
        point = persistence_point(pair)
        entry["persistence_point"] = point
        if point is not None:
            traj = simulate_pdmp(pair, SwitchRates.from_st(*point), (0.3, 0.3), 0, args.horizon, seed=args.seed)
            coverage = []
            for k, p in enumerate(tset.points):
                region = support_region(pair, (p.x, p.y))
                lvio.write_polylines(out / f"{name}.cz_{k}.csv", region.arcs)
                coverage.append(occupation_fraction(traj, lambda z: contains(region, z, tol=1e-6)))
            entry["cz_coverage"] = coverage
            try:
                outer = gamma_prime(pair)
                entry["gamma_prime_coverage"] = occupation_fraction(traj, lambda z: contains(outer, z, tol=1e-6))
            except PreconditionViolated as exc:
                entry["gamma_prime_coverage"] = f"PreconditionViolated: {exc}"
        report[name] = entry
        print(f"{name}: |T|={len(tset)}, persistence point={point}, coverage={entry.get('cz_coverage')}")
    lvio.write_json(out / "support_report.json", report)


if __name__ == "__main__":
    main()
