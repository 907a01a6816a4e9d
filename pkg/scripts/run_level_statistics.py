#!/usr/bin/env python3
"""Level-spacing crossover: eta vs disorder strength and its N scaling."""

import argparse
from pathlib import Path

import numpy as np

import spinchain as sc
from spinchain.tableio import write_csv, write_sidecar


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=20240816)
    ap.add_argument("--n-real", type=int, default=1000)
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()

    n_values = (50, 100) if args.quick else (50, 100, 200, 500)
    n_real = 100 if args.quick else args.n_real
    grid = np.geomspace(1e-3, 1.0, 12)
    args.out_dir.mkdir(parents=True, exist_ok=True)

    rows, curves = [], {}
    for ni, n in enumerate(n_values):
        values = sc.eta_curve(n, grid, n_real, args.seed, key_prefix=(ni,))
        curves[n] = (grid, values)
        rows += [(n, eps, v) for eps, v in zip(grid, values)]
        print(f"N={n}: eta from {values[0]:.3f} down to {values[-1]:.3f}")

    path = args.out_dir / "eta_vs_eps_j.csv"
    write_csv(path, ("n_sites", "eps_j", "eta"), rows,
              metadata={"seed": args.seed, "n_real": n_real})

    payload = {}
    for target in (0.5, 0.8):
        th = sc.eta_threshold(curves, target)
        payload[str(target)] = {"exponent": th.fit.params["exponent"],
                                "stderr": th.fit.stderr["exponent"],
                                "thresholds": th.thresholds}
        print(f"eta_c at eta={target}: exponent {th.fit.params['exponent']:+.3f} "
              f"+- {th.fit.stderr['exponent']:.3f}")
    write_sidecar(path, {"targets": payload, "n_real": n_real, "seed": args.seed})


if __name__ == "__main__":
    main()
