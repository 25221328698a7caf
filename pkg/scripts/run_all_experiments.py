#!/usr/bin/env python3
"""Run every built-in experiment with its default config.

The full set reproduces all figure-level datasets. The heavyweight runs
(fig4/appB sweeps at 2880 modes per boundary point, appC at 4800, the long
fig5 horizon) together take on the order of an hour on a laptop; pass
--quick to shrink geometries for a fast end-to-end smoke run instead.
"""

import argparse
import sys
import time

from skinswitch.experiments import EXPERIMENTS, run_experiment

QUICK_OVERRIDES = {
    "fig1": ("geometry.L_x=30",),
    "fig2": ("geometry.L_x=20", "geometry.L_y_values=[2, 6, 10]"),
    "fig3": ("geometry.L_x_a=40", "dynamics.T=400.0"),
    "fig4": ("geometry.L_x=30", "sweep.beta_y_values=[1.0, 1e-4, 0.0]"),
    "fig5": ("geometry.L_x=30", "dynamics.T=200.0"),
    "appA": ("geometry.L_x=60", "geometry.L_y_values=[2, 4]"),
    "appB": ("geometry.L_x=30", "sweep.beta_y_values=[1.0, 0.0]"),
    "appC": ("geometry.shapes=[[40, 10], [20, 20], [10, 40]]",),
    "appD": ("geometry.L_x=30", "sweep.values=[1.0, 0.1, 0.01, 0.0]"),
}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--quick", action="store_true",
                    help="reduced geometries for a smoke run")
    ap.add_argument("--skip", action="append", default=[],
                    help="experiment ids to skip (repeatable)")
    ap.add_argument("--no-plots", action="store_true")
    args = ap.parse_args()

    failures = []
    for eid in sorted(EXPERIMENTS):
        if eid in args.skip:
            print(f"-- {eid}: skipped")
            continue
        overrides = QUICK_OVERRIDES.get(eid, ()) if args.quick else ()
        t0 = time.perf_counter()
        try:
            res = run_experiment(eid, overrides=overrides, outdir=args.outdir,
                                 plots=not args.no_plots)
        except Exception as exc:
            print(f"-- {eid}: FAILED ({type(exc).__name__}: {exc})")
            failures.append(eid)
            continue
        mark = "ok" if res.reliable else "UNRELIABLE"
        print(f"-- {eid}: {mark} in {time.perf_counter() - t0:.1f}s "
              f"-> {res.outdir}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
