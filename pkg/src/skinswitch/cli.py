"""Command-line interface: experiments plus one-shot spectrum / evolve runs.

Exit codes: 0 success, 2 usage or config error, 3 numerical-reliability
failure (eigen-residuals above tolerance on any requested configuration).
"""

from __future__ import annotations

import argparse
import sys
from .config import ConfigError, Field, load_toml, resolve_config
from .dynamics import evolve, initial_state
from .experiments import (EXPERIMENTS, ResultTable, persist,
                          run_experiment)
from .models import (BoundarySpec, Geometry, MODEL_BUILDERS,
                     real_space_matrix)
from .spectral import classify_modes, eigendecompose

USAGE_ERROR = 2
RELIABILITY_ERROR = 3


def _formatter(prog):
    return argparse.ArgumentDefaultsHelpFormatter(prog, width=96)


MODEL_SCHEMA = {
    "model": {
        "name": Field("one_band", "chosen", "one of: " + ", ".join(sorted(MODEL_BUILDERS))),
        "r": Field(0.5, "chosen", "extra hop strength (one_band, size)"),
        "N": Field(2, "chosen", "extra hop range in cells (one_band, size)"),
        "t_0": Field(0.1, "chosen", "transverse hopping (size, benchmark)"),
        "kappa_x": Field(0.013, "cited", "skin depth parameter (benchmark)"),
        "u_x": Field(1.1, "cited", "strong 1-2 hop (three_band, kagome)"),
        "v_x": Field(1 / 1.1, "cited", "weak 1-2 hop (three_band, kagome)"),
        "u_y": Field(3.0, "cited", "strong third-orbital coupling"),
        "v_y": Field(1 / 3.0, "cited", "weak third-orbital coupling"),
        "gamma": Field(0.0, "cited", "uniform loss (three_band)"),
        "t_c": Field(0.5, "cited", "third-orbital coupling scale"),
    },
    "geometry": {
        "L_x": Field(60, "chosen", "cells along x"),
        "L_y": Field(1, "chosen", "cells along y (1 for 1D models)"),
    },
    "boundary": {
        "beta_x": Field(0.0, "chosen", "x boundary factor in [0, 1]"),
        "beta_y": Field(0.0, "chosen", "y boundary factor in [0, 1]"),
    },
    "dynamics": {
        "kind": Field("delta", "chosen", "initial packet: delta or gaussian"),
        "x0": Field(0, "chosen", "initial cell x (0 = middle)"),
        "y0": Field(0, "chosen", "initial cell y (0 = middle)"),
        "sigma": Field(1.0, "chosen", "gaussian width (cells)"),
        "dt": Field(0.01, "chosen", "integrator step (1/hopping)"),
        "T": Field(100.0, "chosen", "horizon (1/hopping)"),
        "method": Field("rk4", "chosen", "rk4, rk4_matrix, or expm"),
        "snapshot_times": Field([], "chosen", "densities to store"),
    },
    "output": {
        "dir": Field("results", "chosen", "output directory"),
        "plots": Field(True, "chosen", "emit SVG plots"),
    },
    "analysis": {
        "tau": Field(1e-3, "chosen", "skin classification threshold"),
    },
}

_MODEL_PARAMS = {
    "one_band": ("r", "N"),
    "size": ("t_0", "r", "N"),
    "benchmark": ("t_0", "kappa_x"),
    "three_band": ("u_x", "v_x", "u_y", "v_y", "gamma", "t_c"),
    "kagome": ("u_x", "v_x", "u_y", "v_y", "t_c"),
}


def _build_model(resolved: dict):
    name = resolved["model"]["name"]
    if name not in MODEL_BUILDERS:
        raise ConfigError(f"unknown model {name!r} (known: "
                          + ", ".join(sorted(MODEL_BUILDERS)) + ")")
    args = [resolved["model"][p] for p in _MODEL_PARAMS[name]]
    model = MODEL_BUILDERS[name](*args)
    gcfg = resolved["geometry"]
    L_y = gcfg["L_y"] if model.dim == 2 else 1
    if model.dim == 2 and gcfg["L_y"] < 2:
        raise ConfigError(f"model {name!r} is 2D; set geometry.L_y >= 2")
    geom = Geometry(gcfg["L_x"], L_y, model.bands)
    bcfg = resolved["boundary"]
    bc = BoundarySpec(bcfg["beta_x"], bcfg["beta_y"])
    return model, geom, bc


def cmd_experiment(args) -> int:
    result = run_experiment(args.id, args.config, tuple(args.set),
                            outdir=args.outdir, plots=not args.no_plots)
    print(f"{args.id}: wrote {result.outdir}")
    for t in result.tables:
        print(f"  {t.name}.csv: {len(t.rows)} rows")
    if not result.reliable:
        print("numerical reliability gate failed: eigen-residuals above "
              f"{1e-8:g} (see manifest)", file=sys.stderr)
        return RELIABILITY_ERROR
    return 0


def cmd_spectrum(args) -> int:
    resolved, provenance = resolve_config(MODEL_SCHEMA,
                                          load_toml(args.config) if args.config else None,
                                          tuple(args.set))
    model, geom, bc = _build_model(resolved)
    H = real_space_matrix(model, geom, bc)
    es = eigendecompose(H, geom)
    rep = classify_modes(es, resolved["analysis"]["tau"])
    table = ResultTable("spectrum", [
        ("re_E", "hopping"), ("im_E", "hopping"), ("x_ipr", "1"),
        ("x_center", "cells"), ("label", ""), ("residual", "1")])
    names = {1: "right", -1: "left", 0: "bulk"}
    for i in range(len(es)):
        table.add(float(es.eigenvalues[i].real), float(es.eigenvalues[i].imag),
                  float(rep.x_ipr[i]), float(rep.x_center[i]),
                  names[int(rep.labels[i])], float(es.residuals[i]))
    from .experiments import ExperimentResult
    result = ExperimentResult("spectrum", [table], {
        "model": model.name, "params": dict(model.params),
        "mean_x_ipr": rep.mean_x_ipr, "n_left": rep.n_left,
        "n_right": rep.n_right}, es.reliable)
    persist(result, resolved["output"]["dir"], resolved, provenance,
            plots=False)
    print(f"spectrum: wrote {result.outdir} ({len(table.rows)} rows, "
          f"mean x-IPR {rep.mean_x_ipr:+.6g})")
    return 0 if es.reliable else RELIABILITY_ERROR


def cmd_evolve(args) -> int:
    resolved, provenance = resolve_config(MODEL_SCHEMA,
                                          load_toml(args.config) if args.config else None,
                                          tuple(args.set))
    model, geom, bc = _build_model(resolved)
    dyn = resolved["dynamics"]
    x0 = dyn["x0"] or (geom.L_x + 1) // 2
    y0 = dyn["y0"] or (geom.L_y + 1) // 2
    psi0 = initial_state(geom, dyn["kind"], x0=x0, y0=y0, sigma=dyn["sigma"])
    H = real_space_matrix(model, geom, bc)
    traj = evolve(H, psi0, dyn["dt"], dyn["T"],
                  tuple(dyn["snapshot_times"]), geom, method=dyn["method"])
    table = ResultTable("trajectory", [
        ("t", "1/hopping"), ("x_cm", "cells"), ("y_cm", "cells"),
        ("log_norm", "1")])
    for i in range(len(traj.times)):
        table.add(float(traj.times[i]), float(traj.x_cm[i]),
                  float(traj.y_cm[i]), float(traj.log_norms[i]))
    from .experiments import ExperimentResult
    result = ExperimentResult("evolve", [table], {
        "model": model.name, "params": dict(model.params),
        "x0": x0, "y0": y0,
        "final_x_cm": float(traj.x_cm[-1]),
        "final_log_norm": float(traj.log_norms[-1])}, True)
    persist(result, resolved["output"]["dir"], resolved, provenance,
            plots=False)
    print(f"evolve: wrote {result.outdir} (T={dyn['T']:g}, "
          f"final x_cm {traj.x_cm[-1]:.3f})")
    return 0


def cmd_list_models(args) -> int:
    for name in sorted(MODEL_BUILDERS):
        params = ", ".join(_MODEL_PARAMS[name])
        builder = MODEL_BUILDERS[name]
        doc = (builder.__doc__ or "").strip().splitlines()[0]
        print(f"{name}({params})")
        print(f"    {doc}")
    print("\nexperiments:")
    for eid in sorted(EXPERIMENTS):
        print(f"  {eid}: {EXPERIMENTS[eid][2]}")
    return 0


_UNITS = {
    "L_x": "cells", "L_y": "cells", "beta_x": "1", "beta_y": "1",
    "dt": "1/hopping", "T": "1/hopping", "sigma": "cells", "x0": "cells",
    "y0": "cells", "tau": "1", "snapshot_times": "1/hopping",
}


def _schema_epilog(sections: tuple[str, ...]) -> str:
    lines = ["config keys (set with --set SECTION.KEY=VALUE):"]
    for sec in sections:
        lines.append(f"  [{sec}]")
        for key, f in MODEL_SCHEMA[sec].items():
            unit = _UNITS.get(key, "1" if isinstance(f.default, (int, float))
                              and not isinstance(f.default, bool) else "")
            unit_txt = f" [{unit}]" if unit else ""
            lines.append(f"    {key}{unit_txt} = {f.default!r}  {f.doc}".rstrip())
    return "\n".join(lines)


class _RawDefaultsFormatter(argparse.ArgumentDefaultsHelpFormatter,
                            argparse.RawDescriptionHelpFormatter):
    pass


def _raw_formatter(prog):
    return _RawDefaultsFormatter(prog, width=96)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="skinswitch",
        description="Non-Hermitian lattice spectra, skin metrics, and "
                    "wavepacket dynamics.",
        formatter_class=_formatter)
    sub = p.add_subparsers(dest="command", required=True)

    pe = sub.add_parser("experiment", formatter_class=_formatter,
                        help="run a figure-level experiment")
    pe.add_argument("id", choices=sorted(EXPERIMENTS),
                    help="experiment identifier")
    pe.add_argument("--config", default=None,
                    help="TOML config file (defaults used when omitted)")
    pe.add_argument("--set", action="append", default=[], metavar="SEC.KEY=VAL",
                    help="dotted-key override, applied after the config file")
    pe.add_argument("--outdir", default="results",
                    help="output directory root")
    pe.add_argument("--no-plots", action="store_true",
                    help="skip SVG rendering")
    pe.set_defaults(fn=cmd_experiment)

    ps = sub.add_parser("spectrum", formatter_class=_raw_formatter,
                        help="one-shot spectrum and skin report for a model",
                        epilog=_schema_epilog(("model", "geometry", "boundary",
                                               "analysis", "output")))
    ps.add_argument("--config", default=None, help="TOML config file")
    ps.add_argument("--set", action="append", default=[], metavar="SEC.KEY=VAL",
                    help="dotted-key override (e.g. model.name=kagome, "
                         "geometry.L_x=60, boundary.beta_x=0.2)")
    ps.set_defaults(fn=cmd_spectrum)

    pv = sub.add_parser("evolve", formatter_class=_raw_formatter,
                        help="one-shot wavepacket trajectory for a model",
                        epilog=_schema_epilog(("model", "geometry", "boundary",
                                               "dynamics", "output")))
    pv.add_argument("--config", default=None, help="TOML config file")
    pv.add_argument("--set", action="append", default=[], metavar="SEC.KEY=VAL",
                    help="dotted-key override (e.g. dynamics.T=200)")
    pv.set_defaults(fn=cmd_evolve)

    pl = sub.add_parser("list-models", formatter_class=_formatter,
                        help="list built-in models and experiments")
    pl.set_defaults(fn=cmd_list_models)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    try:
        return args.fn(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except FloatingPointError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return RELIABILITY_ERROR


if __name__ == "__main__":
    sys.exit(main())
