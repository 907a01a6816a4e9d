"""Command-line experiment runner; every command writes a CSV table plus
a JSON sidecar with the full configuration.

A plain key=value config file (--config) can preset any option; flags
given on the command line win over the file.  Seeds are always explicit.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .chain import ChainSpec, sample_disorder, substream
from .boxcount import box_count, fit_dimension, transient_trim
from .evolve import fidelity_series, transfer_time
from .levelstats import collect_spacings, eta, eta_curve, spacing_histogram
from .scans import (FidelityPoint, ScanConfig, fit_scaling, points_from_rows,
                    perturbation_comparison, run_correlated_scan, scan_fidelity,
                    threshold_extract)
from .tableio import read_csv, write_csv, write_sidecar


def _config_file_values(path) -> dict:
    values = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SystemExit(f"config file {path}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        values[key.strip().replace("-", "_")] = val.strip()
    return values


def _coerce(raw: str, option: dict):
    kind = option.get("type", str)
    if option.get("nargs"):
        return tuple(kind(tok) for tok in raw.replace(",", " ").split())
    return kind(raw)


def _resolve(args: argparse.Namespace, options: dict) -> dict:
    """Merge precedence: defaults < config file < explicit flags."""
    file_values = _config_file_values(args.config) if args.config else {}
    merged = {}
    for dest, option in options.items():
        flag_value = getattr(args, dest)
        if flag_value is not None:
            merged[dest] = tuple(flag_value) if option.get("nargs") else flag_value
        elif dest in file_values:
            merged[dest] = _coerce(file_values[dest], option)
        else:
            merged[dest] = option.get("default")
    missing = [d for d, o in options.items()
               if o.get("required") and merged[d] is None]
    if missing:
        raise SystemExit(f"missing required option(s): "
                         + ", ".join("--" + m.replace("_", "-") for m in missing))
    return merged


def _add_options(parser: argparse.ArgumentParser, options: dict):
    parser.add_argument("--config", default=None, help="key=value preset file")
    for dest, option in options.items():
        kwargs = {"dest": dest, "default": None, "type": option.get("type", str),
                  "help": option.get("help", "")}
        if option.get("nargs"):
            kwargs["nargs"] = option["nargs"]
        if option.get("choices"):
            kwargs["choices"] = option["choices"]
        parser.add_argument("--" + dest.replace("_", "-"), **kwargs)


def _common(extra: dict, seed=True, out=True) -> dict:
    options = {}
    if seed:
        options["seed"] = {"type": int, "required": True, "help": "master seed (required)"}
    options["j"] = {"type": float, "default": 1.0, "help": "base coupling J"}
    options.update(extra)
    if out:
        options["out"] = {"type": str, "required": True, "help": "output CSV path"}
    return options


OPTIONS = {
    "transfer": _common({
        "n": {"type": int, "required": True},
        "eps_j": {"type": float, "default": 0.0},
        "eps_b": {"type": float, "default": 0.0},
        "corr_p": {"type": float, "default": 0.5},
        "t_max": {"type": float, "default": 10.0},
        "dt": {"type": float, "default": 0.01},
    }),
    "scan": _common({
        "n": {"type": int, "nargs": "+", "required": True},
        "eps_j": {"type": float, "nargs": "+", "default": (0.0,)},
        "eps_b": {"type": float, "nargs": "+", "default": (0.0,)},
        "corr_p": {"type": float, "default": 0.5},
        "n_real": {"type": int, "default": 1000},
        "t_eval": {"type": float, "default": None},
    }),
    "corr-scan": _common({
        "n": {"type": int, "nargs": "+", "required": True},
        "eps_j": {"type": float, "nargs": "+", "required": True},
        "corr_p": {"type": float, "nargs": "+", "default": (0.1, 0.25, 0.5, 0.75, 0.9)},
        "n_real": {"type": int, "default": 200},
        "t_eval": {"type": float, "default": None},
    }),
    "fit-scaling": {
        "table": {"type": str, "required": True, "help": "scan CSV to fit"},
        "out": {"type": str, "required": True},
    },
    "threshold": {
        "table": {"type": str, "required": True, "help": "scan CSV to analyze"},
        "f_target": {"type": float, "nargs": "+", "default": (0.9,)},
        "param": {"type": str, "default": "eps_j", "choices": ("eps_j", "eps_b")},
        "out": {"type": str, "required": True},
    },
    "spectrum": _common({
        "n": {"type": int, "required": True},
        "eps_j": {"type": float, "default": 0.0},
        "eps_b": {"type": float, "default": 0.0},
        "corr_p": {"type": float, "default": 0.5},
        "n_real": {"type": int, "default": 1000},
        "bin_width": {"type": float, "default": 0.05},
    }),
    "eta-scan": _common({
        "n": {"type": int, "nargs": "+", "required": True},
        "eps_j": {"type": float, "nargs": "+", "required": True},
        "n_real": {"type": int, "default": 1000},
        "bin_width": {"type": float, "default": 0.05},
    }),
    "fractal": _common({
        "n": {"type": int, "required": True},
        "eps_j": {"type": float, "default": 0.0},
        "eps_b": {"type": float, "default": 0.0},
        "corr_p": {"type": float, "default": 0.5},
        "t_max": {"type": float, "default": 1e4},
        "dt": {"type": float, "default": 0.05},
        "l_min": {"type": float, "default": None, "help": "manual fit window lower edge"},
        "l_max": {"type": float, "default": None, "help": "manual fit window upper edge"},
    }),
    "perturbation": _common({
        "n": {"type": int, "required": True},
        "eps": {"type": float, "nargs": "+", "default": (1e-3, 3e-3, 1e-2)},
        "sector": {"type": str, "default": "both", "choices": ("j", "b", "both")},
        "n_real": {"type": int, "default": 10000},
        "t": {"type": float, "default": None},
    }),
}


def _cmd_transfer(cfg):
    spec = ChainSpec(n_sites=cfg["n"], base_coupling=cfg["j"], eps_j=cfg["eps_j"],
                     eps_b=cfg["eps_b"], corr_p=cfg["corr_p"])
    realization = sample_disorder(spec, substream(cfg["seed"], 0))
    series = fidelity_series(spec, realization, cfg["t_max"], cfg["dt"])
    rows = zip(series.times, series.amplitude.real, series.amplitude.imag,
               series.fidelity)
    write_csv(cfg["out"], ("time", "amp_real", "amp_imag", "fidelity"), rows,
              metadata=_meta(cfg, command="transfer"))
    write_sidecar(cfg["out"], {"command": "transfer", "config": _meta(cfg)})


def _scan_config(cfg, corr_values=None) -> ScanConfig:
    return ScanConfig(
        n_values=cfg["n"], seed=cfg["seed"],
        eps_j_values=cfg.get("eps_j", (0.0,)),
        eps_b_values=cfg.get("eps_b", (0.0,)),
        corr_p=cfg["corr_p"] if not corr_values else 0.5,
        corr_p_values=corr_values or (),
        n_real=cfg["n_real"], base_coupling=cfg["j"], t_eval=cfg.get("t_eval"))


def _write_points(cfg, points, command):
    write_csv(cfg["out"], FidelityPoint.HEADER, (p.row() for p in points),
              metadata=_meta(cfg, command=command))
    write_sidecar(cfg["out"], {"command": command, "config": _meta(cfg)})


def _cmd_scan(cfg):
    _write_points(cfg, scan_fidelity(_scan_config(cfg)), "scan")


def _cmd_corr_scan(cfg):
    config = _scan_config({**cfg, "eps_b": (0.0,)}, corr_values=cfg["corr_p"])
    _write_points(cfg, run_correlated_scan(config), "corr-scan")


def _cmd_fit_scaling(cfg):
    metadata, _, rows = read_csv(cfg["table"])
    fit = fit_scaling(points_from_rows(rows))
    out_rows = [(name, fit.params[name], fit.stderr[name]) for name in sorted(fit.params)]
    write_csv(cfg["out"], ("parameter", "estimate", "stderr"), out_rows,
              metadata={"table": cfg["table"], **metadata})
    write_sidecar(cfg["out"], {"command": "fit-scaling", "table": cfg["table"],
                               "fit": _fit_payload(fit)})


def _cmd_threshold(cfg):
    metadata, _, rows = read_csv(cfg["table"])
    points = points_from_rows(rows)
    out_rows, fits = [], {}
    for target in cfg["f_target"]:
        scaling = threshold_extract(points, target, param=cfg["param"])
        for n in sorted(scaling.thresholds):
            out_rows.append((cfg["param"], target, n, scaling.thresholds[n]))
        fits[format(target, ".17g")] = {
            "fit": _fit_payload(scaling.fit),
            "skipped": list(scaling.skipped),
        }
    write_csv(cfg["out"], ("param", "f_target", "n_sites", "eps_c"), out_rows,
              metadata={"table": cfg["table"], "param": cfg["param"], **metadata})
    write_sidecar(cfg["out"], {"command": "threshold", "table": cfg["table"],
                               "param": cfg["param"], "targets": fits})


def _cmd_spectrum(cfg):
    spec = ChainSpec(n_sites=cfg["n"], base_coupling=cfg["j"], eps_j=cfg["eps_j"],
                     eps_b=cfg["eps_b"], corr_p=cfg["corr_p"])
    sample = collect_spacings(spec, cfg["n_real"], cfg["seed"])
    hist = spacing_histogram(sample.spacings, cfg["bin_width"])
    value = eta(sample, cfg["bin_width"])
    rows = zip(hist.edges[:-1], hist.edges[1:], hist.centers, hist.density)
    write_csv(cfg["out"], ("bin_left", "bin_right", "bin_center", "density"), rows,
              metadata=_meta(cfg, command="spectrum", eta=value,
                             n_spacings=sample.spacings.size))
    write_sidecar(cfg["out"], {"command": "spectrum", "config": _meta(cfg),
                               "eta": value, "n_spacings": int(sample.spacings.size)})


def _cmd_eta_scan(cfg):
    rows = []
    for ni, n_sites in enumerate(cfg["n"]):
        values = eta_curve(n_sites, cfg["eps_j"], cfg["n_real"], cfg["seed"],
                           base_coupling=cfg["j"], bin_width=cfg["bin_width"],
                           key_prefix=(ni,))
        rows.extend((n_sites, eps, val)
                    for eps, val in zip(cfg["eps_j"], values))
    write_csv(cfg["out"], ("n_sites", "eps_j", "eta"), rows,
              metadata=_meta(cfg, command="eta-scan"))
    write_sidecar(cfg["out"], {"command": "eta-scan", "config": _meta(cfg)})


def _cmd_fractal(cfg):
    spec = ChainSpec(n_sites=cfg["n"], base_coupling=cfg["j"], eps_j=cfg["eps_j"],
                     eps_b=cfg["eps_b"], corr_p=cfg["corr_p"])
    series = fidelity_series(spec, sample_disorder(spec, substream(cfg["seed"], 0)),
                             cfg["t_max"], cfg["dt"])
    trimmed, reached = transient_trim(series)
    curve = box_count(trimmed)
    window = None
    if cfg["l_min"] is not None and cfg["l_max"] is not None:
        window = (cfg["l_min"], cfg["l_max"])
    fit = fit_dimension(curve, window=window)
    rows = zip(curve.lengths, curve.m_values)
    write_csv(cfg["out"], ("box_length", "m"), rows,
              metadata=_meta(cfg, command="fractal",
                             dimension=fit.params["dimension"]))
    write_sidecar(cfg["out"], {
        "command": "fractal", "config": _meta(cfg), "fit": _fit_payload(fit),
        "transient_reached": bool(reached),
        "trimmed_samples": len(series) - len(trimmed.times),
    })


def _cmd_perturbation(cfg):
    sectors = ("j", "b") if cfg["sector"] == "both" else (cfg["sector"],)
    rows, payload = [], {}
    for sector in sectors:
        result = perturbation_comparison(cfg["n"], cfg["eps"], sector,
                                         cfg["n_real"], cfg["seed"],
                                         base_coupling=cfg["j"], t=cfg.get("t"))
        for r in result["rows"]:
            rows.append((sector, r["eps"], r["fbar_mc"], r["stderr"], r["f_pert"],
                         r["infid_mc"], r["infid_pert"], r["ratio"],
                         r["mc_over_sector_sum"]))
        payload[sector] = {
            "sector_sum": result["sector_sum"],
            "slope_fit": _fit_payload(result["slope_fit"]) if result["slope_fit"] else None,
            "coefficients_step": result["coefficients_step"],
            "t": result["t"],
        }
    write_csv(cfg["out"],
              ("sector", "eps", "fbar_mc", "stderr", "f_pert",
               "infid_mc", "infid_pert", "ratio", "mc_over_sector_sum"),
              rows, metadata=_meta(cfg, command="perturbation"))
    write_sidecar(cfg["out"], {"command": "perturbation", "config": _meta(cfg),
                               "sectors": payload})


def _meta(cfg, **extra) -> dict:
    meta = {}
    for key, value in cfg.items():
        if key == "out" or value is None:
            continue
        if isinstance(value, tuple):
            meta[key] = " ".join(format(v, ".17g") if isinstance(v, float) else str(v)
                                 for v in value)
        else:
            meta[key] = value
    meta.update(extra)
    return meta


def _fit_payload(fit) -> dict:
    return {"model": fit.model, "params": fit.params, "stderr": fit.stderr,
            "residual_norm": fit.residual_norm, "mask": list(fit.mask),
            "window": list(fit.window) if fit.window else None}


HANDLERS = {
    "transfer": _cmd_transfer,
    "scan": _cmd_scan,
    "corr-scan": _cmd_corr_scan,
    "fit-scaling": _cmd_fit_scaling,
    "threshold": _cmd_threshold,
    "spectrum": _cmd_spectrum,
    "eta-scan": _cmd_eta_scan,
    "fractal": _cmd_fractal,
    "perturbation": _cmd_perturbation,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinchain",
        description="Disordered spin-chain state transfer experiments")
    parser.add_argument("--version", action="version", version=f"spinchain {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, options in OPTIONS.items():
        _add_options(sub.add_parser(name), options)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = _resolve(args, OPTIONS[args.command])
    HANDLERS[args.command](cfg)
    return 0


if __name__ == "__main__":
    sys.exit(main())
