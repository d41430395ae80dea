"""Command-line front end: ``deconvkit {estimate,compare-pce,rates,phiu,simulate}``.

Every run resolves its configuration (defaults < --config file < flags),
writes CSV/JSON artifacts into --out and finishes by writing manifest.json.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import re
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (RateExperiment, TrueDensity, default_h_grid, oracle_bandwidth,
                       rate_experiment)
from .curves import ContaminatedSample, CurveEstimate, CurveMeta, read_columns, write_columns
from .deconv_kernel import DeconvKernelPlan
from .density import deconv_kde, default_grid, kde
from .error_models import ErrorModel, ReplicatedSample, estimate_abs_phi_U
from .errors import (ConfigInvalid, DeconvError, InsufficientReplicates,
                     UndefinedMoment, UnsupportedKernel)
from .kernels import KernelSpec
from .min_contrast import PceConfig, pce_estimate, verify_theorem
from .regression import (RegressionConfig, deconv_local_polynomial, local_constant,
                         local_polynomial)
from .simulation import Scenario, generate, generate_replicates, preset, resolve_threads

log = logging.getLogger("deconvkit")

EXIT_CONFIG = 2
EXIT_NUMERIC = 3

DEFAULTS = {
    "estimate": {"preset": None, "dataset": None, "n": None, "estimator": "deconv-kde",
                 "kernel": "sinc", "error": None, "h": "oracle", "p": 1,
                 "grid_size": 512, "grid_lo": None, "grid_hi": None, "quad.nodes": 4097,
                 "h_grid_size": 30, "truncate": False},
    "compare-pce": {"preset": "fig31", "dataset": None, "n": None, "error": None, "h": "oracle",
                    "k0": 255, "outside_probes": 50, "grid_size": 512, "quad.nodes": 4097,
                    "h_grid_size": 30},
    "rates": {"preset": "fig31", "kernel": "fp:r=2,s=2", "error": None,
              "sizes": [250, 500, 1000, 2000, 4000, 8000], "replicates": 40,
              "quad.nodes": 513, "h_grid_size": 30, "bootstrap": 200},
    "phiu": {"dataset": None, "preset": None, "n": 5000, "m": 2, "error": "laplace:b=1",
             "t_max": 3.0, "t_size": 61},
    "simulate": {"preset": "fig31", "n": None, "error": None, "m": 1},
}


class ConfigError(Exception):
    pass


def resolve_config(command: str, args) -> dict:
    cfg = dict(DEFAULTS[command])
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            loaded = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        unknown = set(loaded) - set(cfg) - {"seed"}
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
        cfg.update(loaded)
    cfg["seed"] = int(args.seed if args.seed is not None else cfg.get("seed", 0))
    if getattr(args, "preset", None):
        cfg["preset"] = args.preset
    for item in args.set or []:
        key, sep, val = item.partition("=")
        if not sep or key not in cfg:
            raise ConfigError(f"bad override {item!r}; expected KEY=VALUE with KEY in {sorted(cfg)}")
        try:
            cfg[key] = json.loads(val)
        except json.JSONDecodeError:
            cfg[key] = val
    cfg["threads"] = resolve_threads(args.threads)
    return cfg


def _scenario(cfg: dict) -> Scenario:
    if not cfg.get("preset"):
        raise ConfigError("missing key 'preset' (or 'dataset')")
    try:
        scn = preset(cfg["preset"], cfg.get("n"), seed=cfg["seed"])
    except ConfigInvalid as exc:
        raise ConfigError(str(exc)) from None
    if cfg.get("error"):
        from dataclasses import replace
        scn = replace(scn, error=ErrorModel.parse(cfg["error"], scn.truth.variance))
    return scn


def _load_sample(cfg: dict) -> tuple[ContaminatedSample, Scenario | None]:
    if cfg.get("dataset"):
        path = Path(cfg["dataset"])
        if not path.is_file():
            raise ConfigError(f"key 'dataset': file not found: {path}")
        return ContaminatedSample.from_csv(path), None
    if cfg.get("preset"):
        scn = _scenario(cfg)
        return generate(scn), scn
    raise ConfigError("missing key 'dataset' (or 'preset'): nothing to estimate from")


def _error_for(cfg: dict, scn: Scenario | None, var_x: float | None) -> ErrorModel:
    if cfg.get("error"):
        return ErrorModel.parse(cfg["error"], var_x)
    if scn is not None:
        return scn.error
    raise ConfigError("missing key 'error' (required with a dataset)")


def _grid(cfg: dict, w, h: float) -> np.ndarray:
    if cfg.get("grid_lo") is not None and cfg.get("grid_hi") is not None:
        return np.linspace(float(cfg["grid_lo"]), float(cfg["grid_hi"]), int(cfg["grid_size"]))
    return default_grid(w, h, int(cfg["grid_size"]))


def _oracle_h(sample, scn, kind, error, kernel, cfg) -> float:
    if scn is None:
        raise ConfigError("h='oracle' needs a preset with a known truth")
    h_grid = default_h_grid(kernel, int(cfg["h_grid_size"]))
    h, _ = oracle_bandwidth(sample, scn.truth, kind, error, h_grid, kernel)
    return h


def cmd_estimate(cfg: dict, out: Path) -> list[Path]:
    sample, scn = _load_sample(cfg)
    kernel = KernelSpec.parse(cfg["kernel"], int(cfg["quad.nodes"]))
    kind = cfg["estimator"]
    var_x = scn.truth.variance if scn else None
    error = _error_for(cfg, scn, var_x) if kind.startswith("deconv") else ErrorModel.degenerate()
    if cfg["h"] == "oracle":
        if kind not in ("kde", "deconv-kde"):
            raise ConfigError("h='oracle' is available for kde and deconv-kde only")
        h = _oracle_h(sample, scn, kind.replace("-", "_"), error, kernel, cfg)
    else:
        h = float(cfg["h"])
    cfg["h_resolved"] = h
    grid = _grid(cfg, sample.w, h)
    if kind == "kde":
        est = kde(sample.w, kernel, h, grid)
    elif kind == "deconv-kde":
        est = deconv_kde(sample, DeconvKernelPlan(kernel, error, h, int(cfg["quad.nodes"])), grid,
                         truncate=bool(cfg["truncate"]))
    elif kind in ("local-constant", "local-polynomial", "deconv-regression"):
        if sample.y is None:
            raise ConfigError("regression estimators need responses (column 'y')")
        rc = RegressionConfig(0 if kind == "local-constant" else int(cfg["p"]), kernel, h)
        if kind == "local-constant":
            est = local_constant(sample.w, sample.y, rc, grid)
        elif kind == "local-polynomial":
            est = local_polynomial(sample.w, sample.y, rc, grid)
        else:
            est = deconv_local_polynomial(sample, rc, error, grid, int(cfg["quad.nodes"]))
    else:
        raise ConfigError(f"unknown estimator {kind!r}")
    est.meta.seed = cfg["seed"]
    path = out / "curve.csv"
    est.to_csv(path)
    return [path, path.with_suffix(".json")]


def cmd_compare_pce(cfg: dict, out: Path) -> list[Path]:
    sample, scn = _load_sample(cfg)
    kernel = KernelSpec.sinc(int(cfg["quad.nodes"]))
    error = _error_for(cfg, scn, scn.truth.variance if scn else None)
    h = _oracle_h(sample, scn, "deconv_kde", error, kernel, cfg) if cfg["h"] == "oracle" else float(cfg["h"])
    pc = PceConfig.from_bandwidth(h, int(cfg["k0"]), int(cfg["quad.nodes"]))
    cfg["h_resolved"], cfg["ell"] = h, pc.ell
    extra = int(cfg["outside_probes"])
    probe_ks = np.arange(-pc.k0 - extra, pc.k0 + extra + 1)
    grid = np.union1d(default_grid(sample.w, h, int(cfg["grid_size"])), probe_ks / pc.ell)
    grid = grid[np.concatenate(([True], np.diff(grid) > 1e-12))]
    decon = deconv_kde(sample, pc.sinc_plan(error), grid)
    with warnings.catch_warnings():
        # the shared grid deliberately reaches past k0/ell to show the vanishing region
        warnings.simplefilter("ignore", RuntimeWarning)
        pce = pce_estimate(sample, error, pc, grid)
    report = verify_theorem(sample, error, pc, probe_ks)
    decon.meta.seed = pce.curve.meta.seed = cfg["seed"]
    paths = [out / "decon.csv", out / "pce.csv", out / "coefficients.csv", out / "theorem.json"]
    decon.to_csv(paths[0])
    pce.to_csv(paths[1], paths[2])
    paths[3].write_text(json.dumps(report.as_dict(), indent=2, sort_keys=True, default=float) + "\n")
    log.info("theorem check: %s", "PASS" if report.passed else "FAIL")
    return [paths[0], paths[0].with_suffix(".json"), paths[1], paths[1].with_suffix(".json"),
            paths[2], paths[3]]


def cmd_rates(cfg: dict, out: Path) -> list[Path]:
    sizes = [int(n) for n in cfg["sizes"]]
    if len(sizes) < 3:
        raise ConfigError("key 'sizes': at least 3 sample sizes are required")
    if int(cfg["replicates"]) < 1:
        raise ConfigError("key 'replicates' must be >= 1")
    scn = _scenario(cfg)
    kernel = KernelSpec.parse(cfg["kernel"], int(cfg["quad.nodes"]))
    try:
        exp = RateExperiment(scn.truth, scn.error, kernel, sizes, int(cfg["replicates"]),
                             cfg["seed"], default_h_grid(kernel, int(cfg["h_grid_size"])),
                             int(cfg["quad.nodes"]), bootstrap=int(cfg["bootstrap"]),
                             threads=cfg["threads"])
    except ConfigInvalid as exc:
        raise ConfigError(str(exc)) from None
    res = rate_experiment(exp)
    table = res.table()
    paths = [out / "rates.csv", out / "slope.json"]
    write_columns(paths[0], {k: table[k] for k in ("n", "median_ise", "q25", "q75")})
    paths[1].write_text(json.dumps(res.slope_report(), indent=2, sort_keys=True) + "\n")
    return paths


def cmd_phiu(cfg: dict, out: Path) -> list[Path]:
    if cfg.get("dataset"):
        path = Path(cfg["dataset"])
        if not path.is_file():
            raise ConfigError(f"key 'dataset': file not found: {path}")
        cols = read_columns(path)
        names = [k for k in cols if re.fullmatch(r"w\d+", k)] or [k for k in cols if k == "w"]
        if not names:
            raise ConfigError(f"key 'dataset': no replicate columns w1, w2, ... in {path}")
        data = ReplicatedSample(np.column_stack([cols[k] for k in names]))
    elif cfg.get("preset"):
        scn = _scenario(cfg)
        data = generate_replicates(scn, int(cfg["m"]))
    else:
        truth = TrueDensity.gaussian()
        scn = Scenario(truth, ErrorModel.parse(cfg["error"], truth.variance), int(cfg["n"]), seed=cfg["seed"])
        data = generate_replicates(scn, int(cfg["m"]))
    t = np.linspace(0.0, float(cfg["t_max"]), int(cfg["t_size"]))
    est = estimate_abs_phi_U(data, t)
    path = out / "phiu.csv"
    write_columns(path, {"t": t, "abs_phi_hat": est})
    return [path]


def cmd_simulate(cfg: dict, out: Path) -> list[Path]:
    scn = _scenario(cfg)
    if int(cfg["m"]) > 1:
        data = generate_replicates(scn, int(cfg["m"]))
        path = out / "replicates.csv"
        write_columns(path, {f"w{j + 1}": data.rows[:, j] for j in range(data.m)})
    else:
        path = out / "sample.csv"
        generate(scn).to_csv(path)
    return [path]


COMMANDS = {"estimate": cmd_estimate, "compare-pce": cmd_compare_pce, "rates": cmd_rates,
            "phiu": cmd_phiu, "simulate": cmd_simulate}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deconvkit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--threads", type=int, help="worker threads (default: $DECONV_THREADS or 1)")
        p.add_argument("--preset", help="scenario preset name")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        cfg = resolve_config(args.command, args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        artifacts = COMMANDS[args.command](cfg, out)
    except (ConfigError, ConfigInvalid, InsufficientReplicates, UnsupportedKernel,
            UndefinedMoment, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DeconvError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    manifest = {"command": args.command, "config": cfg, "seed": cfg["seed"],
                "artifacts": [str(p) for p in artifacts], "version": __version__,
                "duration_s": round(time.perf_counter() - start, 3)}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
