"""Command line: ``kivband {fit,band,simulate,coverage,diagnose}``.

Every command writes its fully resolved configuration to ``config.json``
in the output directory next to its results. Settings come from built-in
defaults, overridden by ``--config FILE`` (a JSON object with the same
keys as the flags), overridden by explicit flags.

Exit codes: 0 success, 2 input error, 3 numeric failure, 4 config error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import io as kio
from ._backend import BACKEND
from .bootstrap import DEFAULT_B, confidence_band, run_bootstrap
from .coverage import run_coverage
from .dgp import DgpSpec, simulate_iv
from .diagnostics import RegimeParams, check_regime, spectral_report
from .errors import ConfigError, InputError, NumericalError
from .estimator import RegPair, fit_kiv, predict
from .kernels import KernelSpec, kernel_bound

log = logging.getLogger("kivband")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_CONFIG = 0, 2, 3, 4


@dataclass
class RunConfig:
    command: str = ""
    input: str | None = None
    grid: str | None = None
    out: str = "."
    kernel_x: str = "linear"
    kernel_z: str = "linear"
    lam: float | None = None
    mu: float | None = None
    bootstrap: int = DEFAULT_B
    chi: float = 0.05
    seed: int = 0
    kappa: float | None = None
    statistic: str = "rkhs"
    threads: int = 1
    reps: int = 100
    # synthetic design
    kind: str = "linear"
    n: int = 200
    p: int = 2
    q: int = 3
    rho: float = 0.5
    sigma: float = 1.0
    z_equals_x: bool = False
    # regime parameters (diagnose)
    alpha: float | None = None
    beta: float = 0.5
    rho_x: float | None = None
    rho_z: float | None = None
    iota: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def dgp(self) -> DgpSpec:
        return DgpSpec(
            kind=self.kind,
            n=self.n,
            p=self.p,
            q=self.q,
            rho=self.rho,
            sigma=self.sigma,
            seed=self.seed,
            z_equals_x=self.z_equals_x,
        )

    def regime(self) -> RegimeParams | None:
        vals = (self.alpha, self.rho_x, self.rho_z, self.iota)
        if all(v is None for v in vals):
            return None
        if any(v is None for v in vals):
            raise ConfigError("regime check needs all of --alpha, --rho-x, --rho-z, --iota")
        return RegimeParams(self.alpha, self.rho_x, self.rho_z, self.iota, self.beta)


# flag -> RunConfig field
_FLAGS = {
    "input": ("--input", str, "data CSV (y, x1..xp, z1..zq or x_rank/z_rank)"),
    "grid": ("--grid", str, "CSV of evaluation points (x1..xp or x_rank); default: training X"),
    "out": ("--out", str, "output directory"),
    "kernel_x": ("--kernel-x", str, "covariate kernel, e.g. linear, poly:d=2,c=1, gaussian:l=1, kendall"),
    "kernel_z": ("--kernel-z", str, "instrument kernel"),
    "lam": ("--lambda", float, "second-stage penalty (coverage default n^-1/2)"),
    "mu": ("--mu", float, "first-stage penalty (coverage default n^-1/2)"),
    "bootstrap": ("--bootstrap", int, f"number of bootstrap draws B (default {DEFAULT_B})"),
    "chi": ("--chi", float, "band level: coverage target is 1 - chi"),
    "seed": ("--seed", int, "random seed"),
    "kappa": ("--kappa", float, "override the kernel bound kappa_x"),
    "statistic": ("--statistic", str, "bootstrap norm: rkhs (default) or projector"),
    "threads": ("--threads", int, "worker threads (1 = reference mode)"),
    "reps": ("--reps", int, "Monte Carlo replications"),
    "kind": ("--kind", str, "synthetic design: linear or nonlinear"),
    "n": ("--n", int, "synthetic sample size"),
    "p": ("--p", int, "covariate dimension"),
    "q": ("--q", int, "instrument dimension"),
    "rho": ("--rho", float, "endogeneity in [0, 1)"),
    "sigma": ("--sigma", float, "noise bound"),
    "alpha": ("--alpha", float, "source smoothness in [0, 1]"),
    "beta": ("--beta", float, "link smoothness in [1/2, 1]"),
    "rho_x": ("--rho-x", float, "covariate decay exponent in (1, 2]"),
    "rho_z": ("--rho-z", float, "instrument decay exponent in (1, 2]"),
    "iota": ("--iota", float, "lam = mu^iota exponent in (0, 1]"),
}

_COMMAND_FLAGS = {
    "fit": ["input", "grid", "out", "kernel_x", "kernel_z", "lam", "mu"],
    "band": ["input", "grid", "out", "kernel_x", "kernel_z", "lam", "mu", "bootstrap", "chi", "seed",
             "kappa", "statistic", "threads"],
    "simulate": ["out", "kind", "n", "p", "q", "rho", "sigma", "seed"],
    "coverage": ["out", "kernel_x", "kernel_z", "lam", "mu", "bootstrap", "chi", "seed", "reps", "threads",
                 "kind", "n", "p", "q", "rho", "sigma"],
    "diagnose": ["input", "out", "kernel_x", "kernel_z", "lam", "mu", "kind", "n", "p", "q", "rho", "sigma",
                 "seed", "alpha", "beta", "rho_x", "rho_z", "iota"],
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors are config errors
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kivband", description="Kernel IV regression with bootstrap confidence bands")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "fit": "fit KIV and write predictions",
        "band": "fit, bootstrap and write a uniform confidence band",
        "simulate": "write a synthetic IV dataset",
        "coverage": "Monte Carlo coverage of the bands on synthetic data",
        "diagnose": "spectral diagnostics and regime checks",
    }
    for cmd, keys in _COMMAND_FLAGS.items():
        sp = sub.add_parser(cmd, help=helps[cmd])
        sp.add_argument("--config", help="JSON config; keys mirror the flags")
        for key in keys:
            flag, typ, text = _FLAGS[key]
            sp.add_argument(flag, dest=key, type=typ, default=None, help=text)
        if cmd in ("simulate", "coverage", "diagnose"):
            sp.add_argument("--z-equals-x", dest="z_equals_x", action="store_const", const=True, default=None,
                            help="use the covariates as their own instruments")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    base: dict = {}
    if getattr(args, "config", None):
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        base.update(loaded)
    for key in _FLAGS.keys() | {"z_equals_x"}:
        val = getattr(args, key, None)
        if val is not None:
            base[key] = val
    base["command"] = args.command
    try:
        return RunConfig.from_dict(base)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _kernels(cfg: RunConfig) -> tuple[KernelSpec, KernelSpec]:
    return KernelSpec.parse(cfg.kernel_x), KernelSpec.parse(cfg.kernel_z)


def _reg(cfg: RunConfig, n: int | None = None) -> RegPair:
    lam, mu = cfg.lam, cfg.mu
    if n is not None:
        lam = n**-0.5 if lam is None else lam
        mu = n**-0.5 if mu is None else mu
    if lam is None or mu is None:
        raise ConfigError("--lambda and --mu are required")
    return RegPair(lam, mu)


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(cfg: RunConfig):
    if not cfg.input:
        raise ConfigError("--input is required")
    data = kio.read_dataset(cfg.input)
    kx, kz = _kernels(cfg)
    grid = kio.read_grid(cfg.grid) if cfg.grid else data.X
    return data, kx, kz, grid


def cmd_fit(cfg: RunConfig) -> int:
    data, kx, kz, grid = _load(cfg)
    fit = fit_kiv(data, kx, kz, _reg(cfg))
    h = predict(fit, grid)
    out = _outdir(cfg)
    kio.write_table(out / "predictions.csv", {"x_id": np.arange(len(h)), "h_hat": h})
    kio.write_json(out / "fit.json", {**fit.meta, "kernel_x": str(kx), "kernel_z": str(kz)})
    kio.write_json(out / "config.json", cfg.to_dict())
    return EXIT_OK


def cmd_band(cfg: RunConfig) -> int:
    data, kx, kz, grid = _load(cfg)
    fit = fit_kiv(data, kx, kz, _reg(cfg))
    _, t_hat = run_bootstrap(fit, B=cfg.bootstrap, chi=cfg.chi, seed=cfg.seed, threads=cfg.threads,
                             statistic=cfg.statistic)
    if cfg.kappa is not None:
        kappa, data_dep = cfg.kappa, False
    else:
        pts = np.vstack([data.X, grid]) if cfg.grid else data.X
        kappa, data_dep = kernel_bound(kx, pts), not kx.is_bounded
    band = confidence_band(fit, t_hat, cfg.chi, kappa, grid, kappa_data_dependent=data_dep)
    out = _outdir(cfg)
    kio.write_table(
        out / "band.csv",
        {"x_id": np.arange(len(band.h_hat)), "h_hat": band.h_hat, "lower": band.lower, "upper": band.upper},
    )
    summary = {**band.summary(), "B": cfg.bootstrap, "seed": cfg.seed, "statistic": cfg.statistic,
               "lam": fit.reg.lam, "mu": fit.reg.mu, "kernel_x": str(kx), "kernel_z": str(kz)}
    kio.write_json(out / "summary.json", summary)
    kio.write_json(out / "config.json", cfg.to_dict())
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    data, _ = simulate_iv(cfg.dgp())
    out = _outdir(cfg)
    kio.write_dataset(out / "data.csv", data)
    kio.write_json(out / "config.json", cfg.to_dict())
    return EXIT_OK


def cmd_coverage(cfg: RunConfig) -> int:
    kx, kz = _kernels(cfg)
    dgp = cfg.dgp()
    reg = _reg(cfg, dgp.n)
    result = run_coverage(dgp, cfg.reps, B=cfg.bootstrap, chi=cfg.chi, seed=cfg.seed, lam=reg.lam, mu=reg.mu,
                          kx=kx, kz=kz, threads=cfg.threads)
    result["dgp"] = dgp.to_dict()
    out = _outdir(cfg)
    kio.write_json(out / "coverage.json", result)
    kio.write_json(out / "config.json", cfg.to_dict())
    return EXIT_OK


def cmd_diagnose(cfg: RunConfig) -> int:
    kx, kz = _kernels(cfg)
    if cfg.input:
        data = kio.read_dataset(cfg.input)
    else:
        data, _ = simulate_iv(cfg.dgp())
    reg = _reg(cfg, data.n)
    fit = fit_kiv(data, kx, kz, reg)
    report = spectral_report(fit)
    out = _outdir(cfg)
    kio.write_json(out / "spectral.json", report.to_dict())
    params = cfg.regime()
    if params is not None:
        verdict = check_regime(params, n=data.n, lam=reg.lam, mu=reg.mu)
        kio.write_json(out / "regime.json", verdict.to_dict())
    kio.write_json(out / "config.json", cfg.to_dict())
    return EXIT_OK


COMMANDS = {
    "fit": cmd_fit,
    "band": cmd_band,
    "simulate": cmd_simulate,
    "coverage": cmd_coverage,
    "diagnose": cmd_diagnose,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    log.info("gram backend: %s", BACKEND)
    try:
        cfg = resolve_config(args)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return COMMANDS[cfg.command](cfg)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
