"""Command-line front end.

Scenarios are described by a flat ``key = value`` file (``#`` starts a
comment) and/or ``--set key=value`` overrides::

    resource.family = coherent        # coherent | thermal | displaced_thermal | vacuum
    resource.E      = 3.5
    env.n_env       = 0
    opt.kkt_tol     = 1e-6
    opt.grid        = 1001
    sweep.param     = resource.E      # optional
    sweep.from      = 0.5
    sweep.to        = 10
    sweep.steps     = 20
    out.path        = result.json

Exit codes: 0 success, 2 invalid input, 3 optimizer did not converge
(the best encoding found is still written).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import scipy

from .analytic import (
    flat_encoding_capacity,
    flat_encoding_distribution,
    lapidoth_lower_bound,
    one_ring_capacity,
    two_codeword_capacity,
)
from .channel import ChannelContext, Coherent, DisplacedThermal, Resource, Thermal
from .encoding import Encoding, average_distribution, kkt_residuals
from .fock import CutoffPolicy, default_policy, g_function
from .optimizer import OptimizationError, OptimizerConfig, optimize_encoding, threshold_scan
from .wigner import wigner_radial

__all__ = [
    "EXIT_OK",
    "EXIT_USAGE",
    "EXIT_NOT_CONVERGED",
    "ConfigError",
    "ScenarioConfig",
    "parse_config",
    "load_result",
    "verify_result",
    "cmd_optimize",
    "cmd_bounds",
    "cmd_wigner",
    "main",
]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NOT_CONVERGED = 3

FAMILIES = ("coherent", "thermal", "displaced_thermal", "vacuum")
SWEEPABLE = ("resource.E", "resource.n_res", "resource.amp_sq", "env.n_env")
KNOWN_KEYS = {
    "resource.family", "resource.E", "resource.n_res", "resource.amp_sq",
    "env.n_env", "env.tail_tol",
    "opt.kkt_tol", "opt.grid", "opt.max_support", "opt.max_outer_iters",
    "sweep.param", "sweep.from", "sweep.to", "sweep.steps",
    "out.path",
    "bounds.chi_optimal", "bounds.jobs",
    "wigner.state", "wigner.r_max", "wigner.points",
}


class ConfigError(ValueError):
    """Malformed or inconsistent scenario description."""


def _float(cfg: dict, key: str, default=None) -> float:
    raw = cfg.get(key)
    if raw is None:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return float(default)
    try:
        val = float(raw)
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {raw!r}") from None
    if not math.isfinite(val):
        raise ConfigError(f"{key} must be finite")
    return val


def _int(cfg: dict, key: str, default: int) -> int:
    val = _float(cfg, key, default)
    if val != int(val):
        raise ConfigError(f"{key} must be an integer")
    return int(val)


def _bool(cfg: dict, key: str) -> bool:
    raw = str(cfg.get(key, "false")).strip().lower()
    if raw in ("1", "true", "yes", "on"):
        return True
    if raw in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key} must be a boolean, got {raw!r}")


@dataclasses.dataclass(frozen=True)
class ScenarioConfig:
    """Parsed scenario. ``values`` keeps the raw key/value pairs for sweeps."""

    values: dict
    family: str
    n_env: float
    policy: CutoffPolicy
    optimizer: OptimizerConfig
    sweep_param: str | None = None
    sweep_grid: tuple = ()
    out_path: Path | None = None

    def resource(self, override: dict | None = None) -> Resource:
        v = {**self.values, **(override or {})}
        try:
            if self.family == "coherent":
                return Coherent(_float(v, "resource.E"))
            if self.family == "thermal":
                return Thermal(_float(v, "resource.n_res"))
            if self.family == "displaced_thermal":
                return DisplacedThermal(_float(v, "resource.n_res"), _float(v, "resource.amp_sq"))
            return Thermal(0.0)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def context(self, override: dict | None = None) -> ChannelContext:
        v = {**self.values, **(override or {})}
        n_env = _float(v, "env.n_env", 0.0)
        if n_env < 0:
            raise ConfigError("env.n_env must be >= 0")
        return ChannelContext(self.resource(override), n_env, self.policy)

    def point(self, x: float) -> ChannelContext:
        return self.context({self.sweep_param: repr(float(x))})


def read_kv(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = val
    return out


def parse_config(values: dict) -> ScenarioConfig:
    unknown = sorted(set(values) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(unknown)}")
    family = values.get("resource.family", "coherent").strip().lower()
    if family not in FAMILIES:
        raise ConfigError(f"resource.family must be one of {FAMILIES}, got {family!r}")

    try:
        policy = (CutoffPolicy(tail_tolerance=_float(values, "env.tail_tol"))
                  if "env.tail_tol" in values else default_policy())
        opt = OptimizerConfig(
            kkt_tolerance=_float(values, "opt.kkt_tol", 1e-6),
            grid_size=_int(values, "opt.grid", 1001),
            max_support=_int(values, "opt.max_support", 32),
            max_outer_iters=_int(values, "opt.max_outer_iters", 200),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    sweep_param, grid = values.get("sweep.param"), ()
    if sweep_param is not None:
        if sweep_param not in SWEEPABLE:
            raise ConfigError(f"sweep.param must be one of {SWEEPABLE}")
        lo, hi = _float(values, "sweep.from"), _float(values, "sweep.to")
        steps = _int(values, "sweep.steps", 0)
        if steps < 1:
            raise ConfigError("sweep.steps must be >= 1")
        if steps > 1 and lo == hi:
            raise ConfigError("sweep grid must be strictly monotone")
        grid = tuple(float(x) for x in np.linspace(lo, hi, steps))

    out = values.get("out.path")
    cfg = ScenarioConfig(values, family, _float(values, "env.n_env", 0.0), policy, opt,
                         sweep_param, grid, Path(out) if out else None)
    # fail early on anything that cannot become a ChannelContext
    if grid:
        for x in (grid[0], grid[-1]):
            cfg.point(x)
    else:
        cfg.context()
    return cfg


def _check_output(path: Path | None) -> Path:
    if path is None:
        raise ConfigError("no output path (set out.path or pass -o)")
    if not path.parent.is_dir():
        raise ConfigError(f"output directory {str(path.parent)!r} does not exist")
    return path


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return f"{x:.12g}"


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else _fmt(v) for v in row])


# -- optimize --------------------------------------------------------------------------

def _resource_doc(res: Resource) -> dict:
    return {"family": type(res).__name__, **dataclasses.asdict(res)}


def _result_doc(enc: Encoding, rep, ctx: ChannelContext, cfg: ScenarioConfig,
                runtime: float) -> dict:
    energy = ctx.resource.energy
    return {
        "chi": rep.chi,
        "converged": bool(rep.converged),
        "resource": _resource_doc(ctx.resource),
        "n_env": ctx.n_env,
        "atoms": [
            {"eta": float(e), "weight": float(p), "ring_energy": float(e * energy)}
            for e, p in zip(enc.support, enc.weights)
        ],
        "kkt": {
            "max_grid_residual": rep.grid_residuals,
            "argmax_eta": rep.argmax_eta,
            "support_residuals": [float(x) for x in rep.support_residuals],
            "weighted_support_residual": rep.weighted_support_residual,
            "grid_size": rep.grid_size,
            "tolerance": rep.tolerance,
            "iterations": rep.iterations,
            "message": rep.message,
        },
        "config": dict(sorted(cfg.values.items())),
        "metadata": {
            "tail_tolerance": ctx.policy.tail_tolerance,
            "max_cutoff": ctx.policy.max_cutoff,
            "runtime_seconds": runtime,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
    }


def load_result(path) -> tuple[Encoding, ChannelContext, dict]:
    """Rebuild the encoding and channel context stored in a result file."""
    doc = json.loads(Path(path).read_text())
    res = dict(doc["resource"])
    kind = res.pop("family")
    cls = {"Coherent": Coherent, "Thermal": Thermal, "DisplacedThermal": DisplacedThermal}[kind]
    meta = doc["metadata"]
    ctx = ChannelContext(cls(**res), doc["n_env"],
                         CutoffPolicy(meta["tail_tolerance"], meta["max_cutoff"]))
    enc = Encoding([a["eta"] for a in doc["atoms"]], [a["weight"] for a in doc["atoms"]])
    return enc, ctx, doc


def verify_result(path, tol: float = 1e-9) -> bool:
    """Re-run the KKT check on a stored encoding and compare chi."""
    enc, ctx, doc = load_result(path)
    rep = kkt_residuals(enc, ctx)
    return abs(rep.chi - doc["chi"]) <= tol


def _optimize_one(cfg: ScenarioConfig, out: Path) -> int:
    ctx = cfg.context()
    t0 = time.perf_counter()
    status = EXIT_OK
    try:
        enc, rep = optimize_encoding(ctx, cfg.optimizer)
    except OptimizationError as exc:
        enc, rep, status = exc.best, exc.report, EXIT_NOT_CONVERGED
    doc = _result_doc(enc, rep, ctx, cfg, time.perf_counter() - t0)
    out.write_text(json.dumps(doc, indent=2) + "\n")
    if status != EXIT_OK:
        print(f"not converged: {rep.message}", file=sys.stderr)
    return status


def _optimize_sweep(cfg: ScenarioConfig, out: Path) -> int:
    rows = threshold_scan(cfg.point, cfg.sweep_grid, cfg.optimizer)
    header = ["parameter", "support_size", "chi", "max_grid_residual", "converged",
              "support", "weights"]
    body = []
    for r in rows:
        enc, rep = r.encoding, r.report
        body.append([
            r.parameter, r.support_size, r.chi,
            rep.grid_residuals if rep is not None else None,
            "true" if r.ok else "false",
            ";".join(_fmt(x) for x in enc.support) if enc is not None else "",
            ";".join(_fmt(x) for x in enc.weights) if enc is not None else "",
        ])
    _write_csv(out, header, body)
    return EXIT_OK if all(r.ok for r in rows) else EXIT_NOT_CONVERGED


def cmd_optimize(cfg: ScenarioConfig) -> int:
    """Optimize the encoding (JSON result) or scan a parameter (CSV)."""
    out = _check_output(cfg.out_path)
    if cfg.sweep_grid:
        return _optimize_sweep(cfg, out)
    return _optimize_one(cfg, out)


# -- bounds ----------------------------------------------------------------------------

BOUNDS_COLUMNS = ["parameter", "g", "one_ring", "flat", "lapidoth", "two_codeword", "chi_optimal"]


def _bounds_row(cfg: ScenarioConfig, x: float, with_optimum: bool) -> list:
    ctx = cfg.point(x) if cfg.sweep_param else cfg.context()
    res = ctx.resource
    chi_opt = None
    if with_optimum:
        try:
            chi_opt = optimize_encoding(ctx, cfg.optimizer)[1].chi
        except OptimizationError as exc:
            chi_opt = exc.report.chi
    if isinstance(res, Coherent) and ctx.n_env == 0.0:
        E = res.E
        return [x, g_function(E), one_ring_capacity(E, ctx.policy),
                flat_encoding_capacity(E, ctx.policy) if E > 0 else 0.0,
                lapidoth_lower_bound(E) if E > 0 else None, None, chi_opt]
    if isinstance(res, Thermal) and res.n_res == 0.0 and ctx.n_env > 0:
        # vacuum resource: output entropy ceiling g(n_env), pure codewords at eta=1
        return [x, g_function(ctx.n_env), 0.0, None, None,
                two_codeword_capacity(ctx.n_env)[1], chi_opt]
    raise ConfigError("bounds need a coherent resource with env.n_env = 0 "
                      "or the vacuum resource with env.n_env > 0")


def cmd_bounds(cfg: ScenarioConfig) -> int:
    """Tabulate closed-form bounds over a parameter grid (CSV)."""
    out = _check_output(cfg.out_path)
    with_opt = _bool(cfg.values, "bounds.chi_optimal")
    jobs = _int(cfg.values, "bounds.jobs", 1)
    grid = cfg.sweep_grid or (float("nan"),)
    if not cfg.sweep_grid:
        res = cfg.resource()
        grid = (res.energy if cfg.family == "coherent" else cfg.n_env,)
    args = [(cfg, x, with_opt) for x in grid]
    if jobs > 1:
        # map() keeps grid order whatever order the workers finish in
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_bounds_row, *zip(*args)))
    else:
        rows = [_bounds_row(*a) for a in args]
    _write_csv(out, BOUNDS_COLUMNS, rows)
    return EXIT_OK


# -- wigner ----------------------------------------------------------------------------

def cmd_wigner(cfg: ScenarioConfig) -> int:
    """Radial Wigner profile of the optimal (or flat) average state (CSV)."""
    out = _check_output(cfg.out_path)
    ctx = cfg.context()
    state = cfg.values.get("wigner.state", "optimal").strip().lower()
    status = EXIT_OK
    if state == "flat":
        if not isinstance(ctx.resource, Coherent) or ctx.n_env != 0.0:
            raise ConfigError("wigner.state = flat needs a coherent resource with env.n_env = 0")
        dist = flat_encoding_distribution(ctx.resource.E, ctx.policy)
    elif state == "optimal":
        try:
            enc, _ = optimize_encoding(ctx, cfg.optimizer)
        except OptimizationError as exc:
            enc, status = exc.best, EXIT_NOT_CONVERGED
        dist = average_distribution(enc, ctx)
    else:
        raise ConfigError("wigner.state must be 'optimal' or 'flat'")
    mean = dist.mean()
    r_max = _float(cfg.values, "wigner.r_max", math.sqrt(mean) + 3.0 * math.sqrt(mean + 1.0) + 3.0)
    points = _int(cfg.values, "wigner.points", 601)
    if r_max <= 0 or points < 2:
        raise ConfigError("need wigner.r_max > 0 and wigner.points >= 2")
    prof = wigner_radial(dist, np.linspace(0.0, r_max, points))
    _write_csv(out, ["r", "W"], zip(prof.radii, prof.values))
    return status


# -- entry point -----------------------------------------------------------------------

COMMANDS = {"optimize": cmd_optimize, "bounds": cmd_bounds, "wigner": cmd_wigner}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thermenc", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sp = sub.add_parser(name, help=(fn.__doc__ or "").strip().split("\n")[0] or None)
        sp.add_argument("config", nargs="?", help="key = value scenario file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override or add a config entry (repeatable)")
        sp.add_argument("-o", "--output", help="output path (overrides out.path)")
    vp = sub.add_parser("verify", help="re-check a result file written by 'optimize'")
    vp.add_argument("result")
    return p


def _gather(args) -> dict:
    values = {}
    if args.config:
        try:
            values.update(read_kv(Path(args.config).read_text()))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        values[k.strip()] = v.strip()
    if args.output:
        values["out.path"] = args.output
    return values


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        try:
            ok = verify_result(args.result)
        except (OSError, KeyError, ValueError) as exc:
            print(f"thermenc: {exc}", file=sys.stderr)
            return EXIT_USAGE
        print("ok" if ok else "chi mismatch")
        return EXIT_OK if ok else EXIT_NOT_CONVERGED
    try:
        cfg = parse_config(_gather(args))
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"thermenc: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
