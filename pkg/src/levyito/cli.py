"""Batch front-end: ``levyito <command> CONFIG`` or ``levyito run CONFIG``.

A config file is INI-style text with ``[run]``, ``[model]``, ``[function]``,
``[numerics]`` and ``[contract]`` sections.  Every CSV written starts with
``#`` lines echoing the full config, the tool version and the seed.
Exit codes: 0 ok, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, NumericalError
from .ito_engine import decomposition_check, ito_residual_study
from .levy_core import MODEL_KEYS, LevyModel, model_from_mapping, simulate_path, write_path_csv
from .mc_pricer import default_workers, price_barrier_curve
from .pide_solver import PIDEParams, interpolate_price, solve_pide
from .weakfn import WeakFunction, mollify, mollify_derivative, parse_function_spec

log = logging.getLogger(__name__)

COMMANDS = ("simulate", "verify-ito", "decompose", "mollify-demo", "price-pide", "price-mc", "compare")
STOCHASTIC = {"simulate", "verify-ito", "decompose", "price-mc", "compare"}

SECTION_KEYS = {
    "run": {"command", "output", "seed", "workers"},
    "model": MODEL_KEYS,
    "function": {"name"},
    "numerics": {
        "t", "deltas", "n_paths", "quad_tol", "path_index", "x0", "epsilons", "points",
        "n_x", "n_t", "extrapolate", "width", "tolerance",
    },
    "contract": {"r", "t", "k", "d", "spot", "spots", "carry"},
}

NUMERIC_DEFAULTS = {
    "t": "1.0",
    "n_paths": "100",
    "quad_tol": "1e-8",
    "path_index": "0",
    "x0": "0.0",
    "n_x": "400",
    "n_t": "400",
    "extrapolate": "true",
    "width": "6.0",
    "tolerance": "0.01",
}


@dataclass
class RunConfig:
    command: str
    sections: dict[str, dict[str, str]]
    text: str
    output: Path | None = None
    seed: int | None = None
    workers: int = 1
    extra: dict = field(default_factory=dict)

    # typed accessors; every failure names the key
    def get(self, section: str, key: str, default: str | None = None) -> str:
        sec = self.sections.get(section, {})
        if key in sec:
            return sec[key]
        if default is None:
            raise ConfigError(f"missing key {key!r} in [{section}]")
        return default

    def real(self, section: str, key: str, default: str | None = None, positive: bool = False) -> float:
        raw = self.get(section, key, default)
        try:
            value = float(raw)
        except ValueError as exc:
            raise ConfigError(f"key {key!r} in [{section}] is not a number: {raw!r}") from exc
        if positive and not value > 0:
            raise ConfigError(f"key {key!r} in [{section}] must be > 0, got {raw}")
        return value

    def integer(self, section: str, key: str, default: str | None = None, minimum: int = 1) -> int:
        raw = self.get(section, key, default)
        try:
            value = int(raw)
        except ValueError as exc:
            raise ConfigError(f"key {key!r} in [{section}] is not an integer: {raw!r}") from exc
        if value < minimum:
            raise ConfigError(f"key {key!r} in [{section}] must be >= {minimum}, got {raw}")
        return value

    def reals(self, section: str, key: str, positive: bool = False) -> list[float]:
        raw = self.get(section, key)
        out = []
        for item in raw.replace(";", ",").split(","):
            item = item.strip()
            if not item:
                continue
            try:
                v = float(item)
            except ValueError as exc:
                raise ConfigError(f"key {key!r} in [{section}] has a non-numeric entry {item!r}") from exc
            if positive and not v > 0:
                raise ConfigError(f"key {key!r} in [{section}] entries must be > 0, got {item}")
            out.append(v)
        if not out:
            raise ConfigError(f"key {key!r} in [{section}] is empty")
        return out

    def flag(self, section: str, key: str, default: str) -> bool:
        raw = self.get(section, key, default).lower()
        if raw in ("1", "true", "yes", "on"):
            return True
        if raw in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"key {key!r} in [{section}] must be a boolean, got {raw!r}")

    def model(self) -> tuple[LevyModel, float]:
        if "model" not in self.sections:
            raise ConfigError("missing [model] section")
        return model_from_mapping(self.sections["model"])

    def function(self) -> WeakFunction:
        return parse_function_spec(self.get("function", "name"))


def parse_config(text: str, command: str | None = None) -> RunConfig:
    """Parse and validate config text; ``command`` overrides ``[run] command``."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    sections = {}
    for name in parser.sections():
        key = name.lower()
        if key not in SECTION_KEYS:
            raise ConfigError(f"unknown section [{name}]")
        items = {k.lower(): v.strip() for k, v in parser[name].items()}
        unknown = sorted(set(items) - SECTION_KEYS[key])
        if unknown:
            raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(unknown)}")
        sections[key] = items
    cmd = command or sections.get("run", {}).get("command")
    if cmd is None:
        raise ConfigError("missing key 'command' in [run]")
    if cmd not in COMMANDS:
        raise ConfigError(f"key 'command' must be one of {', '.join(COMMANDS)}, got {cmd!r}")
    cfg = RunConfig(cmd, sections, text)
    run = sections.get("run", {})
    if "output" in run:
        cfg.output = Path(run["output"])
    if "seed" in run:
        cfg.seed = cfg.integer("run", "seed", minimum=0)
    elif cmd in STOCHASTIC:
        raise ConfigError(f"missing key 'seed' in [run] (required by {cmd})")
    cfg.workers = cfg.integer("run", "workers", str(default_workers()))
    if "quad_tol" in sections.get("numerics", {}):
        cfg.real("numerics", "quad_tol", positive=True)
    if "tolerance" in sections.get("numerics", {}):
        cfg.real("numerics", "tolerance", positive=True)
    return cfg


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return f"{float(v):.17g}"


def _header(cfg: RunConfig) -> list[str]:
    lines = [f"# levyito {__version__}", f"# command={cfg.command}", f"# seed={cfg.seed}"]
    lines += ["# config: " + line for line in cfg.text.strip().splitlines() if line.strip()]
    return lines


def _write_csv(dest, cfg: RunConfig, columns: list[str], rows, extra_meta=()) -> None:
    lines = _header(cfg) + [f"# {m}" for m in extra_meta]
    lines.append(",".join(columns))
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if dest is None:
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text)


def _side_file(cfg: RunConfig, suffix: str) -> Path | None:
    if cfg.output is None:
        return None
    return cfg.output.with_name(cfg.output.stem + suffix + cfg.output.suffix)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_simulate(cfg: RunConfig) -> None:
    model, delta = cfg.model()
    T = cfg.real("numerics", "t", NUMERIC_DEFAULTS["t"], positive=True)
    index = cfg.integer("numerics", "path_index", NUMERIC_DEFAULTS["path_index"], minimum=0)
    x0 = cfg.real("numerics", "x0", NUMERIC_DEFAULTS["x0"])
    path = simulate_path(model, delta, T, cfg.seed, x0=x0, path_index=index)
    dest = cfg.output
    if dest is None:
        for line in _header(cfg):
            sys.stdout.write(line + "\n")
        write_path_csv(path, sys.stdout)
        return
    with open(dest, "w") as fh:
        for line in _header(cfg):
            fh.write(line + "\n")
        write_path_csv(path, fh)


def cmd_verify_ito(cfg: RunConfig) -> None:
    model, _ = cfg.model()
    f = cfg.function()
    deltas = cfg.reals("numerics", "deltas", positive=True)
    t = cfg.real("numerics", "t", NUMERIC_DEFAULTS["t"], positive=True)
    n = cfg.integer("numerics", "n_paths", NUMERIC_DEFAULTS["n_paths"])
    tol = cfg.real("numerics", "quad_tol", NUMERIC_DEFAULTS["quad_tol"], positive=True)
    study = ito_residual_study(f, model, deltas, t, n, cfg.seed, quad_tol=tol)
    rows = [(r.delta, r.n_paths, r.mean_abs_residual, r.max_abs_residual, r.mean_quad_error, r.bias_bound)
            for r in study.rows]
    meta = [f"reference_delta={study.reference_delta!r}", f"lipschitz={study.lipschitz!r}",
            f"monotone={study.monotone}"]
    _write_csv(cfg.output, cfg,
               ["delta", "n_paths", "mean_abs_residual", "max_abs_residual", "mean_quad_error", "bias_bound"],
               rows, meta)


def cmd_decompose(cfg: RunConfig) -> None:
    model, delta = cfg.model()
    f = cfg.function()
    t = cfg.real("numerics", "t", NUMERIC_DEFAULTS["t"], positive=True)
    n = cfg.integer("numerics", "n_paths", NUMERIC_DEFAULTS["n_paths"])
    tol = cfg.real("numerics", "quad_tol", NUMERIC_DEFAULTS["quad_tol"], positive=True)
    x0 = cfg.real("numerics", "x0", NUMERIC_DEFAULTS["x0"])
    rows = []
    for i in range(n):
        path = simulate_path(model, delta, t, cfg.seed, x0=x0, path_index=i)
        d = decomposition_check(f, path, model, t, tol)
        rows.append((i, d.lhs, d.f0, d.martingale, d.generator_integral, d.residual, d.error_estimate))
    m = np.array([r[3] for r in rows])
    se = float(m.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    meta = [f"martingale_mean={float(m.mean())!r}", f"martingale_std_error={se!r}"]
    _write_csv(cfg.output, cfg,
               ["path_index", "lhs", "f0", "martingale", "generator_integral", "residual", "error_estimate"],
               rows, meta)


def cmd_mollify_demo(cfg: RunConfig) -> None:
    f = cfg.function()
    eps = cfg.reals("numerics", "epsilons", positive=True)
    points = cfg.reals("numerics", "points")
    t = cfg.real("numerics", "t", "0.0")
    rows = []
    for e in eps:
        for x in points:
            fe = float(mollify(f, e, (t, x)))
            dfe = float(mollify_derivative(f, e, (t, x), "x"))
            rows.append((e, x, fe, dfe, float(f(t, x)), float(f.dx(t, x))))
    _write_csv(cfg.output, cfg, ["epsilon", "x", "f_eps", "dx_f_eps", "f", "dx_f"], rows)


def _contract(cfg: RunConfig):
    r = cfg.real("contract", "r")
    T = cfg.real("contract", "t", positive=True)
    K = cfg.real("contract", "k", positive=True)
    D = cfg.real("contract", "d", positive=True)
    if "spots" in cfg.sections.get("contract", {}):
        spots = cfg.reals("contract", "spots", positive=True)
    else:
        spots = [cfg.real("contract", "spot", positive=True)]
    return r, T, K, D, spots


def _pide(cfg: RunConfig):
    model, _ = cfg.model()
    r, T, K, D, spots = _contract(cfg)
    carry = cfg.real("contract", "carry") if "carry" in cfg.sections.get("contract", {}) else None
    params = PIDEParams(
        model, r, T, K, D,
        n_x=cfg.integer("numerics", "n_x", NUMERIC_DEFAULTS["n_x"], minimum=4),
        n_t=cfg.integer("numerics", "n_t", NUMERIC_DEFAULTS["n_t"]),
        carry=carry,
        width=cfg.real("numerics", "width", NUMERIC_DEFAULTS["width"], positive=True),
        extrapolate=cfg.flag("numerics", "extrapolate", NUMERIC_DEFAULTS["extrapolate"]),
    )
    sol = solve_pide(params)
    prices = [interpolate_price(sol, 0.0, S) for S in spots]
    return sol, spots, prices


def _grid_diag(sol) -> str:
    d = dict(sol.diagnostics, n_x=sol.params.n_x, n_t=sol.params.n_t,
             extrapolated=bool(sol.diagnostics.get("extrapolated", False)))
    keys = ("n_x", "n_t", "dx", "dt", "peclet", "extrapolated")
    return " ".join(f"{k}={_fmt(d[k])}" for k in keys)


def cmd_price_pide(cfg: RunConfig) -> None:
    sol, spots, prices = _pide(cfg)
    diag = _grid_diag(sol)
    lattice = [(t, S, v) for t, row in zip(sol.times, sol.values) for S, v in zip(sol.spots, row)]
    if cfg.output is not None:
        _write_csv(_side_file(cfg, "_lattice"), cfg, ["t", "spot", "price"], lattice)
    _write_csv(cfg.output, cfg, ["spot", "price", "grid_diag"], [(S, p, diag) for S, p in zip(spots, prices)])


def _mc(cfg: RunConfig):
    model, delta = cfg.model()
    if not delta > 0:
        raise ConfigError("key 'delta' in [model] must be > 0 for Monte Carlo")
    r, T, K, D, spots = _contract(cfg)
    n = cfg.integer("numerics", "n_paths", NUMERIC_DEFAULTS["n_paths"])
    return spots, price_barrier_curve(model, r, T, K, D, spots, n_paths=n, delta=delta,
                                      seed=cfg.seed, workers=cfg.workers)


def cmd_price_mc(cfg: RunConfig) -> None:
    spots, ests = _mc(cfg)
    rows = [(S, e.mean, e.std_error, e.n_paths, e.delta, e.bias_bound) for S, e in zip(spots, ests)]
    _write_csv(cfg.output, cfg, ["spot", "mean", "std_error", "n_paths", "delta", "bias_bound"], rows)


def cmd_compare(cfg: RunConfig) -> None:
    """PIDE and MC on one contract; a row passes if the relative gap is within
    ``tolerance`` or within three standard errors plus the MC bias bound."""
    tol = cfg.real("numerics", "tolerance", NUMERIC_DEFAULTS["tolerance"], positive=True)
    _, spots, prices = _pide(cfg)
    _, ests = _mc(cfg)
    rows = []
    for S, p, e in zip(spots, prices, ests):
        gap = abs(p - e.mean)
        ok = gap <= tol * max(abs(e.mean), 1e-300) or gap <= 3 * e.std_error + e.bias_bound
        rows.append((S, p, e.mean, e.std_error, gap, bool(ok)))
    _write_csv(cfg.output, cfg, ["spot", "pide_price", "mc_mean", "mc_std_error", "abs_gap", "pass"], rows,
               [f"tolerance={tol!r}"])


HANDLERS = {
    "simulate": cmd_simulate,
    "verify-ito": cmd_verify_ito,
    "decompose": cmd_decompose,
    "mollify-demo": cmd_mollify_demo,
    "price-pide": cmd_price_pide,
    "price-mc": cmd_price_mc,
    "compare": cmd_compare,
}


def run(cfg: RunConfig) -> int:
    """Dispatch a validated config; returns the exit code."""
    try:
        HANDLERS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"levyito: configuration error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"levyito: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="levyito", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"levyito {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    ap.add_argument("command", choices=("run",) + COMMANDS,
                    help="'run' takes the command from [run] command")
    ap.add_argument("config", type=Path, help="config file")
    ap.add_argument("-o", "--output", type=Path, help="output CSV (overrides [run] output; default stdout)")
    ap.add_argument("--workers", type=int, help="process cap (default [run] workers or LEVYITO_WORKERS)")
    ap.add_argument("--seed", type=int, help="override [run] seed")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        text = args.config.read_text()
    except OSError as exc:
        print(f"levyito: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        if args.seed is not None:
            text = _set_key(text, "run", "seed", str(args.seed))
        cfg = parse_config(text, None if args.command == "run" else args.command)
        if args.output is not None:
            cfg.output = args.output
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("--workers must be >= 1")
            cfg.workers = args.workers
    except ConfigError as exc:
        print(f"levyito: configuration error: {exc}", file=sys.stderr)
        return 1
    return run(cfg)


def _set_key(text: str, section: str, key: str, value: str) -> str:
    # rewrite through configparser so the echoed config matches what ran
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    if not parser.has_section(section):
        parser.add_section(section)
    parser.set(section, key, value)
    lines = []
    for name in parser.sections():
        lines.append(f"[{name}]")
        lines += [f"{k} = {v}" for k, v in parser[name].items()]
        lines.append("")
    return "\n".join(lines)


if __name__ == "__main__":
    sys.exit(main())
