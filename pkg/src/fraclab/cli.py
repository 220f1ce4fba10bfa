"""Batch front-end: ``fraclab <command> --config <path> [--out-dir DIR] [--seed N]``.

Config files are sectioned ``key = value`` text::

    [problem]
    s = 0.5
    p = 3
    dim = 1
    L = 64
    n = 4096
    v_family = algebraic_bump
    v_amplitude = 0.5
    v_alpha = 2.5

    [solver]
    max_iters = 5000

    [scan]
    R_list = 2, 4, 6, 8
    lambda_grid = 0:1:21

    [output]
    dir = out
    u_inf = out/u_inf.txt

Lists are comma separated; ``a:b:k`` expands to ``k`` evenly spaced values.
Exit codes: 0 success, 2 configuration error, 3 hypothesis violation,
4 solver did not converge, 1 anything else.  Failures also write an
``error.json`` record to the output directory and print it on stderr.
"""
from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import problem as pb
from .grid import make_grid
from .solvers import SolverConfig, fit_decay_exponent, gaussian_guess, solve_ground_state, solve_odd
from .twobump import (
    ScanTable,
    c0_upper_bound,
    convolution_check,
    energy_scan,
    interaction_scan,
    superadditivity_check,
)

logger = logging.getLogger(__name__)

COMMANDS = (
    "solve-limit", "solve", "solve-odd", "scan-two-bump", "check-convolution",
    "check-superadditivity", "c0-bound", "verify-decay",
)
EXIT_OK, EXIT_CRASH, EXIT_CONFIG, EXIT_HYPOTHESIS, EXIT_NOT_CONVERGED = 0, 1, 2, 3, 4

NEEDS_PROBLEM = {"solve-limit", "solve", "solve-odd", "scan-two-bump", "c0-bound", "verify-decay"}
NEEDS_U_INF = {"scan-two-bump", "c0-bound", "verify-decay"}


class ConfigError(ValueError):
    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class HypothesisFailure(ValueError):
    pass


class NotConverged(RuntimeError):
    pass


# --- config parsing -----------------------------------------------------------

class RunConfig:
    """Parsed config file; typed getters name the offending field on error."""

    def __init__(self, path):
        self.path = Path(path)
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        parser.optionxform = str
        try:
            text = self.path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            parser.read_string(text, source=str(path))
        except configparser.Error as exc:
            raise ConfigError(f"config parse error: {exc}") from exc
        self.sections = {name: dict(parser[name]) for name in parser.sections()}

    def raw(self, section, key, default=None, required=False):
        sec = self.sections.get(section, {})
        if key not in sec:
            if required:
                raise ConfigError(f"missing required field [{section}] {key}", f"{section}.{key}")
            return default
        return sec[key].strip()

    def get(self, section, key, conv, default=None, required=False):
        val = self.raw(section, key, None, required)
        if val is None:
            return default
        try:
            return conv(val)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for [{section}] {key} = {val!r}: {exc}",
                              f"{section}.{key}") from exc

    def floats(self, section, key, default=None, required=False):
        return self.get(section, key, parse_list, default, required)


def parse_list(text: str) -> list:
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if ":" in item:
            a, b, k = item.split(":")
            out.extend(np.linspace(float(a), float(b), int(k)).tolist())
        else:
            out.append(float(item))
    return out


def parse_bool(text: str) -> bool:
    t = text.lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _family(cfg: RunConfig, prefix: str) -> pb.PotentialFamily:
    kind = cfg.raw("problem", f"{prefix}_family", "constant_one")
    try:
        return pb.PotentialFamily(
            kind=kind,
            amplitude=cfg.get("problem", f"{prefix}_amplitude", float, 0.0),
            alpha=cfg.get("problem", f"{prefix}_alpha", float, 0.0),
            center=tuple(cfg.floats("problem", f"{prefix}_center", [])),
            table=cfg.raw("problem", f"{prefix}_table"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), f"problem.{prefix}_family") from exc


def build_from_config(cfg: RunConfig, limit: bool = False) -> pb.ProblemSpec:
    s = cfg.get("problem", "s", float, required=True)
    p = cfg.get("problem", "p", float, required=True)
    dim = cfg.get("problem", "dim", int, 1)
    L = cfg.get("problem", "L", float, required=True)
    n = cfg.get("problem", "n", int, required=True)
    try:
        grid = make_grid(dim, L, n)
    except ValueError as exc:
        raise ConfigError(str(exc), "problem.grid") from exc
    hyp = pb.HypothesisParams(
        cfg.get("problem", "kappa1", float, 0.0),
        cfg.get("problem", "kappa2", float, 0.0),
        cfg.get("problem", "alpha", float, np.inf),
    )
    try:
        if limit:
            return pb.build_problem(s, p, grid)
        return pb.build_problem(s, p, grid, _family(cfg, "v"), _family(cfg, "q"), hyp)
    except ConfigError:
        raise
    except ValueError as exc:
        raise HypothesisFailure(str(exc)) from exc


def solver_from_config(cfg: RunConfig, seed=None, symmetry=None) -> SolverConfig:
    kwargs = {}
    conv = {int: int, float: float, str: str, bool: parse_bool}
    for f in fields(SolverConfig):
        typ = {"int": int, "float": float, "str": str, "bool": bool}[f.type]
        val = cfg.get("solver", f.name, conv[typ])
        if val is not None:
            kwargs[f.name] = val
    if seed is not None:
        kwargs["seed"] = seed
    if symmetry is not None:
        kwargs["symmetry"] = symmetry
    try:
        return SolverConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc), "solver") from exc


# --- commands -----------------------------------------------------------------

def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n")


def _metadata(prob: pb.ProblemSpec, u_inf_ref: str | None = None) -> dict:
    g = prob.grid
    meta = {"prob_hash": prob.digest(), "grid": f"{g.dim} {g.half_width!r} {g.points_per_dim}",
            "s": prob.s, "p": prob.p}
    if u_inf_ref is not None:
        meta["u_inf"] = u_inf_ref
    return meta


def _load_u_inf(cfg: RunConfig, prob: pb.ProblemSpec):
    ref = cfg.raw("output", "u_inf", required=True)
    path = Path(ref)
    if not path.exists():
        raise ConfigError(f"u_inf file {ref} does not exist", "output.u_inf")
    grid, u = pb.read_field(path)
    if grid != prob.grid:
        raise ConfigError(f"u_inf grid {grid} does not match problem grid {prob.grid}",
                          "output.u_inf")
    return u, ref


def _initial(cfg: RunConfig, prob: pb.ProblemSpec):
    center = cfg.floats("solver", "initial_center", None)
    width = cfg.get("solver", "initial_width", float, 1.0)
    if center is None and width == 1.0:
        return None
    return gaussian_guess(prob.grid, center if center else 0.0, width)


def _solve(cfg, out: Path, seed, kind: str):
    prob = build_from_config(cfg, limit=(kind == "solve-limit"))
    hyp = pb.check_hypotheses(prob)
    if not (hyp.v_positive and hyp.q_nonnegative):
        raise HypothesisFailure(f"hypothesis check failed: {hyp.violations}")
    if kind == "solve-odd":
        scfg = solver_from_config(cfg, seed, symmetry="odd")
        u, rep = solve_odd(prob, scfg, _initial(cfg, prob))
    else:
        scfg = solver_from_config(cfg, seed)
        u, rep = solve_ground_state(prob, scfg, _initial(cfg, prob))
    name = {"solve-limit": "u_inf", "solve": "solution", "solve-odd": "odd_solution"}[kind]
    pb.write_field(out / f"{name}.txt", u)
    doc = rep.as_dict()
    doc["metadata"] = {**_metadata(prob), "command": kind,
                       "hypotheses": {"violations": hyp.violations, "margins": hyp.margins}}
    _write_json(out / f"{name}_report.json", doc)
    if not rep.converged:
        raise NotConverged(f"{kind}: not converged after {rep.iterations} iterations "
                           f"(grad sup-norm {rep.grad_supnorm:.3e})")


def _scan_two_bump(cfg, out: Path, seed):
    prob = build_from_config(cfg)
    u_inf, ref = _load_u_inf(cfg, prob)
    R_list = cfg.floats("scan", "R_list", required=True)
    lams = cfg.floats("scan", "lambda_grid", np.linspace(0, 1, 21).tolist())
    geometry = cfg.raw("scan", "geometry", "near")
    try:
        table, _ = energy_scan(prob, u_inf, R_list, lams, geometry=geometry)
    except ValueError as exc:
        raise ConfigError(str(exc), "scan") from exc
    table.metadata = {**_metadata(prob, ref), **table.metadata}
    table.to_csv(out / "two_bump_scan.csv")
    dists = cfg.floats("scan", "distances", None)
    if dists:
        it = interaction_scan(u_inf, prob.s, prob.p, dists)
        it.metadata = {**_metadata(prob, ref), **it.metadata}
        it.to_csv(out / "interaction_scan.csv")


def _check_convolution(cfg, out: Path, seed):
    sigma = cfg.get("scan", "sigma", float, required=True)
    tau = cfg.get("scan", "tau", float, required=True)
    ys = cfg.floats("scan", "y_list", required=True)
    dim = cfg.get("scan", "dim", int, cfg.get("problem", "dim", int, 1))
    strict = cfg.get("scan", "strict", parse_bool, True)
    try:
        table = convolution_check(sigma, tau, ys, dim=dim, strict=strict)
    except ValueError as exc:
        raise ConfigError(str(exc), "scan.sigma/tau") from exc
    table.to_csv(out / "convolution.csv")


def _check_superadditivity(cfg, out: Path, seed):
    p = cfg.get("problem", "p", float, required=True)
    hi = cfg.get("scan", "sample_max", float, 10.0)
    k = cfg.get("scan", "sample_count", int, 41)
    a, b = np.meshgrid(np.linspace(0, hi, k), np.linspace(0, hi, k), indexing="ij")
    pairs = np.column_stack([a.ravel(), b.ravel()])
    vseed = cfg.get("solver", "seed", int, 0) if seed is None else seed
    C, ok = superadditivity_check(p, pairs, seed=vseed)
    _write_json(out / "superadditivity.json",
                {"p": p, "C_estimate": C, "all_pass": ok, "samples": int(len(pairs)),
                 "verify_seed": vseed})


def _c0_bound(cfg, out: Path, seed):
    prob = build_from_config(cfg)
    u_inf, ref = _load_u_inf(cfg, prob)
    R = cfg.get("scan", "R", float, required=True)
    lams = cfg.floats("scan", "lambda_grid", None)
    ndir = cfg.get("scan", "n_directions", int, 16)
    try:
        _, table = c0_upper_bound(prob, u_inf, R, lams, ndir)
    except ValueError as exc:
        raise ConfigError(str(exc), "scan.R") from exc
    table.metadata = {**_metadata(prob, ref), **table.metadata}
    table.to_csv(out / "c0_scan.csv")


def _verify_decay(cfg, out: Path, seed):
    prob = build_from_config(cfg, limit=True)
    u_inf, ref = _load_u_inf(cfg, prob)
    periodic = cfg.get("scan", "periodic_images", parse_bool, True)
    tol = cfg.get("scan", "decay_tol", float, 0.3)
    fit = fit_decay_exponent(u_inf, periodic_images=periodic)
    expected = -(prob.dim + 2 * prob.s)
    _write_json(out / "decay.json", {
        **_metadata(prob, ref), "exponent": fit.exponent, "r_squared": fit.r_squared,
        "drift": fit.drift, "expected": expected, "tolerance": tol,
        "periodic_images": periodic, "pass": bool(abs(fit.exponent - expected) <= tol),
    })


HANDLERS = {
    "solve-limit": lambda c, o, s: _solve(c, o, s, "solve-limit"),
    "solve": lambda c, o, s: _solve(c, o, s, "solve"),
    "solve-odd": lambda c, o, s: _solve(c, o, s, "solve-odd"),
    "scan-two-bump": _scan_two_bump,
    "check-convolution": _check_convolution,
    "check-superadditivity": _check_superadditivity,
    "c0-bound": _c0_bound,
    "verify-decay": _verify_decay,
}


def run(command: str, config_path, out_dir=None, seed=None) -> int:
    """Execute one command; returns the process exit status."""
    out = None
    try:
        if command not in HANDLERS:
            raise ConfigError(f"unknown command {command!r}", "command")
        cfg = RunConfig(config_path)
        out = Path(out_dir or cfg.raw("output", "dir", "."))
        out.mkdir(parents=True, exist_ok=True)
        HANDLERS[command](cfg, out, seed)
        return EXIT_OK
    except ConfigError as exc:
        return _fail(out, EXIT_CONFIG, "config-error", str(exc), exc.field)
    except HypothesisFailure as exc:
        return _fail(out, EXIT_HYPOTHESIS, "hypothesis-failure", str(exc))
    except NotConverged as exc:
        return _fail(out, EXIT_NOT_CONVERGED, "not-converged", str(exc))
    except Exception as exc:  # noqa: BLE001 - reported as a crash record
        logger.exception("command %s crashed", command)
        return _fail(out, EXIT_CRASH, "crash", f"{type(exc).__name__}: {exc}")


def _fail(out, code, kind, message, field=None) -> int:
    record = {"status": code, "error": kind, "message": message}
    if field is not None:
        record["field"] = field
    text = json.dumps(record)
    print(text, file=sys.stderr)
    if out is not None:
        try:
            (Path(out) / "error.json").write_text(text + "\n")
        except OSError:
            pass
    return code


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="fraclab", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True)
    ap.add_argument("--out-dir", default=None)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    return run(args.command, args.config, args.out_dir, args.seed)


if __name__ == "__main__":
    sys.exit(main())
