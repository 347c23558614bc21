"""Command-line entry point: ``nematic-or {relax,newton,asymptotic,compare,sweep}``.

Exit status: 0 on success, 1 when a solve fails or does not converge,
2 for configuration and usage errors (nothing is written), 3 for I/O
failures.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import logging
import sys
import time
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import BACKEND
from .analysis import COLD, classify_or, compare_profiles, default_workers, sweep
from .asymptotics import profile
from .errors import ConfigError, NematicError
from .io import (
    MANIFEST,
    RunConfig,
    _atomic_write,
    format_table,
    load_config,
    prepare_output,
    read_manifest,
    read_profile,
    write_manifest,
    write_profile,
)
from .model import ModelParams, q_to_director
from .solvers import SolveConfig, SolveReport, gradient_flow, newton_solve, stability

log = logging.getLogger("nematic_or")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_IO = 3


class _CliFailure(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _out_name(base: str, i: int, count: int) -> str:
    return f"{base}.csv" if count == 1 else f"{base}_{i}.csv"


def _state_table(path, state, params):
    view = q_to_director(state, params)
    write_profile(path, state.grid.y, state.q11, state.q12, view.s, view.theta, state.u)
    return view


def _classification_dict(cls):
    if cls is None:
        return None
    d = asdict(cls)
    d["nodal_set"] = sorted(cls.nodal_set)
    return d


def _stability_dict(stab):
    if stab is None:
        return None
    return {"rightmost_re": stab.rightmost_re, "verdict": stab.verdict, "n_unstable": stab.n_unstable}


def _base_manifest(command: str, cfg: RunConfig) -> dict:
    return {
        "command": command,
        "tool_version": __version__,
        "backend": BACKEND,
        "config": cfg.to_dict(),
        "files": [],
    }


def _finish(out: Path, manifest: dict, t0: float) -> None:
    manifest["wall_clock_s"] = time.perf_counter() - t0
    write_manifest(out, manifest)


def _solve_runs(command, cfg, out, solver, t0):
    man = _base_manifest(command, cfg)
    params, grid = cfg.model, cfg.grid
    runs = []
    failed = False
    count = len(cfg.seeds)
    for i, seed in enumerate(cfg.seeds):
        entry = {"seed": seed.to_dict()}
        try:
            st0 = seed(params, grid)
            rep: SolveReport = solver(st0, params, cfg.solver)
        except NematicError as exc:
            entry["error"] = {"type": type(exc).__name__, "message": str(exc)}
            trace = getattr(exc, "trace", ())
            if len(trace):
                name = _out_name("trace", i, count)
                _atomic_write(out / name, format_table(("iteration", "residual"), (np.arange(len(trace)), trace)))
                man["files"].append(name)
                entry["trace"] = name
            runs.append(entry)
            failed = True
            print(f"[{i}] {seed.kind}: {type(exc).__name__}: {exc}")
            continue
        name = _out_name("profile", i, count)
        view = _state_table(out / name, rep.final_state, params)
        tname = _out_name("trace", i, count)
        cols = [np.arange(len(rep.residual_trace)), rep.residual_trace]
        header = ["iteration", "residual"]
        if rep.energy_trace is not None:
            header.append("energy")
            cols.append(rep.energy_trace)
        _atomic_write(out / tname, format_table(header, cols))
        man["files"] += [name, tname]
        cls = classify_or(rep.final_state, params)
        stab = stability(rep.final_state, params) if cfg.stability else None
        entry.update(
            profile=name,
            trace=tname,
            converged=rep.converged,
            iterations=rep.iterations,
            residual=rep.residual,
            s_min=float(view.s.min()),
            s_center=float(grid.sample(view.s, 0.0)),
            jumps=[list(j) for j in view.jumps],
            classification=_classification_dict(cls),
            stability=_stability_dict(stab),
        )
        runs.append(entry)
        failed |= not rep.converged
        verdict = f", {stab.verdict} (Re {stab.rightmost_re:.3g})" if stab else ""
        print(
            f"[{i}] {seed.kind} k={seed.k}: {'converged' if rep.converged else 'NOT converged'} "
            f"in {rep.iterations} {'steps' if command == 'relax' else 'iterations'}, "
            f"|R| = {rep.residual:.3e}, s_min = {cls.s_min:.4g}, jump = {cls.theta_jump:.4g}"
            f"{', OR-type' if cls.is_or_type else ''}{verdict}"
        )
    man["runs"] = runs
    man["status"] = "failed" if failed else "ok"
    if failed:
        man["error"] = {"type": "SolveFailure", "message": "at least one run failed or did not converge"}
    _finish(out, man, t0)
    return EXIT_FAILED if failed else EXIT_OK


def cmd_relax(cfg: RunConfig, out: Path, t0: float, args=None) -> int:
    return _solve_runs("relax", cfg, out, gradient_flow, t0)


def cmd_newton(cfg: RunConfig, out: Path, t0: float, args=None) -> int:
    return _solve_runs("newton", cfg, out, newton_solve, t0)


def cmd_asymptotic(cfg: RunConfig, out: Path, t0: float, args=None) -> int:
    spec = cfg.asymptotic
    prof = profile(spec.mode, cfg.model, cfg.grid, spec.k, spec.s_min)
    write_profile(out / "profile.csv", cfg.grid.y, prof.q11, prof.q12, prof.s, prof.theta, prof.u)
    man = _base_manifest("asymptotic", cfg)
    man["files"] = ["profile.csv"]
    man["profile"] = {"mode": prof.provenance, "k": prof.k, "s_min": prof.s_min, "theta_jump": prof.theta_jump}
    man["status"] = "ok"
    _finish(out, man, t0)
    print(f"{prof.provenance}: k={prof.k}, s_min={prof.s_min:.4g}, theta jump={prof.theta_jump:.6g}")
    return EXIT_OK


def cmd_compare(cfg: RunConfig, out: Path, t0: float, args=None) -> int:
    path = cfg.compare.numeric
    if not path:
        raise _CliFailure(EXIT_CONFIG, "compare needs a numeric profile (compare.numeric or --numeric)")
    numeric = read_profile(path)
    spec = cfg.asymptotic
    prof = profile(spec.mode, cfg.model, numeric.grid, spec.k, spec.s_min)
    err = compare_profiles(numeric, prof)
    write_profile_cols = format_table(
        ("y", "dq11", "dq12", "ds_half", "du"), (numeric.grid.y, err.dq11, err.dq12, err.ds_half, err.du)
    )
    _atomic_write(out / "errors.csv", write_profile_cols)
    man = _base_manifest("compare", cfg)
    man["files"] = ["errors.csv"]
    man["numeric"] = str(path)
    man["norms"] = {k: {"sup": v[0], "at_y": v[1]} for k, v in err.norms.items()}
    man["status"] = "ok"
    _finish(out, man, t0)
    for k, (v, y) in err.norms.items():
        print(f"sup |d{k}| = {v:.4e} at y = {y:+.4f}")
    return EXIT_OK


SUMMARY_COLUMNS = ("s_min", "theta_jump", "is_or_type", "rightmost_re", "verdict", "converged", "error")


def cmd_sweep(cfg: RunConfig, out: Path, t0: float, args=None) -> int:
    schedule = cfg.sweep.schedule(cfg.model)
    keys = []
    for p in cfg.sweep.points:
        for k in p:
            if k not in keys:
                keys.append(k)
    seed = cfg.seeds[0]
    workers = default_workers() if cfg.sweep.strategy == COLD else 1
    points = sweep(
        schedule, seed, cfg.grid, cfg.sweep.strategy, cfg.solver,
        method=cfg.sweep.method, with_stability=cfg.stability, workers=workers,
    )
    man = _base_manifest("sweep", cfg)
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("index", *keys, *SUMMARY_COLUMNS))
    failed = False
    # all files are written here, by the collecting process
    for j, (pt, raw) in enumerate(zip(points, cfg.sweep.points)):
        sub = f"point_{j:03d}"
        (out / sub).mkdir(exist_ok=True)
        pman = {"command": "sweep-point", "tool_version": __version__, "params": asdict(pt.params), "files": []}
        if pt.report is not None:
            _state_table(out / sub / "profile.csv", pt.report.final_state, pt.params)
            pman["files"].append("profile.csv")
            pman.update(converged=pt.report.converged, iterations=pt.report.iterations, residual=pt.report.residual)
        pman["classification"] = _classification_dict(pt.classification)
        pman["stability"] = _stability_dict(pt.stability)
        pman["error"] = pt.error
        write_manifest(out / sub, pman)
        man["files"].append(f"{sub}/{MANIFEST}")
        cls, stab = pt.classification, pt.stability
        failed |= not pt.ok
        writer.writerow((
            j,
            *(repr(raw[k]) if isinstance(raw.get(k), float) else raw.get(k, "") for k in keys),
            "%.17g" % cls.s_min if cls else "nan",
            "%.17g" % cls.theta_jump if cls else "nan",
            int(cls.is_or_type) if cls else "",
            "%.17g" % stab.rightmost_re if stab else "nan",
            stab.verdict if stab else "",
            int(pt.ok),
            pt.error or "",
        ))
        print(
            f"[{j}] {raw}: "
            + (f"s_min = {cls.s_min:.4g}, jump = {cls.theta_jump:.4g}" if cls else pt.error)
            + (f", {stab.verdict}" if stab else "")
        )
    _atomic_write(out / "summary.csv", buf.getvalue())
    man["files"].append("summary.csv")
    man["status"] = "failed" if failed else "ok"
    if failed:
        man["error"] = {"type": "SweepFailure", "message": "one or more points failed"}
    _finish(out, man, t0)
    return EXIT_FAILED if failed else EXIT_OK


COMMANDS = {
    "relax": cmd_relax,
    "newton": cmd_newton,
    "asymptotic": cmd_asymptotic,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
}


# ---------------------------------------------------------------- argument parsing

_MODEL_FLAGS = {f.name: f.type for f in fields(ModelParams)}
_SOLVER_FLAGS = {f.name: f.type for f in fields(SolveConfig)}


def _caster(type_name):
    t = str(type_name)
    if "bool" in t:
        return lambda v: v.lower() in ("1", "true", "yes", "on")
    if "int" in t:
        return int
    if "float" in t:
        return float
    return str


def _add_common(p: argparse.ArgumentParser, command: str) -> None:
    p.add_argument("--config", type=Path, help="JSON run configuration")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--force", action="store_true", help="overwrite an existing run in --out")
    p.add_argument("--n-cells", type=int, help="number of grid cells")
    g = p.add_argument_group("model overrides")
    for name, t in _MODEL_FLAGS.items():
        g.add_argument(f"--{name.replace('_', '-')}", dest=f"model.{name}", type=_caster(t), metavar="VALUE")
    g = p.add_argument_group("solver overrides")
    for name, t in _SOLVER_FLAGS.items():
        g.add_argument(f"--{name.replace('_', '-')}", dest=f"solver.{name}", type=_caster(t), metavar="VALUE")
    if command in ("relax", "newton", "sweep"):
        p.add_argument("--seed", dest="seed.kind", metavar="KIND", help="seed kind")
        p.add_argument("--k", dest="seed.k", type=int, help="seed branch index")
        p.add_argument("--seed-s-min", dest="seed.s_min", type=float, help="seed wall depth")
        p.add_argument("--seed-path", dest="seed.path", help="profile table to seed from")
        p.add_argument("--no-stability", dest="stability.stability", action="store_const", const=False)
    if command in ("asymptotic", "compare"):
        p.add_argument("--mode", dest="asymptotic.mode", help="asymptotic profile")
        p.add_argument("--k", dest="asymptotic.k", type=int, help="branch index")
        p.add_argument("--s-min", dest="asymptotic.s_min", type=float, help="wall depth")
    if command == "compare":
        p.add_argument("--numeric", dest="compare.numeric", help="numeric profile table")
    if command == "sweep":
        p.add_argument("--strategy", dest="sweep.strategy", choices=("continuation", "cold"))
        p.add_argument("--method", dest="sweep.method", choices=("newton", "relax"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nematic-or", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__ or name)
        _add_common(p, name)
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.n_cells is not None:
        cfg = cfg.with_overrides("grid", n_cells=args.n_cells)
    grouped = {}
    for key, value in vars(args).items():
        if "." in key and value is not None:
            section, name = key.split(".", 1)
            grouped.setdefault(section, {})[name] = value
    for section, values in grouped.items():
        cfg = cfg.with_overrides(section, **values)
    return cfg


def _clear_previous(out: Path) -> None:
    old = out / MANIFEST
    if not old.exists():
        return
    try:
        man = read_manifest(old)
    except ValueError:
        man = {}
    for f in man.get("files", []):
        path = out / f
        if path.name == MANIFEST and path.exists():
            _clear_previous(path.parent)
        elif path.is_file():
            path.unlink()
    old.unlink()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    t0 = time.perf_counter()
    try:
        cfg = resolve_config(args)
    except (ConfigError, NematicError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        out = prepare_output(args.out, args.force)
        if args.force:
            _clear_previous(out)
    except FileExistsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        return COMMANDS[args.command](cfg, out, t0, args)
    except _CliFailure as exc:
        code, message, kind = exc.code, str(exc), "UsageError"
    except (ConfigError, NematicError) as exc:
        code, message, kind = EXIT_FAILED, str(exc), type(exc).__name__
    except OSError as exc:
        code, message, kind = EXIT_IO, str(exc), type(exc).__name__
    print(f"error: {message}", file=sys.stderr)
    man = _base_manifest(args.command, cfg)
    man["status"] = "failed"
    man["error"] = {"type": kind, "message": message}
    man["files"] = [f for f in man["files"] if (out / f).is_file()]
    try:
        _finish(out, man, t0)
    except OSError:
        pass
    return code


if __name__ == "__main__":
    sys.exit(main())
