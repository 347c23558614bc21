"""Run configuration, profile tables and run manifests.

Config files are JSON with the sections below; every key is optional
except that unknown keys anywhere are rejected::

    {
      "model":      {ModelParams fields},
      "solver":     {SolveConfig fields},
      "grid":       {"n_cells": 256},
      "seed":       {SeedSpec fields} or a list of them,
      "asymptotic": {"mode": "passive_or", "k": 0, "s_min": 0.0},
      "compare":    {"numeric": "path/to/profile.csv"},
      "sweep":      {"points": [{...model overrides...}, ...],
                     "strategy": "continuation", "method": "newton"},
      "stability":  true,
      "label":      ""
    }

A sweep may instead give ``"parameter"`` and ``"values"``; it is
normalised to the ``points`` form.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .asymptotics import PASSIVE_OR, PROVENANCES
from .errors import ConfigError
from .grid import DEFAULT_N_CELLS, Grid
from .model import ChannelState, ModelParams
from .seeds import SeedSpec
from .solvers import SolveConfig

PROFILE_HEADER = ("y", "q11", "q12", "s", "theta", "u")
MANIFEST = "manifest.json"
_SECTIONS = ("model", "solver", "grid", "seed", "asymptotic", "compare", "sweep", "stability", "label")


@dataclass(frozen=True)
class AsymptoticSpec:
    mode: str = PASSIVE_OR
    k: int = 0
    s_min: float = 0.0

    def __post_init__(self):
        if self.mode not in PROVENANCES:
            raise ConfigError(f"unknown asymptotic mode {self.mode!r}; expected one of {', '.join(PROVENANCES)}")


@dataclass(frozen=True)
class CompareSpec:
    numeric: str | None = None


@dataclass(frozen=True)
class SweepSpec:
    points: tuple = ()
    strategy: str = "continuation"
    method: str = "newton"

    def __post_init__(self):
        if self.strategy not in ("continuation", "cold"):
            raise ConfigError(f"unknown sweep strategy {self.strategy!r}")
        if self.method not in ("newton", "relax"):
            raise ConfigError(f"unknown sweep method {self.method!r}")
        names = {f.name for f in fields(ModelParams)}
        for p in self.points:
            bad = set(p) - names
            if bad:
                raise ConfigError(f"sweep point has unknown keys: {', '.join(sorted(bad))}")

    def schedule(self, base: ModelParams) -> list[ModelParams]:
        return [base.with_(**p) for p in self.points]


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams = field(default_factory=ModelParams)
    solver: SolveConfig = field(default_factory=SolveConfig)
    n_cells: int = DEFAULT_N_CELLS
    seeds: tuple = (SeedSpec(),)
    asymptotic: AsymptoticSpec = field(default_factory=AsymptoticSpec)
    compare: CompareSpec = field(default_factory=CompareSpec)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    stability: bool = True
    label: str = ""

    @property
    def grid(self) -> Grid:
        return Grid(self.n_cells)

    def to_dict(self) -> dict:
        return {
            "model": asdict(self.model),
            "solver": asdict(self.solver),
            "grid": {"n_cells": self.n_cells},
            "seed": [s.to_dict() for s in self.seeds],
            "asymptotic": asdict(self.asymptotic),
            "compare": asdict(self.compare),
            "sweep": {
                "points": [dict(p) for p in self.sweep.points],
                "strategy": self.sweep.strategy,
                "method": self.sweep.method,
            },
            "stability": self.stability,
            "label": self.label,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def with_overrides(self, section: str, **values) -> "RunConfig":
        """Copy with keys of one section replaced (used by the CLI flags)."""
        d = self.to_dict()
        if section in ("grid",):
            d["grid"].update(values)
        elif section in ("stability", "label"):
            d[section] = values[section]
        elif section == "seed":
            d["seed"] = [{**s, **values} for s in d["seed"]]
        else:
            d[section].update(values)
        return parse_config(d)


def _section(raw, name: str, cls):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"section {name!r} must be an object")
    allowed = {f.name for f in fields(cls) if f.init}
    bad = set(raw) - allowed
    if bad:
        raise ConfigError(f"unknown keys in {name!r}: {', '.join(sorted(bad))}")
    try:
        return cls(**raw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {name!r} section: {exc}") from exc


def _sweep(raw) -> SweepSpec:
    if raw is None:
        return SweepSpec()
    if not isinstance(raw, dict):
        raise ConfigError("section 'sweep' must be an object")
    raw = dict(raw)
    if "parameter" in raw or "values" in raw:
        if "points" in raw:
            raise ConfigError("sweep takes either points or parameter/values, not both")
        if "parameter" not in raw or "values" not in raw:
            raise ConfigError("sweep needs both parameter and values")
        name = raw.pop("parameter")
        raw["points"] = [{name: v} for v in raw.pop("values")]
    points = raw.get("points", [])
    if not isinstance(points, list) or not all(isinstance(p, dict) for p in points):
        raise ConfigError("sweep points must be a list of objects")
    raw["points"] = tuple(dict(p) for p in points)
    return _section(raw, "sweep", SweepSpec)


def parse_config(data) -> RunConfig:
    """Build a RunConfig from a decoded JSON object, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    bad = set(data) - set(_SECTIONS)
    if bad:
        raise ConfigError(f"unknown config sections: {', '.join(sorted(bad))}")
    grid = data.get("grid") or {}
    if not isinstance(grid, dict) or set(grid) - {"n_cells"}:
        raise ConfigError("section 'grid' only takes n_cells")
    n_cells = grid.get("n_cells", DEFAULT_N_CELLS)
    if isinstance(n_cells, bool) or not isinstance(n_cells, int) or n_cells < 2:
        raise ConfigError(f"n_cells must be an integer >= 2, got {n_cells!r}")
    raw_seeds = data.get("seed")
    if raw_seeds is None:
        seeds = (SeedSpec(),)
    else:
        if isinstance(raw_seeds, dict):
            raw_seeds = [raw_seeds]
        if not isinstance(raw_seeds, list) or not raw_seeds:
            raise ConfigError("seed must be an object or a nonempty list")
        seeds = tuple(_section(s, "seed", SeedSpec) for s in raw_seeds)
    stab = data.get("stability", True)
    if not isinstance(stab, bool):
        raise ConfigError("stability must be true or false")
    label = data.get("label", "")
    if not isinstance(label, str):
        raise ConfigError("label must be a string")
    return RunConfig(
        model=_section(data.get("model"), "model", ModelParams),
        solver=_section(data.get("solver"), "solver", SolveConfig),
        n_cells=n_cells,
        seeds=seeds,
        asymptotic=_section(data.get("asymptotic"), "asymptotic", AsymptoticSpec),
        compare=_section(data.get("compare"), "compare", CompareSpec),
        sweep=_sweep(data.get("sweep")),
        stability=stab,
        label=label,
    )


def loads_config(text: str) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(data)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads_config(text)


# ---------------------------------------------------------------- tables


def _atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_table(header, columns) -> str:
    # adding 0.0 maps -0.0 to 0.0 so equal tables are byte-identical
    cols = [np.asarray(c, dtype=float) + 0.0 for c in columns]
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join("%.17g" % v for v in row))
    return "\n".join(lines) + "\n"


def write_profile(path, y, q11, q12, s, theta, u) -> Path:
    """Write one profile table (``y,q11,q12,s,theta,u``, 17 digits)."""
    path = Path(path)
    _atomic_write(path, format_table(PROFILE_HEADER, (y, q11, q12, s, theta, u)))
    return path


def read_table(path) -> dict:
    path = Path(path)
    try:
        with path.open() as fh:
            header = fh.readline().strip().split(",")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read table {path}: {exc}") from exc
    if data.size == 0:
        data = data.reshape(0, len(header))
    if data.shape[1] != len(header):
        raise ConfigError(f"{path}: {data.shape[1]} columns, header has {len(header)}")
    return {name: data[:, j].copy() for j, name in enumerate(header)}


def read_profile(path) -> ChannelState:
    """Load a profile table as a state; its y column must be the uniform grid."""
    cols = read_table(path)
    if tuple(cols) != PROFILE_HEADER:
        raise ConfigError(f"{path}: header must be {','.join(PROFILE_HEADER)}")
    n = cols["y"].size - 1
    if n < 2:
        raise ConfigError(f"{path}: need at least 3 rows")
    grid = Grid(n)
    if not np.allclose(cols["y"], grid.y, rtol=0, atol=1e-14):
        raise ConfigError(f"{path}: y column is not a uniform grid on [-1, 1]")
    return ChannelState(grid, cols["q11"], cols["q12"], cols["u"])


# ---------------------------------------------------------------- manifests


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, frozenset, set)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def write_manifest(directory, manifest: dict, name: str = MANIFEST) -> Path:
    """Atomically write a manifest; every listed file must already exist."""
    directory = Path(directory)
    for f in manifest.get("files", []):
        if not (directory / f).is_file():
            raise FileNotFoundError(f"manifest lists missing file {f}")
    path = directory / name
    _atomic_write(path, json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n")
    return path


def read_manifest(path) -> dict:
    return json.loads(Path(path).read_text())


def prepare_output(directory, force: bool = False) -> Path:
    """Create the output directory, refusing to reuse one holding a manifest."""
    directory = Path(directory)
    if (directory / MANIFEST).exists() and not force:
        raise FileExistsError(f"{directory} already holds a run; pass --force to overwrite")
    directory.mkdir(parents=True, exist_ok=True)
    return directory
