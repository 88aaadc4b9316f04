"""Run configuration loading and CSV/JSON serialization.

Configs are strict JSON: unknown keys are rejected so that typos fail loudly.
Real numbers may be given as JSON numbers or as exact fraction strings such
as ``"1/3"``. Floats are written with 17 significant digits in CSV and in
shortest round-trip form in JSON, so every value parses back bit-identical.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .dynamics import LemanskaConfig
from .errors import ConfigError, SearelaxError
from .integrator import IntegratorConfig, Trajectory
from .scenarios import EsScanConfig, PerturbationSpec

TRAJECTORY_COLUMNS_HEAD = ["t"]
TRAJECTORY_COLUMNS_TAIL = ["E", "S", "dS_dt", "beta", "alpha", "massieu", "cov_EE", "cov_SS", "cov_MM", "branch"]
SCAN_COLUMNS = ["E", "S", "S_dot_max", "samples_used", "noise_p95"]
FORMATS = ("csv", "json")


def trajectory_columns(n: int) -> list[str]:
    return TRAJECTORY_COLUMNS_HEAD + [f"p_{i + 1}" for i in range(n)] + TRAJECTORY_COLUMNS_TAIL


# ---------------------------------------------------------------------------
# config

def _real(value, where: str) -> float:
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        x = float(value)
    elif isinstance(value, str):
        try:
            x = float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"{where}: cannot parse {value!r} as a number") from None
    else:
        raise ConfigError(f"{where}: expected a number, got {type(value).__name__}")
    if not math.isfinite(x):
        raise ConfigError(f"{where}: value must be finite")
    return x


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    return value


def _reals(value, where: str) -> list[float]:
    if not isinstance(value, list):
        raise ConfigError(f"{where}: expected a list of numbers")
    return [_real(v, f"{where}[{i}]") for i, v in enumerate(value)]


def _bits(value, where: str) -> list[int]:
    if not isinstance(value, list) or not all(v in (0, 1) and not isinstance(v, float) for v in value):
        raise ConfigError(f"{where}: expected a list of 0/1 flags")
    return [int(v) for v in value]


def _check_keys(block: dict, allowed, where: str) -> None:
    if not isinstance(block, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(map(repr, unknown))}; allowed: {', '.join(sorted(allowed))}")


def _block_to(cls, block: dict, where: str, parsers: dict, rename: Optional[dict] = None):
    """Build dataclass ``cls`` from a JSON object, with per-field parsers."""
    rename = rename or {}
    _check_keys(block, parsers, where)
    kwargs = {rename.get(k, k): parsers[k](v, f"{where}.{k}") for k, v in block.items()}
    try:
        return cls(**kwargs)
    except (ConfigError, SearelaxError, ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _str_choice(choices):
    def parse(v, where):
        if v not in choices:
            raise ConfigError(f"{where}: expected one of {', '.join(choices)}, got {v!r}")
        return v
    return parse


def _str(v, where):
    if not isinstance(v, str):
        raise ConfigError(f"{where}: expected a string")
    return v


def _bool(v, where):
    if not isinstance(v, bool):
        raise ConfigError(f"{where}: expected true/false")
    return v


_INTEGRATOR = {
    "step": _real, "max_time": _real, "direction": _str_choice(("forward", "backward")),
    "record_every": _int, "convergence_tol": _real, "boundary_floor": _real, "drift_abort": _real,
    "coordinate_space": _str_choice(("sqrt_space", "prob_space")), "renormalize": _bool,
}
_LEMANSKA = {"upsilon": _real, "log_floor": _real}
_PERTURBATION = {"lambda": _real, "mask": _bits, "E": _real}
_SCAN = {"energy_grid": _reals, "entropy_resolution": _int, "samples_per_point": _int,
         "rng_seed": _int, "optimizer_iters": _int, "entropy_tol": _real}


@dataclass(frozen=True)
class EquilibriumRequest:
    E: float
    mask: Optional[tuple] = None


@dataclass(frozen=True)
class InitialState:
    p: tuple


@dataclass(frozen=True)
class TwoLevelRequest:
    p0: float = 0.25
    t_min: float = -5.0
    t_max: float = 5.0
    n_points: int = 101
    upsilon: float = 0.5
    step: float = 1e-3

    def __post_init__(self):
        if not 0.0 < self.p0 < 1.0:
            raise ConfigError(f"p0 must lie in (0, 1), got {self.p0!r}")
        if not self.t_min < self.t_max or self.n_points < 2:
            raise ConfigError("need t_min < t_max and n_points >= 2")


@dataclass(frozen=True)
class StudyRequest:
    E: float = 0.4
    lam: float = 0.9


@dataclass(frozen=True)
class FamiliesRequest:
    resolution: int = 50


@dataclass(frozen=True)
class RunConfig:
    spectrum: Optional[tuple] = None
    kB: float = 1.0
    tau: float = 1.0
    rng_seed: int = 0
    output_path: Optional[str] = None
    output_format: str = "csv"
    equilibrium: Optional[EquilibriumRequest] = None
    masks: Optional[EquilibriumRequest] = None
    initial: Optional[InitialState] = None
    perturbation: Optional[PerturbationSpec] = None
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    lemanska: LemanskaConfig = field(default_factory=LemanskaConfig)
    two_level: TwoLevelRequest = field(default_factory=TwoLevelRequest)
    study: StudyRequest = field(default_factory=StudyRequest)
    scan: EsScanConfig = field(default_factory=EsScanConfig)
    families: FamiliesRequest = field(default_factory=FamiliesRequest)
    source: dict = field(default_factory=dict, compare=False)


def _equilibrium_block(v, where):
    return _block_to(EquilibriumRequest, v, where, {"E": _real, "mask": lambda m, w: tuple(_bits(m, w))})


_TOP = {
    "spectrum": _reals,
    "kB": _real,
    "tau": _real,
    "rng_seed": _int,
    "output_path": _str,
    "output_format": _str_choice(FORMATS),
    "equilibrium": _equilibrium_block,
    "masks": _equilibrium_block,
    "initial": lambda v, w: _block_to(InitialState, v, w, {"p": lambda p, w2: tuple(_reals(p, w2))}),
    "perturbation": lambda v, w: _block_to(PerturbationSpec, v, w, _PERTURBATION, {"lambda": "lam"}),
    "integrator": lambda v, w: _block_to(IntegratorConfig, v, w, _INTEGRATOR),
    "lemanska": lambda v, w: _block_to(LemanskaConfig, v, w, _LEMANSKA),
    "two_level": lambda v, w: _block_to(TwoLevelRequest, v, w, {k: (_int if k == "n_points" else _real) for k in
                                                               ("p0", "t_min", "t_max", "n_points", "upsilon", "step")}),
    "study": lambda v, w: _block_to(StudyRequest, v, w, {"E": _real, "lambda": _real}, {"lambda": "lam"}),
    "scan": lambda v, w: _block_to(EsScanConfig, v, w, _SCAN),
    "families": lambda v, w: _block_to(FamiliesRequest, v, w, {"resolution": _int}),
}


def parse_config(doc: Any) -> RunConfig:
    """Validate a decoded JSON document and build a :class:`RunConfig`."""
    _check_keys(doc, _TOP, "config")
    kwargs = {k: _TOP[k](v, k) for k, v in doc.items()}
    if "spectrum" in kwargs:
        if len(kwargs["spectrum"]) < 2:
            raise ConfigError("spectrum: need at least 2 levels")
        kwargs["spectrum"] = tuple(kwargs["spectrum"])
    for name in ("kB", "tau"):
        if name in kwargs and not kwargs[name] > 0:
            raise ConfigError(f"{name}: must be positive")
    return RunConfig(**kwargs, source=doc)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_config(doc)


def require(cfg: RunConfig, *names: str) -> None:
    for name in names:
        if getattr(cfg, name) is None:
            raise ConfigError(f"missing required field {name!r}")


# ---------------------------------------------------------------------------
# serialization

def fmt_csv(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return ""
    return format(x, ".17g")


def _json_value(x):
    if x is None or isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return None if math.isnan(x) else x
    if isinstance(x, np.ndarray):
        return [_json_value(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_json_value(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _json_value(v) for k, v in x.items()}
    if dataclasses.is_dataclass(x):
        return {f.name: _json_value(getattr(x, f.name)) for f in dataclasses.fields(x)}
    return str(x)


def dumps_json(obj) -> str:
    return json.dumps(_json_value(obj), indent=1, allow_nan=False) + "\n"


def trajectory_rows(traj: Trajectory, extra: tuple = ()):
    for s in traj.samples:
        r = s.report
        yield [s.t, *s.p, r.E, r.S, r.entropy_rate, r.beta, r.alpha, r.massieu, r.cov_EE, r.cov_SS, r.cov_MM, r.branch, *extra]


def emit(text: str, path) -> None:
    if path is None:
        import sys
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise SearelaxError(f"cannot write {path}: {exc.strerror}") from None


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_csv(v) for v in row])
    return buf.getvalue()


def trajectory_json(traj: Trajectory, config_echo: Optional[dict] = None) -> dict:
    n = traj.samples[0].p.size
    cols = trajectory_columns(n)
    return {
        "columns": cols,
        "samples": [dict(zip(cols, row)) for row in trajectory_rows(traj)],
        "terminal_status": traj.terminal_status,
        "terminal_state": traj.terminal_state.probs,
        "direction": traj.direction,
        "diagnostics": traj.diagnostics,
        "config": config_echo if config_echo is not None else {},
    }


def write_trajectory(traj: Trajectory, fmt: str = "csv", path=None, config_echo: Optional[dict] = None) -> None:
    """Write a trajectory; ``path=None`` writes to stdout."""
    if not traj.samples:
        raise SearelaxError("empty trajectory")
    if fmt not in FORMATS:
        raise ConfigError(f"unknown output format {fmt!r}")
    if fmt == "csv":
        emit(csv_text(trajectory_columns(traj.samples[0].p.size), trajectory_rows(traj)), path)
    else:
        emit(dumps_json(trajectory_json(traj, config_echo)), path)


def write_table(header, rows, fmt: str = "csv", path=None, meta: Optional[dict] = None) -> None:
    rows = list(rows)
    if fmt == "csv":
        emit(csv_text(header, rows), path)
    else:
        doc = {"columns": list(header), "rows": [dict(zip(header, r)) for r in rows]}
        if meta:
            doc.update(meta)
        emit(dumps_json(doc), path)


def read_csv_table(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]
