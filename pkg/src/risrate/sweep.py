"""Parameter sweeps, the key = value config format and CSV output."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import QoSConfig, SystemConfig
from .effrate import (effective_rate_asymptotic, effective_rate_closed,
                      effective_rate_phase_only, effective_rate_quadrature)
from .errors import ConfigError, RisRateError
from .montecarlo import McRequest, Scenario, run_mc, run_mc_sweep

AXES = ("rho_db", "L", "coverage_area", "theta", "d_RD")
SWEEP_METHODS = ("closed", "quad", "mc", "asym", "phase_only", "ideal_mc")
CSV_HEADER = ("axis", "axis_value", "method", "rate_bps_hz", "err", "meta_hash")


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: an axis, its grid, the methods to run and the base scenario.

    ``d_RD`` is the fixed receiver distance used by the phase_only and
    ideal_mc methods (defaults to the inner radius).
    """

    axis: str
    grid: tuple
    methods: tuple
    base: SystemConfig
    d_RD: float | None = None
    mc_samples: int = 10 ** 5
    mc_seed: int = 0
    mc_shards: int = 1

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(float(v) for v in self.grid))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.axis not in AXES:
            raise ConfigError(f"axis must be one of {AXES}, got {self.axis!r}")
        if not self.grid:
            raise ConfigError("grid is empty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ConfigError("grid must be strictly increasing")
        if not self.methods:
            raise ConfigError("no methods requested")
        bad = [m for m in self.methods if m not in SWEEP_METHODS]
        if bad:
            raise ConfigError(f"unknown methods {bad}; choose from {SWEEP_METHODS}")
        if "asym" in self.methods and self.axis not in ("L", "theta") and (
                self.base.L <= 1 or self.base.A <= 1):
            raise ConfigError("asym needs L > 1 and A > 1")
        if self.axis == "L" and any(v != int(v) or v < 1 for v in self.grid):
            raise ConfigError("L grid must hold positive integers")
        if self.mc_samples < 1 or self.mc_shards < 1:
            raise ConfigError("mc_samples and mc_shards must be positive")

    @property
    def fixed_distance(self) -> float:
        return self.base.R1 if self.d_RD is None else self.d_RD

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["base"] = self.base.as_dict()
        d["base"]["qos"] = dataclasses.asdict(self.base.qos)
        return d

    def meta_hash(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True, default=repr)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class SweepRow:
    axis: str
    axis_value: float
    method: str
    rate: float
    err: float
    meta_hash: str
    error: str | None = field(default=None, compare=False)


def point_config(spec: SweepSpec, value: float) -> tuple[SystemConfig, float]:
    """Scenario and fixed distance at one grid point."""
    base = spec.base
    d_RD = spec.fixed_distance
    if spec.axis == "rho_db":
        cfg = dataclasses.replace(base, rho=db_to_linear(value))
    elif spec.axis == "L":
        cfg = dataclasses.replace(base, L=int(value))
    elif spec.axis == "coverage_area":
        R2 = math.sqrt(value / math.pi + base.R1 ** 2)
        cfg = dataclasses.replace(base, R2=R2)
    elif spec.axis == "theta":
        T = base.qos.T if base.qos.T is not None else 1.0
        B = base.qos.B if base.qos.B is not None else 1.0
        cfg = dataclasses.replace(base, qos=QoSConfig.from_theta(value, T, B))
    else:
        cfg, d_RD = base, value
    return cfg, d_RD


def _evaluate(method, cfg, d_RD, spec):
    if method == "closed":
        return effective_rate_closed(cfg)
    if method == "quad":
        return effective_rate_quadrature(cfg)
    if method == "asym":
        return effective_rate_asymptotic(cfg)
    if method == "phase_only":
        return effective_rate_phase_only(cfg.gamma_bar_eff(d_RD), cfg.L, cfg.A)
    scenario = Scenario.full() if method == "mc" else Scenario.ideal_phase(d_RD)
    req = McRequest(cfg, scenario, spec.mc_samples, spec.mc_seed, spec.mc_shards)
    return run_mc(req).rate


def _mc_along_rho(spec: SweepSpec, method: str) -> dict:
    # Channel draws do not depend on rho: one pass serves the whole grid and
    # gives the same numbers as per-point runs.
    scenario = Scenario.full() if method == "mc" else Scenario.ideal_phase(spec.fixed_distance)
    req = McRequest(spec.base, scenario, spec.mc_samples, spec.mc_seed, spec.mc_shards)
    results = run_mc_sweep(req, [db_to_linear(v) for v in spec.grid])
    return {v: r.rate for v, r in zip(spec.grid, results)}


def run_sweep(spec: SweepSpec, log=None) -> list[SweepRow]:
    """Evaluate every (grid point, method); failures land in ``SweepRow.error``."""
    h = spec.meta_hash()
    cached = {}
    if spec.axis == "rho_db":
        for m in ("mc", "ideal_mc"):
            if m in spec.methods:
                cached[m] = _mc_along_rho(spec, m)
    rows = []
    for value in spec.grid:
        for method in spec.methods:
            try:
                cfg, d_RD = point_config(spec, value)
                est = cached[method][value] if method in cached else _evaluate(method, cfg, d_RD, spec)
                rows.append(SweepRow(spec.axis, value, method, est.rate, est.err_abs, h))
            except (RisRateError, ValueError, ArithmeticError) as exc:
                msg = f"{type(exc).__name__}: {exc}"
                if log is not None:
                    log(f"{spec.axis}={value!r} {method}: {msg}")
                rows.append(SweepRow(spec.axis, value, method, math.nan, math.nan, h, msg))
    return rows


def _write_rows(fh, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([r.axis, repr(float(r.axis_value)), r.method,
                    repr(float(r.rate)), repr(float(r.err)), r.meta_hash])


def emit_csv(rows, path) -> None:
    """Write rows with round-trip float formatting, LF newlines, UTF-8.

    ``path`` may also be an open text stream.
    """
    if hasattr(path, "write"):
        _write_rows(path, rows)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        _write_rows(fh, rows)


def read_csv(path) -> list[SweepRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ConfigError(f"unexpected CSV header {header}")
        return [SweepRow(a, float(v), m, float(r), float(e), h) for a, v, m, r, e, h in reader]


# --- key = value configuration files ----------------------------------------

CONFIG_KEYS = ("rho_db", "delta", "L", "R1", "R2", "d_SR", "A", "theta", "T", "B", "d_RD")
SWEEP_KEYS = ("axis", "grid", "methods", "mc_samples", "mc_seed", "mc_shards")
REQUIRED = ("rho_db", "delta", "L", "R1", "R2")


class ConfigParseError(ConfigError):
    def __init__(self, message, line=None, key=None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.key = key


_SPACE_RE = re.compile(r"^\s*(linspace|logspace|arange)\s*\((.*)\)\s*$")


def parse_grid(text: str) -> tuple:
    """``0, 5, 10`` or ``linspace(a, b, n)`` / ``logspace(a, b, n)`` / ``arange(a, b, step)``."""
    m = _SPACE_RE.match(text)
    if m:
        args = [float(v) for v in m.group(2).split(",")]
        if m.group(1) == "arange":
            a, b, step = args
            return tuple(np.round(np.arange(a, b + step / 2, step), 12).tolist())
        a, b, n = args
        fn = np.linspace if m.group(1) == "linspace" else np.logspace
        return tuple(fn(a, b, int(n)).tolist())
    return tuple(float(v) for v in text.split(",") if v.strip())


def parse_pairs(text: str) -> dict:
    """Parse key = value lines (``#`` comments) into a dict of strings, strictly."""
    known = CONFIG_KEYS + SWEEP_KEYS
    out = {}
    lines = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"expected 'key = value', got {raw.strip()!r}", no)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ConfigParseError(f"unknown key {key!r}", no, key)
        if key in out:
            raise ConfigParseError(f"duplicate key {key!r}", no, key)
        if not value:
            raise ConfigParseError(f"empty value for {key!r}", no, key)
        out[key] = value
        lines[key] = no
    out["__lines__"] = lines
    return out


def _line(pairs, key):
    return pairs.get("__lines__", {}).get(key)


def _number(pairs, key, cast=float):
    try:
        return cast(pairs[key])
    except ValueError:
        raise ConfigParseError(f"bad value {pairs[key]!r} for {key!r}",
                               _line(pairs, key), key) from None


def build_config(pairs: dict) -> SystemConfig:
    for key in REQUIRED:
        if key not in pairs:
            raise ConfigParseError(f"missing required key {key!r}", key=key)
    if "A" in pairs and "theta" in pairs:
        raise ConfigParseError("give either A or theta (with T, B), not both", key="A")
    if "A" in pairs:
        qos = QoSConfig(_number(pairs, "A"))
    elif "theta" in pairs:
        qos = QoSConfig.from_theta(_number(pairs, "theta"),
                                   _number(pairs, "T") if "T" in pairs else 1.0,
                                   _number(pairs, "B") if "B" in pairs else 1.0)
    else:
        raise ConfigParseError("missing required key 'A' (or 'theta')", key="A")
    L = _number(pairs, "L")
    if L != int(L):
        raise ConfigParseError(f"L must be an integer, got {pairs['L']!r}",
                               _line(pairs, "L"), "L")
    try:
        return SystemConfig(
            rho=db_to_linear(_number(pairs, "rho_db")), delta=_number(pairs, "delta"),
            L=int(L), R1=_number(pairs, "R1"), R2=_number(pairs, "R2"), qos=qos,
            d_SR=_number(pairs, "d_SR") if "d_SR" in pairs else 1.0)
    except ConfigParseError:
        raise
    except ConfigError as exc:
        raise ConfigParseError(str(exc)) from None


def build_sweep(pairs: dict, cfg: SystemConfig) -> SweepSpec:
    if "axis" not in pairs:
        raise ConfigParseError("missing required key 'axis'", key="axis")
    if "grid" not in pairs:
        raise ConfigParseError("missing required key 'grid'", key="grid")
    try:
        grid = parse_grid(pairs["grid"])
    except ValueError:
        raise ConfigParseError(f"bad grid {pairs['grid']!r}", _line(pairs, "grid"), "grid") from None
    methods = tuple(m.strip() for m in pairs.get("methods", "closed").split(",") if m.strip())
    return SweepSpec(
        axis=pairs["axis"], grid=grid, methods=methods, base=cfg,
        d_RD=_number(pairs, "d_RD") if "d_RD" in pairs else None,
        mc_samples=_number(pairs, "mc_samples", lambda v: int(float(v))) if "mc_samples" in pairs else 10 ** 5,
        mc_seed=_number(pairs, "mc_seed", int) if "mc_seed" in pairs else 0,
        mc_shards=_number(pairs, "mc_shards", int) if "mc_shards" in pairs else 1)


def parse_config_text(text: str):
    """SystemConfig, or a SweepSpec when any sweep key is present."""
    pairs = parse_pairs(text)
    cfg = build_config(pairs)
    if any(k in pairs for k in SWEEP_KEYS):
        return build_sweep(pairs, cfg)
    return cfg


def parse_config(path):
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


# --- presets for the four experiment families --------------------------------

def _base_pairs(**over):
    pairs = {"rho_db": "5", "delta": "3.4", "L": "10", "R1": "2", "R2": "5", "A": "5.4"}
    pairs.update({k: str(v) for k, v in over.items()})
    return pairs


PRESETS = {
    # rate vs transmit SNR, closed form against simulation and asymptote
    "fig2": dict(pairs=_base_pairs(L=10), axis="rho_db", grid="arange(0, 30, 5)",
                 methods="closed,mc,asym"),
    # impairment comparison at a fixed receiver distance
    "fig3": dict(pairs=_base_pairs(L=40, d_RD=2), axis="rho_db", grid="arange(0, 30, 5)",
                 methods="closed,phase_only,ideal_mc"),
    # rate vs coverage area at 5 dB
    "fig4": dict(pairs=_base_pairs(L=20), axis="coverage_area",
                 grid="20, 50, 100, 150, 200, 300", methods="closed"),
    # rate vs buffer decay rate, TB = 1; delta is a representative value in [2, 4]
    "fig5": dict(pairs={k: v for k, v in _base_pairs(L=20, R2=8, delta=3.5, T=1, B=1).items()
                        if k != "A"} | {"theta": "1"},
                 axis="theta", grid="logspace(-2, 1, 13)", methods="closed"),
}


def preset_pairs(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    p = PRESETS[name]
    pairs = dict(p["pairs"])
    pairs.update(axis=p["axis"], grid=p["grid"], methods=p["methods"])
    return pairs
