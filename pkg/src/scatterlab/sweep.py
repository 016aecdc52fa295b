"""Seeded random sweeps over scattering scenarios and CSV emission.

Parameter ranges default to the full physically sensible boxes (depolarization
and diattenuation magnitudes up to 0.95, retardance over a full turn, axes
uniform on the sphere). Per-sample RNG streams derive from (master seed,
sample index), so serial and parallel execution produce identical records.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .channel import Scenario, scatter_singlet
from .errors import ConfigError
from .qstate import (
    PlanePoint,
    classify_point,
    gw_fit,
    linear_entropy,
    mems_curve,
    tangle,
    werner_curve,
)
from .serialize import fmt12

TWO_PI = 2.0 * math.pi

RECORD_HEADER = ["scenario", "param_json", "S_L", "T", "class", "gw_fidelity"]
CURVE_HEADER = ["param", "S_L", "T"]

_BOOL_WORDS = {"true": True, "yes": True, "1": True,
               "false": False, "no": False, "0": False}


@dataclass
class SweepConfig:
    kind: str
    samples: int
    seed: int | None = None  # None: resolved by the caller (CLI flag/env) or 0
    delta_min: float = 0.0
    delta_max: float = 0.95
    retardance_min: float = 0.0
    retardance_max: float = TWO_PI
    d_min: float = 0.0
    d_max: float = 0.95
    tu_min: float = 1.0
    tu_max: float = 1.0
    fit_gw: bool = False
    out: str | None = None

    def validate(self) -> "SweepConfig":
        if self.kind not in ("I", "II", "III"):
            raise ConfigError(f"type: must be I, II or III, got {self.kind!r}")
        if self.samples < 1:
            raise ConfigError(f"samples: must be >= 1, got {self.samples}")
        if not 0.0 <= self.delta_min <= self.delta_max < 1.0:
            raise ConfigError(
                f"delta_min/delta_max: need 0 <= {self.delta_min} <= {self.delta_max} < 1"
            )
        if self.retardance_min > self.retardance_max:
            raise ConfigError(
                f"retardance_min/retardance_max: {self.retardance_min} > {self.retardance_max}"
            )
        if not 0.0 <= self.d_min <= self.d_max < 1.0:
            raise ConfigError(f"d_min/d_max: need 0 <= {self.d_min} <= {self.d_max} < 1")
        if not 0.0 < self.tu_min <= self.tu_max <= 1.0:
            raise ConfigError(f"tu_min/tu_max: need 0 < {self.tu_min} <= {self.tu_max} <= 1")
        return self


_CONFIG_KEYS = {
    "type": ("kind", str),
    "samples": ("samples", int),
    "seed": ("seed", int),
    "delta_min": ("delta_min", float),
    "delta_max": ("delta_max", float),
    "retardance_min": ("retardance_min", float),
    "retardance_max": ("retardance_max", float),
    "d_min": ("d_min", float),
    "d_max": ("d_max", float),
    "tu_min": ("tu_min", float),
    "tu_max": ("tu_max", float),
    "fit_gw": ("fit_gw", bool),
    "out": ("out", str),
}


def _coerce(key: str, value, typ):
    if typ is bool:
        if isinstance(value, bool):
            return value
        word = str(value).strip().lower()
        if word not in _BOOL_WORDS:
            raise ConfigError(f"{key}: expected a boolean, got {value!r}")
        return _BOOL_WORDS[word]
    try:
        return typ(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: expected {typ.__name__}, got {value!r}") from exc


def config_from_mapping(mapping: dict) -> SweepConfig:
    kwargs = {}
    for key, value in mapping.items():
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        attr, typ = _CONFIG_KEYS[key]
        kwargs[attr] = _coerce(key, value, typ)
    if "kind" not in kwargs:
        raise ConfigError("type: missing required key")
    if "samples" not in kwargs:
        raise ConfigError("samples: missing required key")
    return SweepConfig(**kwargs).validate()


def config_from_file(path) -> SweepConfig:
    """Parse a sweep config: `key = value` lines, or a JSON object."""
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            mapping = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON config: {exc}") from exc
        if not isinstance(mapping, dict):
            raise ConfigError(f"{path}: JSON config must be an object")
        return config_from_mapping(mapping)
    mapping = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in mapping:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        mapping[key] = value
    return config_from_mapping(mapping)


@dataclass(frozen=True)
class SweepRecord:
    scenario: str
    params: dict
    s_l: float
    t: float
    classification: str
    gw_fidelity: float | None = None


def _sphere_point(rng) -> tuple[float, float, float]:
    # two-uniform-angle method: azimuth uniform, polar from uniform cosine
    phi = rng.uniform(0.0, TWO_PI)
    cos_th = rng.uniform(-1.0, 1.0)
    sin_th = math.sqrt(max(0.0, 1.0 - cos_th * cos_th))
    return (sin_th * math.cos(phi), sin_th * math.sin(phi), cos_th)


def _draw_scenario(cfg: SweepConfig, rng) -> Scenario:
    delta = rng.uniform(cfg.delta_min, cfg.delta_max)
    if cfg.kind == "I":
        return Scenario(kind="I", delta=delta)
    if cfg.kind == "II":
        ret = rng.uniform(cfg.retardance_min, cfg.retardance_max)
        axis = _sphere_point(rng)
        return Scenario(kind="II", delta=delta, retardance=ret, axis=axis)
    mag = rng.uniform(cfg.d_min, cfg.d_max)
    direction = _sphere_point(rng)
    tu = rng.uniform(cfg.tu_min, cfg.tu_max)
    d = tuple(mag * x for x in direction)
    return Scenario(kind="III", delta=delta, d=d, tu=tu)


def run_sweep(cfg: SweepConfig, classify_tol: float = 1e-9) -> list[SweepRecord]:
    """Draw scenarios, scatter the singlet through each, record the plane point."""
    cfg.validate()
    seed = cfg.seed if cfg.seed is not None else 0
    records = []
    for index in range(cfg.samples):
        rng = np.random.default_rng([seed, index])
        sc = _draw_scenario(cfg, rng)
        rho = scatter_singlet(sc)
        t = tangle(rho, validate=False)
        s_l = linear_entropy(rho, validate=False)
        cls = classify_point(PlanePoint(s_l=s_l, t=t), tol=classify_tol)
        gw = gw_fit(rho).fidelity if cfg.fit_gw else None
        records.append(
            SweepRecord(scenario=sc.kind, params=sc.params, s_l=s_l, t=t,
                        classification=cls, gw_fidelity=gw)
        )
    return records


def write_records(records, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(RECORD_HEADER)
    for rec in records:
        writer.writerow(
            [
                rec.scenario,
                json.dumps(rec.params, sort_keys=True, separators=(",", ":")),
                fmt12(rec.s_l),
                fmt12(rec.t),
                rec.classification,
                "" if rec.gw_fidelity is None else fmt12(rec.gw_fidelity),
            ]
        )


def emit_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        write_records(records, fh)


def curve_points(kind: str, samples: int) -> list[tuple[float, float, float]]:
    """(param, S_L, T) triples for the requested boundary curve."""
    if kind == "werner":
        pts = werner_curve(samples)
    elif kind == "mems":
        pts = mems_curve(samples)
    else:
        raise ConfigError(f"curve kind must be 'werner' or 'mems', got {kind!r}")
    params = np.linspace(0.0, 1.0, samples)
    return [(float(p), pt.s_l, pt.t) for p, pt in zip(params, pts)]


def write_curve(kind: str, samples: int, stream) -> None:
    points = curve_points(kind, samples)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CURVE_HEADER)
    for param, s_l, t in points:
        writer.writerow([fmt12(param), fmt12(s_l), fmt12(t)])


def emit_curves(kind: str, samples: int, path) -> None:
    with open(path, "w", newline="") as fh:
        write_curve(kind, samples, fh)
