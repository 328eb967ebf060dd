"""Strict JSON scenario configuration.

A config is a JSON object::

    {"version": 1, "kind": "vortex", "name": "...", "seed": 0,
     "output_dir": "...", "params": {...}}

``params`` is merged over the defaults of its kind; unknown keys anywhere are
rejected and every error names the offending field.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path

FORMAT_VERSION = 1
KINDS = ("evolve", "trajectories", "vortex", "torus", "flow_scene")


class ConfigError(ValueError):
    """Invalid configuration; the CLI maps it to exit status 2."""


_EVOLVE = {
    "grid": {"lo": -12.0, "hi": 12.0, "n": 512, "dim": 1, "boundary": "periodic"},
    "constants": {"m": 1.0, "hbar": 1.0},
    "packet": {"sigma0": 1.0, "center": 0.0, "k0": 0.0},
    "potential": {"kind": "free", "params": {}},
    "dt": 2e-3,
    "steps": 1000,
    "scheme": "crank_nicolson",
    "snapshot_stride": 50,
    "derivatives": "fd",
    "convergence_levels": 1,
}

DEFAULTS = {
    "evolve": _EVOLVE,
    "trajectories": {**_EVOLVE, "seeds": {"n": 32, "mode": "quantile"}, "substeps": 8},
    "vortex": {
        "model": {"kind": "constant", "nu0": 0.1, "omega": 1.0, "amplitude": 0.0, "correlation_time": 1.0},
        "sigma": 1.0,
        "gamma": 1.0,
        "radial": {"n": 512, "r_max_over_sigma": 20.0},
        "dt": 0.01,
        "steps": 1000,
        "store_every": 100,
        "average": {"horizon": 0.0, "samples": 10000, "ensemble": 64},
    },
    "torus": {
        "a": 2.0,
        "b_list": [3.0, 2.0, 1.5, 1.0, 0.5, 0.01],
        "n_theta": 128,
        "n_phi": 128,
        "export_obj": True,
        "ring": {"omega0": 1.0, "omega1": 0.5, "b_list": [4.0, 3.0, 2.0, 1.0, 0.001], "samples_per_turn": 256},
        "double_cover": {"enabled": False, "b": 0.001, "samples": 10000},
    },
    "flow_scene": {
        "u_inf": 1.0,
        "cylinder_radius": 1.0,
        "circulation": 0.0,
        "dipole": True,
        "box": [-5.0, 5.0, -3.0, 3.0],
        "n_lines": 15,
        "rtol": 1e-11,
        "field_shape": [201, 121],
    },
}

# keys whose value is a free-form mapping checked later by the consumer
_OPEN = {"params.potential.params"}


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    name: str
    seed: int
    output_dir: str
    params: dict
    version: int = FORMAT_VERSION

    def resolved(self) -> dict:
        return {
            "version": self.version,
            "kind": self.kind,
            "name": self.name,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "params": copy.deepcopy(self.params),
        }


def _type_ok(default, value) -> bool:
    if isinstance(default, bool):
        return isinstance(value, bool)
    if isinstance(default, float):
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if isinstance(default, int):
        return isinstance(value, int) and not isinstance(value, bool)
    if isinstance(default, str):
        return isinstance(value, str)
    if isinstance(default, list):
        return isinstance(value, list)
    if isinstance(default, dict):
        return isinstance(value, dict)
    return True


def _merge(defaults: dict, given: dict, where: str) -> dict:
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        field = f"{where}.{key}"
        if key not in defaults:
            raise ConfigError(f"unknown key '{field}'")
        d = defaults[key]
        if not _type_ok(d, value):
            raise ConfigError(f"'{field}' must be of type {type(d).__name__}, got {type(value).__name__}")
        if isinstance(d, dict) and field not in _OPEN:
            out[key] = _merge(d, value, field)
        elif isinstance(d, float):
            out[key] = float(value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _require(cond: bool, field: str, msg: str):
    if not cond:
        raise ConfigError(f"'params.{field}' {msg}")


def _validate_evolve(p: dict):
    g = p["grid"]
    _require(g["dim"] in (1, 2), "grid.dim", "must be 1 or 2")
    _require(g["hi"] > g["lo"], "grid.hi", "must exceed grid.lo")
    _require(g["n"] >= 8, "grid.n", "must be at least 8")
    _require(g["boundary"] in ("periodic", "reflecting"), "grid.boundary", "must be 'periodic' or 'reflecting'")
    _require(p["constants"]["m"] > 0, "constants.m", "must be positive")
    _require(p["constants"]["hbar"] > 0, "constants.hbar", "must be positive")
    _require(p["packet"]["sigma0"] > 0, "packet.sigma0", "must be positive")
    _require(p["dt"] > 0, "dt", f"must be positive, got {p['dt']}")
    _require(p["steps"] >= 1, "steps", "must be at least 1")
    _require(p["snapshot_stride"] >= 1, "snapshot_stride", "must be at least 1")
    _require(p["scheme"] in ("crank_nicolson", "split_step_fourier"), "scheme", "must be 'crank_nicolson' or 'split_step_fourier'")
    _require(p["derivatives"] in ("fd", "spectral"), "derivatives", "must be 'fd' or 'spectral'")
    _require(not (p["derivatives"] == "spectral" and g["boundary"] != "periodic"), "derivatives",
             "'spectral' needs a periodic grid")
    _require(p["convergence_levels"] >= 1, "convergence_levels", "must be at least 1")
    from .schrodinger import PotentialSpec

    try:
        PotentialSpec(p["potential"]["kind"], p["potential"]["params"])
    except ValueError as exc:
        raise ConfigError(f"'params.potential': {exc}") from None
    if "seeds" in p:
        _require(p["seeds"]["n"] >= 1, "seeds.n", "must be at least 1")
        _require(p["seeds"]["mode"] in ("quantile", "uniform"), "seeds.mode", "must be 'quantile' or 'uniform'")
        _require(p["substeps"] >= 1, "substeps", "must be at least 1")


def _validate_vortex(p: dict):
    m = p["model"]
    _require(m["kind"] in ("zero", "constant", "cosine", "ou_noise"), "model.kind",
             "must be one of zero, constant, cosine, ou_noise")
    _require(p["sigma"] > 0, "sigma", "must be positive")
    _require(p["radial"]["n"] >= 16, "radial.n", "must be at least 16")
    _require(p["radial"]["r_max_over_sigma"] >= 10, "radial.r_max_over_sigma", "must be at least 10")
    _require(p["dt"] > 0, "dt", f"must be positive, got {p['dt']}")
    _require(p["steps"] >= 0, "steps", "must be non-negative")
    _require(p["store_every"] >= 1, "store_every", "must be at least 1")
    if m["kind"] == "cosine":
        _require(m["omega"] > 0, "model.omega", "must be positive")
        bound = 0.9 * m["omega"] * p["sigma"] ** 2
        _require(abs(m["nu0"]) <= bound, "model.nu0", f"must not exceed 0.9*omega*sigma^2 = {bound:.6g}")
    if m["kind"] == "ou_noise":
        _require(m["amplitude"] >= 0, "model.amplitude", "must be non-negative")
        _require(m["correlation_time"] > 0, "model.correlation_time", "must be positive")
    a = p["average"]
    _require(a["horizon"] >= 0, "average.horizon", "must be non-negative")
    _require(a["samples"] >= 1, "average.samples", "must be at least 1")
    _require(a["ensemble"] >= 2 or m["kind"] != "ou_noise" or a["horizon"] == 0, "average.ensemble",
             "must be at least 2 for ou_noise")


def _validate_torus(p: dict):
    _require(p["a"] > 0, "a", "must be positive")
    for key in ("b_list",):
        bl = p[key]
        _require(all(isinstance(b, (int, float)) and not isinstance(b, bool) and b >= 0 for b in bl), key,
                 "must hold non-negative numbers")
        _require(all(x >= y for x, y in zip(bl, bl[1:])), key, "must be descending")
    _require(p["n_theta"] >= 32 and p["n_phi"] >= 32, "n_theta", "and n_phi must be at least 32")
    r = p["ring"]
    _require(r["omega0"] != 0 or r["omega1"] != 0, "ring.omega0", "and ring.omega1 cannot both be zero")
    _require(all(isinstance(b, (int, float)) and b >= 0 for b in r["b_list"]), "ring.b_list",
             "must hold non-negative numbers")
    _require(r["samples_per_turn"] >= 64, "ring.samples_per_turn", "must be at least 64")
    _require(p["double_cover"]["b"] >= 0, "double_cover.b", "must be non-negative")
    _require(p["double_cover"]["samples"] >= 100, "double_cover.samples", "must be at least 100")


def _validate_flow(p: dict):
    _require(p["cylinder_radius"] > 0, "cylinder_radius", "must be positive")
    _require(len(p["box"]) == 4, "box", "must be [x0, x1, y0, y1]")
    _require(p["n_lines"] >= 1, "n_lines", "must be at least 1")
    _require(p["rtol"] > 0, "rtol", "must be positive")
    _require(len(p["field_shape"]) == 2 and all(isinstance(k, int) and k >= 2 for k in p["field_shape"]),
             "field_shape", "must be two integers >= 2")
    R = p["cylinder_radius"]
    x0, x1, y0, y1 = p["box"]
    _require(x0 <= -3 * R and x1 >= 3 * R and y0 <= -3 * R and y1 >= 3 * R, "box",
             "must contain the cylinder with a margin of two radii")


_VALIDATORS = {
    "evolve": _validate_evolve,
    "trajectories": _validate_evolve,
    "vortex": _validate_vortex,
    "torus": _validate_torus,
    "flow_scene": _validate_flow,
}


def parse_config(raw: dict, default_name: str = "scenario") -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    allowed = {"version", "kind", "name", "seed", "output_dir", "params"}
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ConfigError(f"unknown key '{unknown[0]}'")
    if "version" not in raw:
        raise ConfigError("missing required key 'version'")
    if raw["version"] != FORMAT_VERSION:
        raise ConfigError(f"'version' must be {FORMAT_VERSION}, got {raw['version']!r}")
    kind = raw.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"'kind' must be one of {', '.join(KINDS)}, got {kind!r}")
    name = raw.get("name", default_name)
    if not isinstance(name, str) or not name:
        raise ConfigError("'name' must be a non-empty string")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("'seed' must be a non-negative integer")
    output_dir = raw.get("output_dir", name)
    if not isinstance(output_dir, str) or not output_dir:
        raise ConfigError("'output_dir' must be a non-empty string")
    params_raw = raw.get("params", {})
    if not isinstance(params_raw, dict):
        raise ConfigError("'params' must be an object")
    params = _merge(DEFAULTS[kind], params_raw, "params")
    _VALIDATORS[kind](params)
    return ScenarioConfig(kind, name, seed, output_dir, params)


def load_config(path) -> ScenarioConfig:
    """Read and validate a config file; JSON syntax errors report line and column."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return parse_config(raw, default_name=path.stem)
