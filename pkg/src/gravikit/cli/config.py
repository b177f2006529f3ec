"""Scene configuration files (TOML, or JSON as an alternative).

A minimal file::

    [scene]
    rank = 1
    generators = [[0.0, 0.0, 12.0]]
    points = [[2.5, 0.5, 3.0]]
    epsilon = 1e-3

Optional sections: ``[greens]`` (target_tol), ``[gluing]`` (profile, R0, R1),
``[sweep]`` (epsilons, n_samples), ``[quadrature]`` (sphere, torus, tolerance),
``[output]`` (dir, format). Every default is filled in and echoed back by
``SceneConfig.as_dict``.
"""

from __future__ import annotations

import hashlib
import json
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigError, ParseError, SceneError, ValidationError
from ..geometry import Lattice, Scene, validate_scene
from ..gluing import PROFILES
from ..greens import GreensParams

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEFAULT_EPSILONS = tuple(float(e) for e in np.geomspace(1e-4, 1e-2, 6))
FORMATS = ("json", "csv")
SECTIONS = {
    "scene": {"rank", "generators", "points", "epsilon"},
    "greens": {"target_tol"},
    "gluing": {"profile", "R0", "R1"},
    "sweep": {"epsilons", "n_samples"},
    "quadrature": {"sphere", "torus", "tolerance"},
    "output": {"dir", "format"},
}


@dataclass
class SceneConfig:
    scene: Scene
    greens: GreensParams = field(default_factory=GreensParams)
    profile: str = "quintic"
    R0: float | None = None
    R1: float | None = None
    epsilons: tuple = DEFAULT_EPSILONS
    n_samples: int = 1000
    sphere: tuple = (24, 48)
    torus: int = 48
    flux_tolerance: float = 1e-10
    out_dir: str = "."
    out_format: str = "json"
    source: str = ""

    def as_dict(self) -> dict:
        lat = self.scene.lattice
        return {
            "scene": {
                "rank": lat.rank,
                "generators": lat.generators.tolist(),
                "points": self.scene.points_p.tolist(),
                "epsilon": self.scene.epsilon,
                "n": self.scene.n,
                "fixed_points": self.scene.fixed_points_q.tolist(),
            },
            "greens": {"target_tol": self.greens.target_tol},
            "gluing": {"profile": self.profile, "R0": self.R0, "R1": self.R1},
            "sweep": {"epsilons": list(self.epsilons), "n_samples": self.n_samples},
            "quadrature": {"sphere": list(self.sphere), "torus": self.torus, "tolerance": self.flux_tolerance},
            "output": {"dir": self.out_dir, "format": self.out_format},
        }

    def digest(self) -> str:
        text = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _parse_text(text: str, suffix: str) -> dict:
    if suffix == ".json":
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        col = getattr(exc, "colno", None)
        msg = str(exc)
        m = re.search(r"\(at line (\d+), column (\d+)\)", msg)
        if m:
            line, col = int(m.group(1)), int(m.group(2))
            msg = msg[: m.start()].strip()
        elif line is None:
            # "at end of document" and similar: point past the last line
            line, col = text.count("\n") + 1, 1
        raise ParseError(msg, line, col) from None


def _number(section, key, value, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"[{section}] {key} must be a number (got {value!r})")
    if kind is int:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"[{section}] {key} must be an integer (got {value!r})")
        return int(value)
    return float(value)


def _vectors(section, key, value):
    if not isinstance(value, list):
        raise ConfigError(f"[{section}] {key} must be a list of 3-vectors")
    out = []
    for v in value:
        if not isinstance(v, list) or len(v) != 3:
            raise ConfigError(f"[{section}] {key} entries must be 3-vectors (got {v!r})")
        out.append([_number(section, key, c) for c in v])
    return np.array(out, float).reshape(-1, 3)


def config_from_dict(raw: dict, source: str = "") -> SceneConfig:
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a table")
    for name, body in raw.items():
        if name not in SECTIONS:
            raise ConfigError(f"unknown section [{name}]")
        if not isinstance(body, dict):
            raise ConfigError(f"[{name}] must be a table")
        unknown = set(body) - SECTIONS[name]
        if unknown:
            raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(sorted(unknown))}")
    sc = raw.get("scene")
    if sc is None:
        raise ConfigError("missing [scene] section")
    if "rank" not in sc:
        raise ConfigError("[scene] rank is required")
    rank = _number("scene", "rank", sc["rank"], int)
    gens = _vectors("scene", "generators", sc.get("generators", []))
    points = _vectors("scene", "points", sc.get("points", []))
    epsilon = _number("scene", "epsilon", sc.get("epsilon", 1e-3))
    scene = Scene(Lattice(rank, gens), points, epsilon)
    errors = validate_scene(scene)
    if errors:
        raise ValidationError(errors)

    cfg = SceneConfig(scene=scene, source=source)
    gr = raw.get("greens", {})
    if "target_tol" in gr:
        tol = _number("greens", "target_tol", gr["target_tol"])
        if not tol > 0:
            raise ConfigError("[greens] target_tol must be positive")
        cfg.greens = GreensParams(target_tol=tol)
    gl = raw.get("gluing", {})
    if "profile" in gl:
        if gl["profile"] not in PROFILES:
            raise ConfigError(f"[gluing] profile must be one of {PROFILES}")
        cfg.profile = gl["profile"]
    for key in ("R0", "R1"):
        if key in gl:
            setattr(cfg, key, _number("gluing", key, gl[key]))
    sw = raw.get("sweep", {})
    if "epsilons" in sw:
        if not isinstance(sw["epsilons"], list):
            raise ConfigError("[sweep] epsilons must be a list")
        eps = tuple(_number("sweep", "epsilons", e) for e in sw["epsilons"])
        if any(e <= 0 for e in eps):
            raise ConfigError("[sweep] epsilons must be positive")
        cfg.epsilons = eps
    if "n_samples" in sw:
        cfg.n_samples = _number("sweep", "n_samples", sw["n_samples"], int)
        if cfg.n_samples < 1:
            raise ConfigError("[sweep] n_samples must be positive")
    qd = raw.get("quadrature", {})
    if "sphere" in qd:
        s = qd["sphere"]
        if not isinstance(s, list) or len(s) != 2:
            raise ConfigError("[quadrature] sphere must be [n_theta, n_phi]")
        cfg.sphere = tuple(_number("quadrature", "sphere", v, int) for v in s)
    if "torus" in qd:
        cfg.torus = _number("quadrature", "torus", qd["torus"], int)
    if "tolerance" in qd:
        cfg.flux_tolerance = _number("quadrature", "tolerance", qd["tolerance"])
    if min(cfg.sphere) < 8 or cfg.torus < 8:
        raise ConfigError("[quadrature] orders must be >= 8")
    out = raw.get("output", {})
    if "dir" in out:
        if not isinstance(out["dir"], str):
            raise ConfigError("[output] dir must be a string")
        cfg.out_dir = out["dir"]
    if "format" in out:
        if out["format"] not in FORMATS:
            raise ConfigError(f"[output] format must be one of {FORMATS}")
        cfg.out_format = out["format"]
    return cfg


def load_config(path) -> SceneConfig:
    """Parse and validate a configuration file; ParseError carries line and column."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {p}: {exc.strerror}") from None
    raw = _parse_text(text, p.suffix.lower())
    return config_from_dict(raw, source=str(p))


__all__ = ["DEFAULT_EPSILONS", "SceneConfig", "SceneError", "config_from_dict", "load_config"]
