"""Run configuration: an INI file with a fixed schema, validated before any work.

Sections and keys (all optional except ``[geometry] name``)::

    [geometry]  kind = fracture | coupled   name = <catalog or reservoir name>
                H = <thickness parameter>   q_plus = <flux>   q_minus = <flux>
                qtilde_at = boundary | center   (fracture runs only)
    [fluid]     k_p  k_f  beta  Q  gamma  mu
    [mesh]      n_u  n_s  n_line  h_far  grading  min_angle
    [solver]    rel_tol  max_iter  relaxation  fallback_relaxation
    [sweep]     H = a, b, ...   beta = a, b, ...   h = a, b, ...
    [output]    dir = <directory>   fields = true | false

For ``kind = fracture`` the mesh keys ``n_u``/``n_s`` describe the
cross-section grid and ``n_line`` the line grids; for ``kind = coupled`` they
are the strip resolution passed to the reservoir mesher.
"""
from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field, replace
from pathlib import Path

from .catalog import CATALOG
from .coupled.scenario import RESERVOIRS, MeshControls
from .discretization import PicardConfig
from .errors import ConfigError
from .flowlaw import FluidParams

_SCHEMA = {
    "geometry": {"kind": str, "name": str, "H": float, "q_plus": float, "q_minus": float, "qtilde_at": str},
    "fluid": {"k_p": float, "k_f": float, "beta": float, "Q": float, "gamma": float, "mu": float},
    "mesh": {"n_u": int, "n_s": int, "n_line": int, "h_far": float, "grading": float, "min_angle": float},
    "solver": {"rel_tol": float, "max_iter": int, "relaxation": float, "fallback_relaxation": float},
    "sweep": {"H": "floats", "beta": "floats", "h": "floats"},
    "output": {"dir": str, "fields": bool},
}

FRACTURE_MESH_DEFAULTS = {"n_u": 400, "n_s": 16, "n_line": 400}


@dataclass(frozen=True)
class RunConfig:
    kind: str
    name: str
    H: float
    q_plus: float
    q_minus: float
    fluid: FluidParams
    picard: PicardConfig
    mesh: dict
    H_list: tuple = ()
    beta_list: tuple = ()
    h_list: tuple = ()
    out_dir: str | None = None
    fields: bool = True
    qtilde_at: str = "boundary"
    source: dict = field(default_factory=dict)  # normalised key/value echo

    @property
    def has_table(self):
        return bool(self.H_list or self.beta_list)

    @property
    def cells(self):
        """Sweep cells in deterministic (H, beta) order."""
        Hs = self.H_list or (self.H,)
        betas = self.beta_list or (self.fluid.beta,)
        return [(H, b) for H in Hs for b in betas]

    def mesh_controls(self):
        keys = ("n_u", "n_s", "h_far", "grading", "min_angle")
        return MeshControls(**{k: self.mesh[k] for k in keys if k in self.mesh})

    def digest(self):
        text = "\n".join(f"{s}.{k}={v}" for s, kv in sorted(self.source.items()) for k, v in sorted(kv.items()))
        return hashlib.sha256(text.encode()).hexdigest()

    def with_tol(self, tol):
        return replace(self, picard=replace(self.picard, rel_tol=float(tol)))


def _convert(section, key, raw, kind):
    try:
        if kind == "floats":
            vals = tuple(float(x) for x in raw.split(",") if x.strip())
            if not vals:
                raise ValueError("empty list")
            return vals
        if kind is bool:
            low = raw.strip().lower()
            if low not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError(raw)
            return low in ("true", "yes", "1")
        return kind(raw.strip())
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} ({exc})") from None


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keys are case sensitive (H vs h)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    values = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            values.setdefault(section, {})[key] = _convert(section, key, raw, _SCHEMA[section][key])

    geo = values.get("geometry", {})
    if "name" not in geo:
        raise ConfigError("[geometry] name is required")
    name = geo["name"]
    kind = geo.get("kind", "coupled" if name in RESERVOIRS else "fracture")
    if kind == "fracture":
        if name not in CATALOG:
            raise ConfigError(f"unknown fracture geometry {name!r}; known: {sorted(CATALOG)}")
        H_default = CATALOG[name].default_H
    elif kind == "coupled":
        if name not in RESERVOIRS:
            raise ConfigError(f"unknown reservoir {name!r}; known: {sorted(RESERVOIRS)}")
        H_default = 0.1
    else:
        raise ConfigError(f"[geometry] kind must be 'fracture' or 'coupled', got {kind!r}")

    qtilde_at = geo.get("qtilde_at", "boundary")
    if qtilde_at not in ("boundary", "center"):
        raise ConfigError(f"[geometry] qtilde_at must be 'boundary' or 'center', got {qtilde_at!r}")
    if kind == "coupled" and "qtilde_at" in geo:
        raise ConfigError("[geometry] qtilde_at applies to fracture runs only")

    sweep = values.get("sweep", {})
    if kind == "fracture" and ("H" in sweep or "beta" in sweep or "h" in sweep):
        raise ConfigError("[sweep] is only supported for coupled scenarios")
    for key, vals in sweep.items():
        if any(v <= 0 for v in vals) and key != "beta":
            raise ConfigError(f"[sweep] {key} values must be positive")
        if key == "beta" and any(v < 0 for v in vals):
            raise ConfigError("[sweep] beta values must be non-negative")
    if "h" in sweep and any(b >= a for a, b in zip(sweep["h"], sweep["h"][1:])):
        raise ConfigError("[sweep] h must be strictly decreasing")

    try:
        fluid = FluidParams(**values.get("fluid", {}))
        picard = PicardConfig(**values.get("solver", {}))
        mesh = dict(FRACTURE_MESH_DEFAULTS) if kind == "fracture" else {}
        mesh.update(values.get("mesh", {}))
        if kind == "coupled":
            if "n_line" in mesh:
                raise ValueError("n_line applies to fracture runs only")
            MeshControls(**mesh)
        elif mesh["n_u"] < 2 or mesh["n_s"] < 2 or mesh["n_line"] < 3:
            raise ValueError("fracture grids need n_u >= 2, n_s >= 2 and n_line >= 3")
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None

    H = geo.get("H", H_default)
    if not H > 0:
        raise ConfigError("[geometry] H must be positive")
    out = values.get("output", {})
    return RunConfig(
        kind=kind,
        name=name,
        H=H,
        q_plus=geo.get("q_plus", 0.0),
        q_minus=geo.get("q_minus", 0.0),
        fluid=fluid,
        picard=picard,
        mesh=mesh,
        H_list=sweep.get("H", ()),
        beta_list=sweep.get("beta", ()),
        h_list=sweep.get("h", ()),
        out_dir=out.get("dir"),
        fields=out.get("fields", True),
        qtilde_at=qtilde_at,
        source={s: {k: repr(v) for k, v in kv.items()} for s, kv in values.items()},
    )


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
