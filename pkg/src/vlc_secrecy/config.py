"""Experiment configuration: TOML schema, validation, overrides and dumping.

Every physical quantity carries its unit in the key name.  Unknown keys
are errors; there are no silent defaults for misspellings.
"""

from __future__ import annotations

import copy
import itertools
import sys
from importlib import resources
from pathlib import Path

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .errors import ConfigError

__all__ = [
    "SCHEMA",
    "MODES",
    "PRESETS",
    "load_config",
    "parse_config",
    "validate",
    "apply_override",
    "dump_config",
    "sweep_points",
    "preset_path",
]

_NUM = (int, float)

# section -> key -> (accepted types, default); default None means optional
SCHEMA = {
    "run": {
        "seed": (int, 0),
        "workers": (int, 1),
        "output": (str, None),
        "description": (str, None),
    },
    "room": {
        "length_m": (_NUM, 10.0),
        "width_m": (_NUM, 10.0),
        "height_m": (_NUM, 3.0),
    },
    "layout": {
        "kind": (str, "grid"),
        "rows": (int, 2),
        "cols": (int, 2),
        "edge_m": (_NUM, 1.0),
        "positions_m": (list, None),
        "cell_half_width_m": (_NUM, None),
        "cell_aspect": (_NUM, None),
    },
    "front_end": {
        "conversion_w_per_a": (_NUM, 5.0),
        "half_angle_deg": (_NUM, 60.0),
        "pd_area_cm2": (_NUM, 1.0),
        "lens_index": (_NUM, 1.5),
        "fov_deg": (_NUM, 60.0),
        "responsivity_a_per_w": (_NUM, 0.54),
        "tia_gain_v_per_a": (_NUM, 1.0),
    },
    "drive": {
        "leds_per_fixture": (int, 9),
        "led_power_w": (_NUM, 8.0),
        "dc_bias_a": (_NUM, None),
        "mod_index": (_NUM, 0.5),
        "noise_power_dbm": (_NUM, -98.35),
    },
    "eavesdroppers": {
        "intensity_per_m2": (_NUM, 0.05),
    },
    "experiment": {
        "mode": (str, "sop-closed"),
        "quad_nodes": (int, 128),
        "ue_m": (list, None),
        "objective": (str, None),
        "rho_u_db": (_NUM, None),
        "rhobar_e_db": (_NUM, None),
        "xi_u_bits": (_NUM, None),
        "xibar_e_bits": (_NUM, None),
        "literal_conditions": (bool, None),
        "c_th_bits": (_NUM, None),
        "trials": (int, None),
        "scheme": (str, None),
        "ue_cell": ((int, str), None),
        "omega": (_NUM, None),
        "x_range_m": (list, None),
        "y_range_m": (list, None),
        "step_m": (_NUM, None),
    },
}

# experiment keys each mode accepts beyond mode/quad_nodes
MODES = {
    "beamform": ("ue_m", "objective", "rho_u_db", "rhobar_e_db", "xi_u_bits", "xibar_e_bits"),
    "select": ("ue_m", "rho_u_db", "rhobar_e_db", "literal_conditions"),
    "sop-closed": ("c_th_bits",),
    "sop-mc": ("c_th_bits", "trials", "scheme", "ue_cell", "omega", "rho_u_db", "rhobar_e_db"),
    "surface": ("objective", "rho_u_db", "rhobar_e_db", "x_range_m", "y_range_m", "step_m"),
}

MODE_HELP = {
    "beamform": "optimal eigenmode beamformer (plus selection) for one UE position",
    "select": "nearest-LED selection weight and its SNR/capacity metrics",
    "sop-closed": "closed-form SOP upper/lower bounds under LED selection",
    "sop-mc": "closed-form SOP bounds next to Monte Carlo estimates",
    "surface": "beamforming vs selection SNR over a grid of UE positions",
}

OBJECTIVES = ("min-ed-snr", "max-ue-snr", "min-ed-capacity", "max-ue-capacity")

PRESETS = {
    "fig2": "two fixtures in an 8x8 m room: optimal weights at UE (0,1) and (2,1), rho_U = 40 dB",
    "fig3": "avg ED SNR surface, fixtures at (+-1,+-1), lambda_E = 0.05, rho_U = 20 dB",
    "fig4": "avg ED SNR surface, fixtures at (+-3,+-3), lambda_E = 0.05, rho_U = 20 dB",
    "fig5": "UE SNR surface, fixtures at (+-1,+-1), lambda_E = 0.05, rhobar_E = 20 dB",
    "fig6": "UE SNR surface, fixtures at (+-3,+-3), lambda_E = 0.05, rhobar_E = 20 dB",
    "fig7": "SOP bounds vs lambda_E for C_th in {0.5, 1}: closed form and Monte Carlo, 4x4 grid",
    "fig8": "SOP upper bound vs lambda_E for 2x2, 3x3, 4x4 grids: selection and beamforming",
}


def preset_path(name: str) -> Path:
    return Path(str(resources.files("vlc_secrecy") / "presets" / f"{name}.toml"))


def _type_ok(value, types) -> bool:
    if isinstance(value, bool) and types is not bool:
        return False
    return isinstance(value, types)


def _fail(msg):
    raise ConfigError(msg)


def validate(raw: dict) -> dict:
    """Check ``raw`` against the schema and fill in defaults.

    Returns a new nested dict holding every non-optional key plus the
    optional ones that were given, and the sweep block (possibly empty).
    """
    if not isinstance(raw, dict):
        _fail("configuration must be a table")
    out = {}
    for section in raw:
        if section not in SCHEMA and section != "sweep":
            _fail(f"unknown section [{section}]")
    for section, keys in SCHEMA.items():
        given = raw.get(section, {})
        if not isinstance(given, dict):
            _fail(f"[{section}] must be a table")
        for k in given:
            if k not in keys:
                _fail(f"unknown key '{section}.{k}'")
        sec = {}
        for k, (types, default) in keys.items():
            if k in given:
                v = given[k]
                if not _type_ok(v, types):
                    _fail(f"key '{section}.{k}' has wrong type {type(v).__name__}")
                sec[k] = float(v) if types is _NUM else v
            elif default is not None:
                sec[k] = default
        out[section] = sec
    _check_semantics(out, raw.get("experiment", {}))
    sweep = raw.get("sweep", {})
    if not isinstance(sweep, dict):
        _fail("[sweep] must be a table")
    for axis, values in sweep.items():
        names = axis.split(",")
        for name in names:
            sec, _, key = name.partition(".")
            if sec not in SCHEMA or key not in SCHEMA[sec]:
                _fail(f"sweep axis references unknown parameter '{name}'")
        if not isinstance(values, list) or not values:
            _fail(f"sweep axis '{axis}' needs a non-empty list of values")
        if len(names) > 1 and not all(isinstance(v, list) and len(v) == len(names) for v in values):
            _fail(f"grouped sweep axis '{axis}' needs lists of {len(names)} values")
    out["sweep"] = copy.deepcopy(sweep)
    # every sweep point must validate too
    for point in sweep_points(out):
        _check_semantics(point, point["experiment"])
    return out


def _check_semantics(cfg: dict, given_exp: dict):
    exp = cfg["experiment"]
    mode = exp["mode"]
    if mode not in MODES:
        _fail(f"unknown experiment.mode '{mode}' (choose from {', '.join(MODES)})")
    allowed = set(MODES[mode]) | {"mode", "quad_nodes"}
    for k in given_exp:
        if k not in allowed:
            _fail(f"key 'experiment.{k}' is not used by mode '{mode}'")
    kind = cfg["layout"]["kind"]
    if kind not in ("grid", "explicit"):
        _fail(f"layout.kind must be 'grid' or 'explicit', got '{kind}'")
    if kind == "explicit":
        pos = cfg["layout"].get("positions_m")
        if pos is None:
            _fail("layout.kind = 'explicit' needs 'layout.positions_m'")
        if not all(isinstance(p, list) and len(p) == 2 and all(_type_ok(c, _NUM) for c in p) for p in pos):
            _fail("'layout.positions_m' must be a list of [x, y] pairs")
    if "ue_m" in exp:
        ue = exp["ue_m"]
        if len(ue) != 2 or not all(_type_ok(c, _NUM) for c in ue):
            _fail("'experiment.ue_m' must be an [x, y] pair")
    if mode in ("beamform", "select") and "ue_m" not in exp:
        _fail(f"mode '{mode}' needs 'experiment.ue_m'")
    if mode in ("sop-closed", "sop-mc") and "c_th_bits" not in exp:
        _fail(f"mode '{mode}' needs 'experiment.c_th_bits'")
    if mode in ("beamform", "surface"):
        obj = exp.get("objective", "min-ed-snr")
        if obj not in OBJECTIVES:
            _fail(f"unknown experiment.objective '{obj}'")
        need = {"min-ed-snr": "rho_u_db", "max-ue-snr": "rhobar_e_db",
                "min-ed-capacity": "xi_u_bits", "max-ue-capacity": "xibar_e_bits"}[obj]
        if mode == "surface" and obj not in ("min-ed-snr", "max-ue-snr"):
            _fail("surface mode supports objectives 'min-ed-snr' and 'max-ue-snr'")
        if need not in exp:
            _fail(f"objective '{obj}' needs 'experiment.{need}'")
    if mode == "sop-mc":
        scheme = exp.get("scheme", "selection")
        if scheme not in ("selection", "beamforming", "both"):
            _fail(f"experiment.scheme must be selection, beamforming or both, got '{scheme}'")
        cell = exp.get("ue_cell", "center")
        if isinstance(cell, str) and cell not in ("center", "random"):
            _fail(f"experiment.ue_cell must be an index, 'center' or 'random', got '{cell}'")
    if mode == "surface":
        for k in ("x_range_m", "y_range_m"):
            r = exp.get(k)
            if r is not None and (len(r) != 2 or not all(_type_ok(c, _NUM) for c in r)):
                _fail(f"'experiment.{k}' must be a [min, max] pair")


def _set(cfg: dict, dotted: str, value):
    sec, _, key = dotted.partition(".")
    if not key:
        _fail(f"override key '{dotted}' must look like section.key")
    cfg.setdefault(sec, {})
    if not isinstance(cfg[sec], dict):
        _fail(f"'{sec}' is not a section")
    cfg[sec][key] = value


def _parse_value(text: str):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_override(raw: dict, assignment: str) -> None:
    """Apply a ``section.key=value`` override; the value is read as TOML."""
    if "=" not in assignment:
        _fail(f"override '{assignment}' must look like section.key=value")
    key, _, text = assignment.partition("=")
    key = key.strip()
    if key.startswith("sweep."):
        raw.setdefault("sweep", {})[key[len("sweep."):]] = _parse_value(text.strip())
        return
    _set(raw, key, _parse_value(text.strip()))


def parse_config(text: str, overrides=()) -> dict:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        _fail(f"cannot parse configuration: {exc}")
    for ov in overrides:
        apply_override(raw, ov)
    return validate(raw)


def load_config(source: str, overrides=()) -> dict:
    """Read a config file, or a bundled preset by name."""
    path = Path(source)
    if not path.exists():
        if source in PRESETS or source == "default":
            path = preset_path(source)
        else:
            _fail(f"no such config file or preset: '{source}'")
    return parse_config(path.read_text(encoding="utf-8"), overrides)


def dump_config(cfg: dict) -> str:
    data = {k: v for k, v in cfg.items() if k != "sweep"}
    if cfg.get("sweep"):
        data["sweep"] = cfg["sweep"]
    return tomli_w.dumps(data)


def sweep_points(cfg: dict) -> list[dict]:
    """Cartesian product of the sweep axes, in file order; each point is a full config."""
    sweep = cfg.get("sweep") or {}
    base = {k: copy.deepcopy(v) for k, v in cfg.items() if k != "sweep"}
    if not sweep:
        base["_swept"] = {}
        return [base]
    axes = list(sweep.items())
    points = []
    for combo in itertools.product(*(values for _, values in axes)):
        point = copy.deepcopy(base)
        swept = {}
        for (axis, _), value in zip(axes, combo):
            names = axis.split(",")
            vals = value if len(names) > 1 else [value]
            for name, v in zip(names, vals):
                sec, _, key = name.partition(".")
                types = SCHEMA[sec][key][0]
                if not _type_ok(v, types):
                    _fail(f"sweep value {v!r} has wrong type for '{name}'")
                point[sec][key] = float(v) if types is _NUM else v
                swept[name] = v
        point["_swept"] = swept
        points.append(point)
    return points
