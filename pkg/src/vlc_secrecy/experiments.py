"""Turn a validated configuration into result rows.

Unit conversion (dB, dBm, degrees, cm^2) happens here and nowhere else;
the library below works in linear SI units throughout.
"""

from __future__ import annotations

import math

import numpy as np

from . import beamform as bf
from .channel import DriveConfig, OpticalFrontEnd, gain_vector
from .errors import ConfigError, InfeasibleError
from .geometry import IntensityField, RoomConfig, build_grid_layout, explicit_layout, nearest_transmitter
from .montecarlo import TrialConfig, simulate_sop
from .scenario import Scenario
from .secrecy import SecrecyThreshold, build_sop_model, sop_closed_form
from .selection import select_and_weight, selection_metrics

__all__ = ["build_scenario", "run_point", "db", "from_db"]


def db(x: float) -> float:
    return float(10 * np.log10(x)) if x > 0 else -math.inf


def from_db(x: float) -> float:
    return 10 ** (x / 10)


def build_scenario(cfg: dict) -> Scenario:
    r, lay, fe, dr = cfg["room"], cfg["layout"], cfg["front_end"], cfg["drive"]
    try:
        room = RoomConfig(r["length_m"], r["width_m"], r["height_m"])
        if lay["kind"] == "grid":
            layout = build_grid_layout(room, lay["rows"], lay["cols"], lay["edge_m"])
        else:
            layout = explicit_layout(lay["positions_m"], lay.get("cell_half_width_m"), lay.get("cell_aspect"))
        front_end = OpticalFrontEnd(
            conversion=fe["conversion_w_per_a"],
            half_angle=math.radians(fe["half_angle_deg"]),
            pd_area=fe["pd_area_cm2"] * 1e-4,
            lens_index=fe["lens_index"],
            fov=math.radians(fe["fov_deg"]),
            responsivity=fe["responsivity_a_per_w"],
            tia_gain=fe["tia_gain_v_per_a"],
        )
        noise = from_db(dr["noise_power_dbm"]) * 1e-3
        if "dc_bias_a" in dr:
            drive = DriveConfig(dr["dc_bias_a"], dr["mod_index"], noise)
        else:
            drive = DriveConfig.from_fixture(
                dr["leds_per_fixture"], dr["led_power_w"], fe["conversion_w_per_a"], dr["mod_index"], noise
            )
        field = IntensityField.homogeneous(cfg["eavesdroppers"]["intensity_per_m2"])
        return Scenario(room, layout, front_end, drive, field)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _targets(exp: dict) -> bf.SnrTargets:
    def lin(key):
        return from_db(exp[key]) if key in exp else None

    return bf.SnrTargets(
        rho_u=lin("rho_u_db"),
        rhobar_e=lin("rhobar_e_db"),
        xi_u=exp.get("xi_u_bits"),
        xibar_e=exp.get("xibar_e_bits"),
    )


def _selection_target(objective: str, t: bf.SnrTargets) -> bf.SnrTargets:
    if objective == "min-ed-snr":
        return bf.SnrTargets(rho_u=t.rho_u)
    if objective == "max-ue-snr":
        return bf.SnrTargets(rhobar_e=t.rhobar_e)
    if objective == "min-ed-capacity":
        return bf.SnrTargets(rho_u=t.m1)
    return bf.SnrTargets(rhobar_e=t.m2)


def _beamform(objective, gm, drive, t):
    if objective == "min-ed-snr":
        return bf.min_ed_snr_beamformer(gm, drive, t.rho_u)
    if objective == "max-ue-snr":
        return bf.max_ue_snr_beamformer(gm, drive, t.rhobar_e)
    if objective == "min-ed-capacity":
        return bf.min_ed_capacity_beamformer(gm, drive, t.xi_u)
    return bf.max_ue_capacity_beamformer(gm, drive, t.xibar_e)


def _bbar(sc: Scenario, exp: dict):
    return bf.compute_Bbar(sc.layout, sc.cc, sc.field, sc.room, nodes=exp["quad_nodes"], return_error=True)


def _run_beamform(sc: Scenario, exp: dict) -> list[dict]:
    objective = exp.get("objective", "min-ed-snr")
    t = _targets(exp)
    ue = np.asarray(exp["ue_m"], dtype=float)
    Bbar, err = _bbar(sc, exp)
    gm = bf.gram_matrices(gain_vector(sc.layout, sc.cc, ue), Bbar, err)
    res = _beamform(objective, gm, sc.drive, t)
    sel = select_and_weight(sc.layout, sc.cc, sc.drive, ue, _selection_target(objective, t), _bbar_ii(sc, ue, Bbar))
    sm = selection_metrics(sel, gm, sc.drive, sc.layout, sc.cc, sc.field, sc.room)
    row = {"ue_x_m": float(ue[0]), "ue_y_m": float(ue[1]), "objective": objective, "method": res.method}
    for i, wi in enumerate(res.w):
        row[f"w{i + 1}"] = float(wi)
    row.update(
        gamma_u_db=db(res.gamma_u),
        gamma_e_avg_db=db(res.gamma_e_avg),
        eta_max=float(res.eta_max),
        sel_index=sel.index,
        sel_omega=sel.omega,
        sel_gamma_u_db=db(sm.gamma_u),
        sel_gamma_e_avg_db=db(sm.gamma_e_avg),
        bbar_quad_error=err,
    )
    return [row]


def _bbar_ii(sc, ue, Bbar):
    i = nearest_transmitter(sc.layout, ue)
    return float(Bbar[i, i])


def _run_select(sc: Scenario, exp: dict) -> list[dict]:
    ue = np.asarray(exp["ue_m"], dtype=float)
    t = _targets(exp)
    Bbar, err = _bbar(sc, exp)
    target = None
    if t.rho_u is not None:
        target = bf.SnrTargets(rho_u=t.rho_u)
    elif t.rhobar_e is not None:
        target = bf.SnrTargets(rhobar_e=t.rhobar_e)
    sel = select_and_weight(
        sc.layout, sc.cc, sc.drive, ue, target, _bbar_ii(sc, ue, Bbar), exp.get("literal_conditions", False)
    )
    gm = bf.gram_matrices(gain_vector(sc.layout, sc.cc, ue), Bbar, err)
    sm = selection_metrics(sel, gm, sc.drive, sc.layout, sc.cc, sc.field, sc.room)
    return [
        {
            "ue_x_m": float(ue[0]),
            "ue_y_m": float(ue[1]),
            "index": sel.index,
            "omega": sel.omega,
            "clamped": sel.clamped,
            "gamma_u_db": db(sm.gamma_u),
            "gamma_e_avg_db": db(sm.gamma_e_avg),
            "c_u_lower_bits": sm.c_u_lower,
            "c_e_upper_avg_bits": sm.c_e_upper_avg,
        }
    ]


def _closed_form(sc: Scenario, exp: dict) -> dict:
    if not sc.layout.has_cells:
        raise ConfigError("closed-form SOP needs coverage cells: set layout.cell_half_width_m and layout.cell_aspect")
    try:
        model = build_sop_model(sc.drive, sc.cc, sc.layout, sc.field.rate)
    except ValueError as exc:
        raise ConfigError(f"closed-form SOP unavailable for this layout: {exc}") from exc
    upper, lower = sop_closed_form(model, SecrecyThreshold(exp["c_th_bits"]))
    return {
        "lambda_E": sc.field.rate,
        "C_th": exp["c_th_bits"],
        "n_tx": sc.layout.n,
        "sop_upper_cf": upper,
        "sop_lower_cf": lower,
    }


def _run_sop_mc(sc: Scenario, exp: dict, seed: int, workers: int) -> list[dict]:
    row = _closed_form(sc, exp)
    scheme = exp.get("scheme", "selection")
    t = _targets(exp)
    targets = None if t.rho_u is None and t.rhobar_e is None else t
    schemes = ("selection", "beamforming") if scheme == "both" else (scheme,)
    for s in schemes:
        tc = TrialConfig(
            scenario=sc,
            c_th=exp["c_th_bits"],
            trials=exp.get("trials", 100_000),
            seed=seed,
            scheme=s,
            omega=exp.get("omega", 1.0),
            targets=targets,
            ue_cell=exp.get("ue_cell", "center"),
            workers=workers,
            quad_nodes=exp["quad_nodes"],
        )
        est = simulate_sop(tc)
        prefix = "sop" if s == "selection" else "bf_sop"
        row[f"{prefix}_upper_mc"] = est.upper.value
        row[f"{prefix}_upper_mc_se"] = est.upper.std_error
        row[f"{prefix}_lower_mc"] = est.lower.value
        row[f"{prefix}_lower_mc_se"] = est.lower.std_error
        row["trials"] = est.upper.trials_used
    return [row]


def _axis(rng, step):
    lo, hi = rng
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def _run_surface(sc: Scenario, exp: dict) -> list[dict]:
    objective = exp.get("objective", "min-ed-snr")
    t = _targets(exp)
    step = exp.get("step_m", 0.1)
    xs = _axis(exp.get("x_range_m", [0.0, sc.room.length / 2]), step)
    ys = _axis(exp.get("y_range_m", [0.0, sc.room.width / 2]), step)
    Bbar, err = _bbar(sc, exp)
    st = _selection_target(objective, t)
    rows = []
    for x in xs:
        for y in ys:
            ue = np.array([x, y])
            gm = bf.gram_matrices(gain_vector(sc.layout, sc.cc, ue), Bbar, err)
            row = {"ue_x_m": round(float(x), 10), "ue_y_m": round(float(y), 10)}
            try:
                res = _beamform(objective, gm, sc.drive, t)
                bf_val = res.gamma_e_avg if objective == "min-ed-snr" else res.gamma_u
                row["bf_method"] = res.method
            except InfeasibleError:
                bf_val = math.nan
                row["bf_method"] = "infeasible"
            try:
                sel = select_and_weight(sc.layout, sc.cc, sc.drive, ue, st, _bbar_ii(sc, ue, Bbar))
                if objective == "min-ed-snr":
                    sel_val = sc.phi_coef * sel.omega**2 * Bbar[sel.index, sel.index]
                else:
                    sel_val = sc.phi_coef * float(gm.h_u @ sel.w_s) ** 2
                row["sel_index"] = sel.index
            except InfeasibleError:
                sel_val = math.nan
                row["sel_index"] = -1
            if objective == "min-ed-snr":
                row.update(bf_gamma_e_avg_db=db(bf_val), sel_gamma_e_avg_db=db(sel_val))
                row["bf_advantage_db"] = db(sel_val) - db(bf_val)
            else:
                row.update(bf_gamma_u_db=db(bf_val), sel_gamma_u_db=db(sel_val))
                row["bf_advantage_db"] = db(bf_val) - db(sel_val)
            rows.append(row)
    return rows


def run_point(cfg: dict, seed: int, workers: int = 1) -> list[dict]:
    """Result rows for one (already swept) configuration."""
    sc = build_scenario(cfg)
    exp = cfg["experiment"]
    mode = exp["mode"]
    if mode == "beamform":
        return _run_beamform(sc, exp)
    if mode == "select":
        return _run_select(sc, exp)
    if mode == "sop-closed":
        return [_closed_form(sc, exp)]
    if mode == "sop-mc":
        return _run_sop_mc(sc, exp, seed, workers)
    if mode == "surface":
        return _run_surface(sc, exp)
    raise ConfigError(f"unknown mode '{mode}'")
