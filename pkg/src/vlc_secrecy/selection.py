"""Nearest-LED selection: one fixture transmits, the rest stay dark."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .beamform import DEFAULT_NODES, GramMatrices, SnrTargets, quadrature_nodes
from .channel import ChannelConstants, DriveConfig, gain_vector
from .errors import InfeasibleError
from .geometry import IntensityField, RoomConfig, TransmitterLayout, nearest_transmitter

__all__ = ["SelectionResult", "SelectionMetrics", "select_and_weight", "selection_metrics", "ed_capacity_upper_avg"]


@dataclass(frozen=True)
class SelectionResult:
    index: int
    omega: float
    w_s: np.ndarray
    # the weight formula asked for more than one and was cut back
    clamped: bool = False


@dataclass(frozen=True)
class SelectionMetrics:
    gamma_u: float
    gamma_e_avg: float
    c_u_lower: float
    c_e_upper_avg: float


def _selection(index, omega, n):
    w = np.zeros(n)
    w[index] = min(omega, 1.0)
    return SelectionResult(index=int(index), omega=float(w[index]), w_s=w, clamped=bool(omega > 1))


def select_and_weight(
    layout: TransmitterLayout,
    cc: ChannelConstants,
    drive: DriveConfig,
    ue,
    target: Optional[SnrTargets] = None,
    bbar_ii: Optional[float] = None,
    literal_conditions: bool = False,
) -> SelectionResult:
    """Pick the fixture nearest the UE and choose its weight.

    Without a target the weight is one.  A UE SNR floor ``rho_u`` gives
    the smallest weight meeting it; an eavesdropper cap ``rhobar_e``
    (which needs ``bbar_ii``, the selected diagonal entry of Bbar) gives
    the largest weight within it.

    ``literal_conditions`` switches to the conditions
    ``omega^2 A_ii^2 >= rho_u`` and ``omega^2 Bbar_ii^2 <= rhobar_e``,
    which omit the drive factor and square the Gram entry.
    """
    idx = nearest_transmitter(layout, ue)
    n = layout.n
    if target is None or (target.rho_u is None and target.rhobar_e is None):
        return _selection(idx, 1.0, n)
    phi = drive.phi_coef
    if target.rho_u is not None:
        a_ii = float(gain_vector(layout, cc, ue)[idx] ** 2)
        omega = np.sqrt(target.rho_u) / a_ii if literal_conditions else np.sqrt(target.rho_u / (phi * a_ii))
        if omega > 1 * (1 + 1e-12):
            best = a_ii**2 if literal_conditions else phi * a_ii
            raise InfeasibleError(
                f"rho_u = {target.rho_u:.6g} unreachable by fixture {idx} at full weight ({best:.6g})",
                max_attainable=best,
            )
        return _selection(idx, min(omega, 1.0), n)
    if bbar_ii is None:
        raise ValueError("an eavesdropper SNR cap needs the Bbar diagonal entry")
    omega = np.sqrt(target.rhobar_e) / bbar_ii if literal_conditions else np.sqrt(target.rhobar_e / (phi * bbar_ii))
    return _selection(idx, omega, n)


def ed_capacity_upper_avg(
    sel: SelectionResult,
    layout: TransmitterLayout,
    cc: ChannelConstants,
    drive: DriveConfig,
    field: IntensityField,
    room: RoomConfig,
    nodes: int = 2 * DEFAULT_NODES,
) -> float:
    """E[0.5 log2(1 + phi omega^2 h_iE^2)] over the normalized ED intensity."""
    if sel.omega == 0:
        return 0.0
    x, y, w = quadrature_nodes(room, nodes)
    if field.is_homogeneous:
        wn = w / room.area
    else:
        lam = field(x, y) * w
        wn = lam / lam.sum()
    x0, y0 = layout.positions[sel.index]
    h = cc.K * ((x - x0) ** 2 + (y - y0) ** 2 + cc.height**2) ** (-(cc.m + 3) / 2)
    return float(wn @ (0.5 * np.log2(1 + drive.phi_coef * sel.omega**2 * h**2)))


def selection_metrics(
    sel: SelectionResult,
    gm: GramMatrices,
    drive: DriveConfig,
    layout: TransmitterLayout,
    cc: ChannelConstants,
    field: IntensityField,
    room: RoomConfig,
    nodes: int = 2 * DEFAULT_NODES,
) -> SelectionMetrics:
    phi = drive.phi_coef
    gamma_u = float(phi * (gm.h_u @ sel.w_s) ** 2)
    gamma_e = float(phi * sel.omega**2 * gm.Bbar[sel.index, sel.index])
    return SelectionMetrics(
        gamma_u=gamma_u,
        gamma_e_avg=gamma_e,
        c_u_lower=float(0.5 * np.log2(1 + 2 * gamma_u / (np.pi * np.e))),
        c_e_upper_avg=ed_capacity_upper_avg(sel, layout, cc, drive, field, room, nodes),
    )
