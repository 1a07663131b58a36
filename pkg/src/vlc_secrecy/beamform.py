"""Secrecy beamformers built from the UE and eavesdropper Gram matrices.

The UE matrix ``A = h_U h_U^T`` is rank one, so the only non-zero
eigenvalue of ``Bbar^{-1} A`` is ``h_U^T Bbar^{-1} h_U`` with eigenvector
``Bbar^{-1} h_U``.  Every SNR- or capacity-constrained problem here reduces
to scaling that direction, except when the amplitude box binds; then
:func:`constrained_qp_fallback` solves the convex program numerically.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from .channel import BOX_TOL, ChannelConstants, DriveConfig
from .errors import ConvergenceError, InfeasibleError, SingularGramError
from .geometry import IntensityField, RoomConfig, TransmitterLayout

log = logging.getLogger(__name__)

__all__ = [
    "GramMatrices",
    "SnrTargets",
    "BeamformResult",
    "beam_vector",
    "compute_A",
    "quadrature_nodes",
    "compute_Bbar",
    "gram_matrices",
    "max_eigenpair",
    "min_ed_snr_beamformer",
    "max_ue_snr_beamformer",
    "capacity_target_to_snr_m1",
    "capacity_target_to_snr_m2",
    "min_ed_capacity_beamformer",
    "max_ue_capacity_beamformer",
    "constrained_qp_fallback",
    "brute_force_beamformer",
    "COND_LIMIT",
]

COND_LIMIT = 1e12
DEFAULT_NODES = 128


@dataclass(frozen=True)
class GramMatrices:
    h_u: np.ndarray
    A: np.ndarray
    Bbar: np.ndarray
    quadrature_error: float = 0.0

    @property
    def n(self) -> int:
        return self.h_u.shape[0]


@dataclass(frozen=True)
class SnrTargets:
    """Optimization targets: linear SNRs and capacities in bits."""

    rho_u: Optional[float] = None
    rhobar_e: Optional[float] = None
    xi_u: Optional[float] = None
    xibar_e: Optional[float] = None

    def __post_init__(self):
        for name in ("rho_u", "rhobar_e", "xi_u", "xibar_e"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive, got {v!r}")

    @property
    def m1(self) -> Optional[float]:
        return None if self.xi_u is None else capacity_target_to_snr_m1(self.xi_u)

    @property
    def m2(self) -> Optional[float]:
        return None if self.xibar_e is None else capacity_target_to_snr_m2(self.xibar_e)


@dataclass(frozen=True)
class BeamformResult:
    """Weights plus what they achieve.

    ``method`` is ``"eigen"`` for the scaled eigenmode, ``"qp"`` when the
    numeric fallback was needed and ``"clamped"`` when the eigenmode had
    to be shrunk to fit the amplitude box.
    """

    w: np.ndarray
    gamma_u: float
    gamma_e_avg: float
    eta_max: float
    method: str

    @property
    def box_active(self) -> bool:
        return self.method != "eigen"


def beam_vector(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float).ravel()
    if np.any(np.abs(w) > 1 + BOX_TOL):
        raise ValueError("beam weights violate |w_i| <= 1")
    return w


def compute_A(h_u) -> np.ndarray:
    h = np.asarray(h_u, dtype=float).ravel()
    if not np.any(h):
        raise ValueError("UE gain vector is identically zero")
    return np.outer(h, h)


def quadrature_nodes(room: RoomConfig, n: int):
    """Tensor-product Gauss-Legendre nodes over the room: (x, y, weights)."""
    t, wt = leggauss(n)
    hx, hy = room.length / 2, room.width / 2
    x, y = np.meshgrid(t * hx, t * hy, indexing="ij")
    w = np.outer(wt * hx, wt * hy)
    return x.ravel(), y.ravel(), w.ravel()


def _bbar_at(layout, cc, field, room, n):
    x, y, w = quadrature_nodes(room, n)
    if field.is_homogeneous:
        # lambda/N_E = 1/area exactly, independent of the rate
        wn = w / room.area
    else:
        lam = field(x, y) * w
        n_e = lam.sum()
        if not n_e > 0:
            raise ValueError("eavesdropper intensity integrates to zero over the room")
        wn = lam / n_e
    d2 = (x[:, None] - layout.positions[None, :, 0]) ** 2 + (y[:, None] - layout.positions[None, :, 1]) ** 2
    h = cc.K * (d2 + cc.height**2) ** (-(cc.m + 3) / 2)
    B = (h * wn[:, None]).T @ h
    return 0.5 * (B + B.T)


def compute_Bbar(
    layout: TransmitterLayout,
    cc: ChannelConstants,
    field: IntensityField,
    room: RoomConfig,
    nodes: int = DEFAULT_NODES,
    return_error: bool = False,
):
    """Eavesdropper-averaged Gram matrix E[h_E h_E^T] by 2-D quadrature.

    Evaluated with ``nodes`` and ``2*nodes`` Gauss-Legendre points per axis;
    the finer result is returned and the entrywise difference is the error
    estimate.
    """
    if field.is_homogeneous and field.rate == 0:
        raise ValueError("zero eavesdropper intensity: Bbar is undefined")
    coarse = _bbar_at(layout, cc, field, room, nodes)
    fine = _bbar_at(layout, cc, field, room, 2 * nodes)
    err = float(np.max(np.abs(fine - coarse)))
    scale = float(np.max(np.abs(fine)))
    if err > 1e-8 * scale:
        log.warning("Bbar quadrature relative error %.2e exceeds 1e-8; raise `nodes`", err / scale)
    return (fine, err) if return_error else fine


def gram_matrices(h_u, Bbar, quadrature_error: float = 0.0) -> GramMatrices:
    h = np.asarray(h_u, dtype=float).ravel()
    B = np.asarray(Bbar, dtype=float)
    if B.shape != (h.size, h.size):
        raise ValueError(f"Bbar shape {B.shape} does not match {h.size} transmitters")
    return GramMatrices(h_u=h, A=compute_A(h), Bbar=B, quadrature_error=quadrature_error)


def _rank_one_factor(A):
    A = np.asarray(A, dtype=float)
    k = int(np.argmax(np.diag(A)))
    if not A[k, k] > 0:
        raise ValueError("A has no positive diagonal entry")
    h = A[:, k] / np.sqrt(A[k, k])
    return h if h[k] >= 0 else -h


def _canonical(v):
    v = v / np.linalg.norm(v)
    nz = np.flatnonzero(v)
    return -v if v[nz[0]] < 0 else v


def max_eigenpair(A, Bbar) -> tuple[float, np.ndarray]:
    """Largest eigenvalue of ``Bbar^{-1} A`` and its unit eigenvector.

    Uses the rank-one structure of ``A`` instead of a general
    eigensolver.  The eigenvector's first non-zero entry is positive.
    """
    B = np.asarray(Bbar, dtype=float)
    cond = float(np.linalg.cond(B))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularGramError(
            f"Bbar is numerically singular (condition {cond:.3e}); the optimal "
            "beamformer then lies in its null space and is not computed here",
            condition=cond,
        )
    h = _rank_one_factor(A)
    v = np.linalg.solve(B, h)
    eta = float(h @ v)
    return eta, _canonical(v)


def _result(w, gm, drive, eta, method):
    phi = drive.phi_coef
    return BeamformResult(
        w=w,
        gamma_u=float(phi * (gm.h_u @ w) ** 2),
        gamma_e_avg=float(phi * w @ gm.Bbar @ w),
        eta_max=eta,
        method=method,
    )


def min_ed_snr_beamformer(gm: GramMatrices, drive: DriveConfig, rho_u: float, **fallback_kw) -> BeamformResult:
    """Minimize the average eavesdropper SNR subject to a UE SNR floor ``rho_u``."""
    if not rho_u > 0:
        raise ValueError(f"rho_u must be positive, got {rho_u!r}")
    phi = drive.phi_coef
    best = phi * np.abs(gm.h_u).sum() ** 2
    if rho_u > best:
        raise InfeasibleError(
            f"rho_u = {rho_u:.6g} exceeds the best attainable UE SNR {best:.6g}",
            max_attainable=best,
        )
    eta, v = max_eigenpair(gm.A, gm.Bbar)
    w = v * (np.sqrt(rho_u / phi) / abs(gm.h_u @ v))
    if np.all(np.abs(w) < 1):
        return _result(w, gm, drive, eta, "eigen")
    w = constrained_qp_fallback(gm, drive, rho_u, **fallback_kw)
    return _result(w, gm, drive, eta, "qp")


def max_ue_snr_beamformer(gm: GramMatrices, drive: DriveConfig, rhobar_e: float) -> BeamformResult:
    """Maximize the UE SNR with the average eavesdropper SNR capped at ``rhobar_e``.

    When the scaled eigenmode leaves the amplitude box it is shrunk until
    the largest weight has magnitude one; the eavesdropper cap is then slack.
    """
    if not rhobar_e > 0:
        raise ValueError(f"rhobar_e must be positive, got {rhobar_e!r}")
    eta, v = max_eigenpair(gm.A, gm.Bbar)
    w = v * np.sqrt(rhobar_e / (drive.phi_coef * (v @ gm.Bbar @ v)))
    peak = np.max(np.abs(w))
    if peak < 1:
        return _result(w, gm, drive, eta, "eigen")
    return _result(w / peak, gm, drive, eta, "clamped")


def capacity_target_to_snr_m1(xi_u: float) -> float:
    """UE capacity floor (bits) -> equivalent SNR floor via the lower capacity bound."""
    if xi_u < 0:
        raise ValueError("capacity target must be >= 0")
    return (2.0 ** (2 * xi_u) - 1) * np.pi * np.e / 2


def capacity_target_to_snr_m2(xibar_e: float) -> float:
    """Eavesdropper average-capacity cap (bits) -> SNR cap via Jensen."""
    if xibar_e < 0:
        raise ValueError("capacity target must be >= 0")
    return 2.0 ** (2 * xibar_e) - 1


def min_ed_capacity_beamformer(gm, drive, xi_u, **fallback_kw) -> BeamformResult:
    return min_ed_snr_beamformer(gm, drive, capacity_target_to_snr_m1(xi_u), **fallback_kw)


def max_ue_capacity_beamformer(gm, drive, xibar_e) -> BeamformResult:
    return max_ue_snr_beamformer(gm, drive, capacity_target_to_snr_m2(xibar_e))


def _project(z, h, t, iters=200):
    """Euclidean projection onto {|w| <= 1, h.w >= t}.

    The minimizer is clip(z + mu*h) for the smallest mu >= 0 that
    satisfies the half-space; h.clip(z + mu*h) is nondecreasing in mu.
    """
    w = np.clip(z, -1.0, 1.0)
    if h @ w >= t:
        return w
    lo, hi = 0.0, 1.0
    while h @ np.clip(z + hi * h, -1.0, 1.0) < t:
        hi *= 2.0
        if hi > 1e300:
            raise InfeasibleError("half-space does not meet the amplitude box")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if h @ np.clip(z + mid * h, -1.0, 1.0) < t:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * max(1.0, hi):
            break
    return np.clip(z + hi * h, -1.0, 1.0)


def _polish(B, h, t, w, tol=1e-9):
    """Exact KKT solve on the active set suggested by ``w``; None if it fails."""
    n = w.size
    at_box = np.abs(w) >= 1 - 1e-7
    fixed = np.sign(w) * at_box
    free = ~at_box
    w_new = fixed.astype(float)
    if free.any():
        Bff = B[np.ix_(free, free)]
        rhs_fixed = B[np.ix_(free, at_box)] @ fixed[at_box]
        hf = h[free]
        r = t - h[at_box] @ fixed[at_box]
        p = np.linalg.solve(Bff, hf)
        q = np.linalg.solve(Bff, rhs_fixed)
        nu2 = (r + hf @ q) / (hf @ p)  # nu/2
        if nu2 < -tol:
            return None
        w_new[free] = nu2 * p - q
        if np.any(np.abs(w_new[free]) > 1 + tol):
            return None
        nu = 2 * nu2
    else:
        if h @ w_new < t * (1 - tol):
            return None
        nu = 0.0
    if h @ w_new < t * (1 - 1e-9):
        return None
    g = 2 * B @ w_new - nu * h
    # clamped coordinates must not want to move back inside the box
    scale = np.max(np.abs(2 * B @ w_new)) + abs(nu) * np.max(np.abs(h))
    bad = at_box & (g * fixed > tol * scale)
    if np.any(bad):
        return None
    return np.clip(w_new, -1.0, 1.0)


def constrained_qp_fallback(
    gm: GramMatrices,
    drive: DriveConfig,
    rho_u: float,
    tol: float = 1e-9,
    max_iter: int = 100_000,
    w0=None,
) -> np.ndarray:
    """Solve min w^T Bbar w s.t. phi (w.h_U)^2 >= rho_u and |w| <= 1.

    The quadratic UE constraint is replaced by the linear one
    ``h_U.w >= sqrt(rho_u/phi)`` (the sign of w is immaterial), which makes
    the problem a convex QP.  Projected gradient with backtracking locates
    the active set, then an exact KKT solve on that set sharpens the
    result.
    """
    if rho_u < 0:
        raise ValueError("rho_u must be >= 0")
    h_norm = np.linalg.norm(gm.h_u)
    h = gm.h_u / h_norm
    t = np.sqrt(rho_u / drive.phi_coef) / h_norm
    if np.abs(h).sum() < t * (1 - 1e-12):
        best = drive.phi_coef * np.abs(gm.h_u).sum() ** 2
        raise InfeasibleError(
            f"rho_u = {rho_u:.6g} exceeds the best attainable UE SNR {best:.6g}",
            max_attainable=best,
        )
    B = gm.Bbar / np.max(np.abs(np.diag(gm.Bbar)))
    f = lambda w: float(w @ B @ w)
    lip = 2 * np.linalg.eigvalsh(B)[-1]

    if w0 is None:
        w0 = np.linalg.solve(B, h)
        w0 = w0 * (t / (h @ w0)) if h @ w0 > 0 else np.sign(h)
    w = _project(np.asarray(w0, dtype=float), h, t)
    fw = f(w)
    step = 1.0 / lip
    for it in range(max_iter):
        g = 2 * B @ w
        while True:
            w_new = _project(w - step * g, h, t)
            diff = w_new - w
            f_new = f(w_new)
            if f_new <= fw + g @ diff + (0.5 / step) * (diff @ diff) + 1e-300:
                break
            step *= 0.5
        done = abs(fw - f_new) <= tol * max(fw, 1e-300) and np.linalg.norm(diff) <= np.sqrt(tol)
        w, fw = w_new, f_new
        step = min(step * 2.0, 1e3 / lip)
        if done:
            break
    else:
        raise ConvergenceError(f"projected gradient did not converge in {max_iter} iterations")

    polished = _polish(B, h, t, w)
    if polished is not None and f(polished) <= fw * (1 + 1e-9):
        w = polished
    # put the linear constraint exactly on its boundary if round-off drifted
    if h @ w < t:
        w = _project(w, h, t)
    return w


def brute_force_beamformer(gm: GramMatrices, drive: DriveConfig, rho_u: float, step: float) -> np.ndarray:
    """Grid search over [-1, 1]^N for the feasible minimizer of w^T Bbar w.

    Only meant as a test oracle; refuses N > 3.
    """
    n = gm.n
    if n > 3:
        raise ValueError(f"grid search over {n} dimensions is not supported (N <= 3)")
    k = int(round(2.0 / step)) + 1
    axis = np.linspace(-1.0, 1.0, k)
    phi = drive.phi_coef
    best_val, best_w = np.inf, None
    # chunk over the first coordinate to bound memory
    rest = np.stack(np.meshgrid(*([axis] * (n - 1)), indexing="ij"), axis=-1).reshape(-1, n - 1) if n > 1 else np.zeros((1, 0))
    for a in axis:
        W = np.column_stack([np.full(rest.shape[0], a), rest])
        ok = phi * (W @ gm.h_u) ** 2 >= rho_u
        if not ok.any():
            continue
        Wf = W[ok]
        vals = np.einsum("ij,jk,ik->i", Wf, gm.Bbar, Wf)
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val, best_w = vals[i], Wf[i].copy()
    if best_w is None:
        raise InfeasibleError("no grid point meets the UE SNR target")
    return best_w
