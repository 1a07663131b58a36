"""Capacity bounds, SNR distributions under LED selection, and SOP bounds.

The UE is uniform in a ``2a x 2ka`` coverage cell around the selected
fixture and the eavesdroppers form a homogeneous PPP on the work plane.
With ``zeta = phi K^2`` and ``p = m + 3`` a receiver at work-plane distance
``d`` sees SNR ``zeta (d^2 + Z^2)^-p``.  The UE SNR law uses a piecewise
linear fit of ``A(d)/d^2`` (``A`` the disc-cell overlap area), pinned at
``d = a``, ``k a`` and the cell corner.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import erfc, gammainc

from .channel import ChannelConstants, DriveConfig, zeta as _zeta
from .geometry import TransmitterLayout

__all__ = [
    "SecrecyThreshold",
    "SopModel",
    "SopTerms",
    "capacity_bounds",
    "secrecy_capacity_bounds",
    "coverage_area",
    "area_fit_coeffs",
    "area_ratio_fit",
    "build_sop_model",
    "ue_snr_cdf",
    "ue_snr_pdf",
    "ed_snr_cdf",
    "ed_snr_pdf",
    "upper_gamma_3half",
    "sop_terms",
    "sop_closed_form",
    "K_HAT_MIN",
]

K_HAT_MIN = 1 + 1e-3
_PIE = np.pi * np.e


def capacity_bounds(gamma):
    """(upper, lower) capacity bounds in bits for peak SNR ``gamma``."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0):
        raise ValueError("SNR must be >= 0")
    upper = 0.5 * np.log2(1 + g)
    lower = 0.5 * np.log2(1 + 2 * g / _PIE)
    return upper[()], lower[()]


def secrecy_capacity_bounds(gamma_u, gamma_e_star):
    """(lower, upper) secrecy-capacity bounds in bits; either may be negative."""
    gu = np.asarray(gamma_u, dtype=float)
    ge = np.asarray(gamma_e_star, dtype=float)
    if np.any(gu < 0) or np.any(ge < 0):
        raise ValueError("SNRs must be >= 0")
    lower = 0.5 * np.log2((6 * gu + 3 * _PIE) / (_PIE * ge + 3 * _PIE))
    upper = 0.5 * np.log2((gu + 1) / (ge + 1))
    return lower[()], upper[()]


@dataclass(frozen=True)
class SecrecyThreshold:
    c_th: float

    def __post_init__(self):
        if not self.c_th >= 0:
            raise ValueError(f"C_th must be >= 0, got {self.c_th!r}")

    @property
    def b(self) -> float:
        return 2.0 ** (2 * self.c_th)

    @property
    def a(self) -> float:
        return _PIE * self.b / 6


def coverage_area(d, a_hat: float, k_hat: float):
    """Area of the disc of radius ``d`` inside the cell, for d up to the corner."""
    d = np.asarray(d, dtype=float)
    ak = a_hat * k_hat
    out = np.pi * d**2
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        seg1 = d**2 * np.arccos(np.minimum(a_hat / d, 1.0)) - a_hat * np.sqrt(np.maximum(d**2 - a_hat**2, 0.0))
        seg2 = d**2 * np.arccos(np.minimum(ak / d, 1.0)) - ak * np.sqrt(np.maximum(d**2 - ak**2, 0.0))
    out = out - np.where(d > a_hat, 2 * seg1, 0.0) - np.where(d > ak, 2 * seg2, 0.0)
    return out[()]


def area_fit_coeffs(a_hat: float, k_hat: float) -> tuple[float, float, float, float]:
    """Slopes/intercepts (K1, K2, K3, K4) of the piecewise-linear fit to A(d)/d^2."""
    if k_hat <= 1:
        raise ValueError("the fit needs k_hat > 1")
    acos_k = np.arccos(1 / k_hat)
    root = np.sqrt(k_hat**2 - 1)
    hyp = np.sqrt(k_hat**2 + 1)
    K1 = (2 * root / k_hat**2 - 2 * acos_k) / (a_hat * (k_hat - 1))
    K2 = np.pi - a_hat * K1
    K3 = 2 * (
        acos_k - np.arccos(1 / hyp) - np.arccos(k_hat / hyp) + 2 * k_hat / (k_hat**2 + 1) - root / k_hat**2
    ) / (a_hat * (hyp - k_hat))
    K4 = np.pi - 2 * (acos_k - root / k_hat**2) - k_hat * a_hat * K3
    return float(K1), float(K2), float(K3), float(K4)


def area_ratio_fit(d, a_hat: float, k_hat: float):
    """Piecewise-linear approximation of A(d)/d^2."""
    K1, K2, K3, K4 = area_fit_coeffs(a_hat, k_hat)
    d = np.asarray(d, dtype=float)
    out = np.where(d <= a_hat, np.pi, np.where(d <= k_hat * a_hat, K1 * d + K2, K3 * d + K4))
    return out[()]


@dataclass(frozen=True)
class SopModel:
    zeta: float
    m: float
    Z: float
    a_hat: float
    k_hat: float
    lambda_e: float
    breakpoints: tuple[float, float, float, float]
    coeffs: tuple[float, float, float, float]

    @property
    def p(self) -> float:
        return self.m + 3

    @property
    def cell_area(self) -> float:
        return 4 * self.k_hat * self.a_hat**2

    @property
    def squared_lengths(self) -> tuple[float, float, float, float]:
        """l^2 at the corner, at k a, at a, and directly below the fixture."""
        a, k, Z = self.a_hat, self.k_hat, self.Z
        return (a**2 * (1 + k**2) + Z**2, a**2 * k**2 + Z**2, a**2 + Z**2, Z**2)

    @classmethod
    def from_params(cls, zeta, m, Z, a_hat, k_hat, lambda_e) -> "SopModel":
        for name, v in (("zeta", zeta), ("m", m), ("Z", Z), ("a_hat", a_hat)):
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v!r}")
        if not k_hat > K_HAT_MIN:
            raise ValueError(
                f"k_hat = {k_hat!r} too close to 1: the area fit degenerates (need k_hat > {K_HAT_MIN})"
            )
        if not (np.isfinite(lambda_e) and lambda_e > 0):
            raise ValueError(f"lambda_e must be positive, got {lambda_e!r}")
        coeffs = area_fit_coeffs(a_hat, k_hat)
        K1, K2 = coeffs[:2]
        # fitted area d^2 (K1 d + K2) must grow on [a, k a]; beyond k_hat ~ 2.873 it does not
        if min(2 * K2 + 3 * K1 * a_hat, 2 * K2 + 3 * K1 * k_hat * a_hat) < 0:
            raise ValueError(
                f"k_hat = {k_hat!r}: the piecewise-linear area fit is not monotone, "
                "so the fitted UE law is not a distribution (usable up to k_hat ~ 2.87)"
            )
        p = m + 3
        s = (a_hat**2 * (1 + k_hat**2) + Z**2, a_hat**2 * k_hat**2 + Z**2, a_hat**2 + Z**2, Z**2)
        ys = tuple(float(zeta * si ** (-p)) for si in s)
        return cls(
            zeta=float(zeta), m=float(m), Z=float(Z), a_hat=float(a_hat), k_hat=float(k_hat),
            lambda_e=float(lambda_e), breakpoints=ys, coeffs=coeffs,
        )


def build_sop_model(drive: DriveConfig, cc: ChannelConstants, layout: TransmitterLayout, lambda_e: float) -> SopModel:
    if not layout.has_cells:
        raise ValueError("layout has no coverage cells (a_hat/k_hat unset)")
    return SopModel.from_params(_zeta(drive, cc), cc.m, cc.height, layout.a_hat, layout.k_hat, lambda_e)


def _check_finite(v, what):
    v = np.asarray(v, dtype=float)
    if np.any(np.isnan(v)):
        raise ValueError(f"NaN {what}")
    return v


def _sq_dist(model: SopModel, y):
    """Work-plane squared distance at which the SNR equals ``y``."""
    with np.errstate(divide="ignore", over="ignore"):
        return (y / model.zeta) ** (-1 / model.p) - model.Z**2


def ue_snr_cdf(model: SopModel, y):
    y = _check_finite(y, "SNR")
    y1, y2, y3, y4 = model.breakpoints
    K1, K2, K3, K4 = model.coeffs
    u = np.maximum(_sq_dist(model, np.clip(y, y1, y4)), 0.0)
    r = np.sqrt(u)
    area = np.where(y <= y2, K4 * u + K3 * u * r, np.where(y <= y3, K2 * u + K1 * u * r, np.pi * u))
    F = 1 - area / model.cell_area
    F = np.where(y <= y1, 0.0, np.where(y > y4, 1.0, F))
    return np.clip(F, 0.0, 1.0)[()]


def ue_snr_pdf(model: SopModel, y):
    y = _check_finite(y, "SNR")
    y1, y2, y3, y4 = model.breakpoints
    K1, K2, K3, K4 = model.coeffs
    inside = (y > y1) & (y <= y4)
    ys = np.where(inside, y, y4)
    s = (ys / model.zeta) ** (-1 / model.p)
    r = np.sqrt(np.maximum(s - model.Z**2, 0.0))
    den = 8 * model.a_hat**2 * model.k_hat * model.p * ys
    f = np.where(
        ys <= y2,
        s * (3 * K3 * r + 2 * K4) / den,
        np.where(ys <= y3, s * (3 * K1 * r + 2 * K2) / den, 2 * np.pi * s / den),
    )
    return np.where(inside, f, 0.0)[()]


def ed_snr_cdf(model: SopModel, x):
    """CDF of the strongest eavesdropper's SNR w.r.t. one fixture (plane PPP)."""
    x = _check_finite(x, "SNR")
    y4 = model.breakpoints[3]
    xs = np.clip(x, np.finfo(float).tiny, y4)
    F = np.exp(-model.lambda_e * np.pi * np.maximum(_sq_dist(model, xs), 0.0))
    return np.where(x <= 0, 0.0, np.where(x >= y4, 1.0, F))[()]


def ed_snr_pdf(model: SopModel, x):
    x = _check_finite(x, "SNR")
    y4 = model.breakpoints[3]
    inside = (x > 0) & (x <= y4)
    xs = np.where(inside, x, y4)
    u = np.maximum(_sq_dist(model, xs), 0.0)
    lp = model.lambda_e * np.pi
    f = lp * (u + model.Z**2) / (xs * model.p) * np.exp(-lp * u)
    return np.where(inside, f, 0.0)[()]


def upper_gamma_3half(x):
    """Upper incomplete gamma Gamma(3/2, x) = sqrt(pi)/2 erfc(sqrt x) + sqrt(x) e^-x."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ValueError("Gamma(3/2, x) needs x >= 0")
    r = np.sqrt(x)
    return (0.5 * np.sqrt(np.pi) * erfc(r) + r * np.exp(-x))[()]


def _gamma32_between(t_lo, t_hi):
    """Gamma(3/2, t_lo) - Gamma(3/2, t_hi) = integral of sqrt(t) e^-t over [t_lo, t_hi]."""
    if t_hi < 1.0:
        # both arguments small: differences of upper values cancel badly
        return 0.5 * np.sqrt(np.pi) * (gammainc(1.5, t_hi) - gammainc(1.5, t_lo))
    return float(upper_gamma_3half(t_lo) - upper_gamma_3half(t_hi))


class SopTerms(NamedTuple):
    J1: float
    J2: float
    J3: float
    U1: float
    U2: float
    value: float


def sop_terms(model: SopModel, a: float) -> SopTerms:
    """Closed-form pieces of the outage bound for SNR-ratio threshold ``a``.

    The constant offsets in the integration limits are dropped, so the
    result is P(gamma_U <= a gamma_E*) with the fitted UE law.  Pass the
    threshold's ``a`` for the SOP upper bound and ``b`` for the lower one.
    """
    if not a > 0:
        raise ValueError("threshold ratio must be positive")
    K1, K2, K3, K4 = model.coeffs
    s1, s2, s3, s4 = model.squared_lengths
    Z2 = model.Z**2
    u1, u2, u3 = s1 - Z2, s2 - Z2, s3 - Z2
    lp = model.lambda_e * np.pi
    c = a ** (1 / model.p)
    lpc = lp * c

    def E(s):
        return np.exp(lp * (Z2 - c * s))

    def E_diff(s_near, s_far):
        # E(s_near) - E(s_far) for s_near < s_far
        return -E(s_near) * np.expm1(-lpc * (s_far - s_near))

    pre = 1 / (8 * model.a_hat**2 * model.k_hat)
    lin = 2 / lpc
    gam = 3 * np.exp(-lp * Z2 * (c - 1)) * lpc**-1.5
    J1 = pre * (lin * K4 * E_diff(s2, s1) + gam * K3 * _gamma32_between(lpc * u2, lpc * u1))
    J2 = pre * (lin * K2 * E_diff(s3, s2) + gam * K1 * _gamma32_between(lpc * u3, lpc * u2))
    J3 = E_diff(s4, s3) / (4 * model.a_hat**2 * model.k_hat * model.lambda_e * c)
    F_y4_over_a = E(s4)
    U1 = F_y4_over_a - J1 - J2 - J3
    U2 = 1.0 - F_y4_over_a
    value = float(np.clip(U1 + U2, 0.0, 1.0))
    return SopTerms(float(J1), float(J2), float(J3), float(U1), float(U2), value)


def sop_closed_form(model: SopModel, threshold: SecrecyThreshold) -> tuple[float, float]:
    """(upper, lower) bounds on the secrecy outage probability under selection."""
    return sop_terms(model, threshold.a).value, sop_terms(model, threshold.b).value
