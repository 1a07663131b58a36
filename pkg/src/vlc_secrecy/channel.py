"""Line-of-sight Lambertian channel gains and peak SNR.

Every receiver faces straight up, so the irradiance and incidence angles
coincide and the gain collapses to ``h = K * l**-(m+3)`` where ``l`` is the
transmitter-receiver distance.  All SNRs here are linear.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import TransmitterLayout

__all__ = [
    "OpticalFrontEnd",
    "DriveConfig",
    "ChannelConstants",
    "lambertian_order",
    "channel_constant",
    "gain_full",
    "gain_simplified",
    "gain_vector",
    "peak_snr",
    "zeta",
    "BOX_TOL",
]

# slack allowed on |w_i| <= 1 for round-off in scaled solutions
BOX_TOL = 1e-12


@dataclass(frozen=True)
class OpticalFrontEnd:
    """LED and photodiode constants.

    Angles are radians, ``pd_area`` is m^2, ``responsivity`` A/W,
    ``tia_gain`` V/A and ``conversion`` the LED current-to-light
    efficiency in W/A.
    """

    conversion: float = 5.0
    half_angle: float = np.pi / 3
    pd_area: float = 1e-4
    lens_index: float = 1.5
    fov: float = np.pi / 3
    responsivity: float = 0.54
    tia_gain: float = 1.0

    def __post_init__(self):
        for name in ("conversion", "pd_area", "lens_index", "responsivity", "tia_gain"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be positive, got {v!r}")
        if not 0 < self.half_angle < np.pi / 2:
            raise ValueError(f"half_angle must lie in (0, pi/2), got {self.half_angle!r}")
        if not 0 < self.fov <= np.pi / 2:
            raise ValueError(f"fov must lie in (0, pi/2], got {self.fov!r}")

    @property
    def m(self) -> float:
        return lambertian_order(self.half_angle)


@dataclass(frozen=True)
class DriveConfig:
    """LED drive and receiver noise.

    ``noise_power`` is in the squared-signal units of ``(R*T*P_opt)**2``;
    with ``T = 1`` V/A that is W, i.e. dBm with a 1 mW reference.
    """

    dc_bias: float = 9 * 8.0 / 5.0
    mod_index: float = 0.5
    noise_power: float = 10 ** (-98.35 / 10) * 1e-3

    def __post_init__(self):
        if not np.isfinite(self.dc_bias) or self.dc_bias <= 0:
            raise ValueError(f"dc_bias must be positive, got {self.dc_bias!r}")
        if not 0 <= self.mod_index <= 1:
            raise ValueError(f"mod_index must lie in [0, 1], got {self.mod_index!r}")
        if not np.isfinite(self.noise_power) or self.noise_power <= 0:
            raise ValueError(f"noise_power must be positive, got {self.noise_power!r}")

    @property
    def phi_coef(self) -> float:
        """alpha^2 I_DC^2 / sigma^2, the factor in front of every quadratic form."""
        return self.mod_index**2 * self.dc_bias**2 / self.noise_power

    @classmethod
    def from_fixture(cls, leds_per_fixture, led_power, conversion, mod_index, noise_power):
        """Bias current from the fixture's average optical output."""
        return cls(leds_per_fixture * led_power / conversion, mod_index, noise_power)


@dataclass(frozen=True)
class ChannelConstants:
    m: float
    K: float
    height: float

    def __post_init__(self):
        if self.m <= 0 or self.K <= 0 or self.height <= 0:
            raise ValueError("m, K and height must all be positive")


def lambertian_order(half_angle: float) -> float:
    """m = -ln 2 / ln cos(half_angle).

    A radian angle such as pi/3 is itself rounded, which moves m by a few
    ulps; results that close to an integer are snapped to it, so 60 and
    45 degrees give exactly 1 and 2.
    """
    if not 0 < half_angle < np.pi / 2:
        raise ValueError(f"half_angle must lie in (0, pi/2), got {half_angle!r}")
    m = float(-np.log(2.0) / np.log(np.cos(half_angle)))
    r = round(m)
    if r > 0 and abs(m - r) <= 4 * np.finfo(float).eps * r:
        return float(r)
    return m


def channel_constant(fe: OpticalFrontEnd, height: float) -> ChannelConstants:
    if not height > 0:
        raise ValueError(f"height must be positive, got {height!r}")
    m = fe.m
    K = (
        fe.conversion * (m + 1) * fe.pd_area * height ** (m + 1) * fe.lens_index**2
        * fe.responsivity * fe.tia_gain
        / (2 * np.pi * np.sin(fe.fov) ** 2)
    )
    return ChannelConstants(m=m, K=K, height=height)


def gain_full(fe: OpticalFrontEnd, height: float, d, apply_fov: bool = True):
    """Lambertian gain from the full angular expression.

    ``d`` is the work-plane distance.  With ``apply_fov`` the gain is zero
    for incidence angles outside the receiver field of view.
    """
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise ValueError("work-plane distance must be >= 0")
    m = fe.m
    l2 = d**2 + height**2
    l = np.sqrt(l2)
    cos_t = height / l
    h = (
        fe.conversion * (m + 1) * fe.pd_area / (2 * np.pi * l2)
        * fe.lens_index**2 * cos_t**m / np.sin(fe.fov) ** 2
        * cos_t * fe.responsivity * fe.tia_gain
    )
    if apply_fov:
        h = np.where(np.arccos(cos_t) > fe.fov, 0.0, h)
    return h[()] if h.ndim == 0 else h


def gain_simplified(cc: ChannelConstants, l):
    """h = K * l**-(m+3); ``l`` cannot be shorter than the ceiling height."""
    l = np.asarray(l, dtype=float)
    if np.any(l < cc.height * (1 - 1e-12)):
        raise ValueError("distance shorter than the ceiling height")
    h = cc.K * l ** (-(cc.m + 3))
    return h[()] if h.ndim == 0 else h


def gain_vector(layout: TransmitterLayout, cc: ChannelConstants, p):
    """Gains from every fixture to ``p``; shape (N,) or (n, N) for a batch."""
    p = np.asarray(p, dtype=float)
    pts = np.atleast_2d(p)
    d2 = ((pts[:, None, :] - layout.positions[None, :, :]) ** 2).sum(axis=-1)
    h = cc.K * (d2 + cc.height**2) ** (-(cc.m + 3) / 2)
    return h[0] if p.ndim == 1 else h


def peak_snr(w, h, drive: DriveConfig):
    w = np.asarray(w, dtype=float)
    if np.any(np.abs(w) > 1 + BOX_TOL):
        raise ValueError("beam weights violate |w_i| <= 1")
    return drive.phi_coef * (np.asarray(h, dtype=float) @ w) ** 2


def zeta(drive: DriveConfig, cc: ChannelConstants) -> float:
    """alpha^2 I_DC^2 K^2 / sigma^2: the SNR at unit distance."""
    return drive.phi_coef * cc.K**2
