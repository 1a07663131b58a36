"""Monte Carlo estimates of outage, average eavesdropper SNR and SNR laws.

Trials are processed in fixed-size chunks, each with its own generator
spawned from the master seed, so results depend only on ``(config, seed)``
and not on how many workers run the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .beamform import SnrTargets, compute_Bbar, constrained_qp_fallback, gram_matrices
from .errors import InfeasibleError
from .geometry import nearest_transmitter
from .scenario import Scenario
from .secrecy import secrecy_capacity_bounds

__all__ = [
    "TrialConfig",
    "Estimate",
    "SopEstimate",
    "EmpiricalCdf",
    "simulate_sop",
    "estimate_sop",
    "estimate_avg_ed_snr",
    "sample_ue_snr",
    "sample_max_ed_snr",
    "empirical_cdf",
    "chunk_generators",
    "CHUNK",
]

CHUNK = 10_000


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float
    trials_used: int


@dataclass(frozen=True)
class SopEstimate:
    upper: Estimate
    lower: Estimate


@dataclass(frozen=True)
class TrialConfig:
    """One Monte Carlo run.

    ``scheme`` is ``"selection"`` (weight ``omega`` on the fixture nearest
    the UE) or ``"beamforming"``.  Beamforming uses ``targets.rho_u`` if
    set, else ``targets.rhobar_e``; with no targets the eavesdropper cap is
    matched to what selection would give for the same UE.

    ``ue_cell`` is a fixture index, ``"center"`` (the cell nearest the
    room center) or ``"random"`` (a fresh uniform cell per trial).
    """

    scenario: Scenario
    c_th: float
    trials: int = 100_000
    seed: int = 0
    scheme: str = "selection"
    omega: float = 1.0
    targets: Optional[SnrTargets] = None
    ue_cell: Union[int, str] = "center"
    workers: int = 1
    quad_nodes: int = 128

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.scheme not in ("selection", "beamforming"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not 0 <= self.omega <= 1:
            raise ValueError("omega must lie in [0, 1]")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if isinstance(self.ue_cell, str) and self.ue_cell not in ("center", "random"):
            raise ValueError(f"ue_cell must be an index, 'center' or 'random', got {self.ue_cell!r}")


def chunk_generators(seed: int, trials: int, chunk: int = CHUNK):
    """(size, generator) per chunk, derived only from the seed and chunk index."""
    n_chunks = max(1, math.ceil(trials / chunk))
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    sizes = [min(chunk, trials - i * chunk) for i in range(n_chunks)]
    return [(s, np.random.default_rng(c)) for s, c in zip(sizes, children)]


def _binomial(hits: int, n: int) -> Estimate:
    p = hits / n
    return Estimate(value=p, std_error=math.sqrt(p * (1 - p) / n), trials_used=n)


def _ppp_batch(sc: Scenario, n: int, rng):
    """Eavesdropper points for ``n`` independent trials: (points, owner trial index)."""
    room, fld = sc.room, sc.field
    lam = fld.upper_bound
    counts = rng.poisson(lam * room.area, n) if lam > 0 else np.zeros(n, dtype=int)
    total = int(counts.sum())
    xmin, xmax, ymin, ymax = room.bounds
    pts = np.column_stack([rng.uniform(xmin, xmax, total), rng.uniform(ymin, ymax, total)])
    owner = np.repeat(np.arange(n), counts)
    if not fld.is_homogeneous and total:
        keep = rng.uniform(0.0, 1.0, total) * lam < fld(pts[:, 0], pts[:, 1])
        pts, owner = pts[keep], owner[keep]
    return pts, owner


def _ue_cells(cfg: TrialConfig, n: int, rng):
    layout = cfg.scenario.layout
    if cfg.ue_cell == "random":
        return rng.integers(0, layout.n, n)
    if cfg.ue_cell == "center":
        return np.full(n, nearest_transmitter(layout, (0.0, 0.0)))
    if not 0 <= int(cfg.ue_cell) < layout.n:
        raise IndexError(f"ue_cell {cfg.ue_cell} out of range")
    return np.full(n, int(cfg.ue_cell))


def _draw_ues(cfg: TrialConfig, n: int, rng):
    layout = cfg.scenario.layout
    if not layout.has_cells:
        raise ValueError("layout has no coverage cells; cannot place the UE")
    cells = _ue_cells(cfg, n, rng)
    centers = layout.positions[cells]
    a, ka = layout.a_hat, layout.k_hat * layout.a_hat
    off = np.column_stack([rng.uniform(-a, a, n), rng.uniform(-ka, ka, n)])
    return centers + off


def _gains(sc: Scenario, pts, fixtures=None):
    pos = sc.layout.positions if fixtures is None else sc.layout.positions[fixtures]
    cc = sc.cc
    if fixtures is not None and np.ndim(fixtures) == 1:
        d2 = ((pts - pos) ** 2).sum(axis=-1)
    else:
        d2 = ((pts[:, None, :] - pos[None, :, :]) ** 2).sum(axis=-1)
    return cc.K * (d2 + cc.height**2) ** (-(cc.m + 3) / 2)


def _max_by_owner(values, owner, n):
    out = np.zeros(n)
    np.maximum.at(out, owner, values)
    return out


class _BeamPlan:
    """Per-scenario data for vectorized beamforming trials."""

    def __init__(self, cfg: TrialConfig):
        sc = cfg.scenario
        self.cfg = cfg
        self.Bbar = compute_Bbar(sc.layout, sc.cc, sc.field, sc.room, nodes=cfg.quad_nodes)
        self.phi = sc.phi_coef

    def weights(self, h_u, selected):
        cfg, B, phi = self.cfg, self.Bbar, self.phi
        V = np.linalg.solve(B, h_u.T).T
        t = cfg.targets
        if t is not None and t.rho_u is not None:
            W = V * (np.sqrt(t.rho_u / phi) / np.abs((V * h_u).sum(1)))[:, None]
            bad = np.flatnonzero(np.max(np.abs(W), axis=1) >= 1)
            for i in bad:
                gm = gram_matrices(h_u[i], B)
                try:
                    W[i] = constrained_qp_fallback(gm, self._drive, t.rho_u)
                except InfeasibleError:
                    W[i] = 1.0
            return W
        if t is not None and t.rhobar_e is not None:
            cap = np.full(h_u.shape[0], t.rhobar_e)
        else:
            cap = phi * cfg.omega**2 * B[selected, selected]
        quad = np.einsum("ij,jk,ik->i", V, B, V)
        W = V * np.sqrt(cap / (phi * quad))[:, None]
        peak = np.max(np.abs(W), axis=1)
        return W / np.maximum(peak, 1.0)[:, None]

    @property
    def _drive(self):
        return self.cfg.scenario.drive


def _sop_chunk(cfg: TrialConfig, n: int, rng, plan):
    sc = cfg.scenario
    phi = sc.phi_coef
    ue = _draw_ues(cfg, n, rng)
    selected = nearest_transmitter(sc.layout, ue)
    pts, owner = _ppp_batch(sc, n, rng)
    if cfg.scheme == "selection":
        g_u = phi * cfg.omega**2 * _gains(sc, ue, selected) ** 2
        g_e = phi * cfg.omega**2 * _gains(sc, pts, selected[owner]) ** 2
    else:
        h_u = _gains(sc, ue)
        W = plan.weights(h_u, selected)
        g_u = phi * (W * h_u).sum(1) ** 2
        g_e = phi * (_gains(sc, pts) * W[owner]).sum(1) ** 2 if len(pts) else np.zeros(0)
    g_star = _max_by_owner(g_e, owner, n)
    cs_lower, cs_upper = secrecy_capacity_bounds(g_u, g_star)
    return int(np.count_nonzero(cs_lower <= cfg.c_th)), int(np.count_nonzero(cs_upper <= cfg.c_th))


def _run_chunks(fn, chunks, workers):
    if workers == 1 or len(chunks) == 1:
        return [fn(n, rng) for n, rng in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: fn(*c), chunks))


def simulate_sop(cfg: TrialConfig) -> SopEstimate:
    """Outage frequency of both secrecy-capacity bounds from one set of draws.

    An empty eavesdropper draw counts as gamma_E* = 0; outage is
    ``C_s <= C_th``.
    """
    plan = _BeamPlan(cfg) if cfg.scheme == "beamforming" else None
    chunks = chunk_generators(cfg.seed, cfg.trials)
    res = _run_chunks(lambda n, rng: _sop_chunk(cfg, n, rng, plan), chunks, cfg.workers)
    hits_u = sum(r[0] for r in res)
    hits_l = sum(r[1] for r in res)
    return SopEstimate(upper=_binomial(hits_u, cfg.trials), lower=_binomial(hits_l, cfg.trials))


def estimate_sop(cfg: TrialConfig, bound: str = "upper") -> Estimate:
    if bound not in ("upper", "lower"):
        raise ValueError("bound must be 'upper' or 'lower'")
    est = simulate_sop(cfg)
    return est.upper if bound == "upper" else est.lower


def _normalized_intensity_points(sc: Scenario, n: int, rng):
    """``n`` i.i.d. points with density proportional to the ED intensity."""
    xmin, xmax, ymin, ymax = sc.room.bounds
    if sc.field.is_homogeneous:
        return np.column_stack([rng.uniform(xmin, xmax, n), rng.uniform(ymin, ymax, n)])
    out, have = [], 0
    lam = sc.field.upper_bound
    while have < n:
        m = max(2 * (n - have), 1024)
        p = np.column_stack([rng.uniform(xmin, xmax, m), rng.uniform(ymin, ymax, m)])
        p = p[rng.uniform(0.0, lam, m) < sc.field(p[:, 0], p[:, 1])]
        out.append(p)
        have += len(p)
    return np.concatenate(out)[:n]


def estimate_avg_ed_snr(w, scenario: Scenario, trials: int, seed: int, workers: int = 1) -> Estimate:
    """Mean of phi (w.h_E)^2 with the eavesdropper drawn from the normalized intensity."""
    w = np.asarray(w, dtype=float)
    phi = scenario.phi_coef

    def chunk(n, rng):
        g = phi * (_gains(scenario, _normalized_intensity_points(scenario, n, rng)) @ w) ** 2
        return g.sum(), (g**2).sum()

    res = _run_chunks(chunk, chunk_generators(seed, trials), workers)
    s1 = sum(r[0] for r in res)
    s2 = sum(r[1] for r in res)
    mean = s1 / trials
    var = max(s2 / trials - mean**2, 0.0) * trials / max(trials - 1, 1)
    return Estimate(value=float(mean), std_error=float(math.sqrt(var / trials)), trials_used=trials)


def sample_ue_snr(cfg: TrialConfig) -> np.ndarray:
    """UE SNR under selection for ``cfg.trials`` independent UE draws."""
    sc = cfg.scenario

    def chunk(n, rng):
        ue = _draw_ues(cfg, n, rng)
        sel = nearest_transmitter(sc.layout, ue)
        return sc.phi_coef * cfg.omega**2 * _gains(sc, ue, sel) ** 2

    return np.concatenate(_run_chunks(chunk, chunk_generators(cfg.seed, cfg.trials), cfg.workers))


def sample_max_ed_snr(cfg: TrialConfig, fixture: int) -> np.ndarray:
    """Strongest eavesdropper SNR w.r.t. one fixture, one value per PPP draw."""
    sc = cfg.scenario

    def chunk(n, rng):
        pts, owner = _ppp_batch(sc, n, rng)
        g = sc.phi_coef * cfg.omega**2 * _gains(sc, pts, np.full(len(pts), fixture)) ** 2
        return _max_by_owner(g, owner, n)

    return np.concatenate(_run_chunks(chunk, chunk_generators(cfg.seed, cfg.trials), cfg.workers))


@dataclass(frozen=True)
class EmpiricalCdf:
    """Right-continuous empirical CDF of a sample."""

    sorted_samples: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.sorted_samples.size

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return (np.searchsorted(self.sorted_samples, x, side="right") / self.n)[()]

    def ks(self, cdf) -> float:
        """Sup-norm distance to an analytic CDF (two-sided KS statistic)."""
        F = np.asarray(cdf(self.sorted_samples), dtype=float)
        i = np.arange(1, self.n + 1)
        return float(max(np.max(i / self.n - F), np.max(F - (i - 1) / self.n)))


def empirical_cdf(samples) -> EmpiricalCdf:
    s = np.sort(np.asarray(samples, dtype=float).ravel())
    if s.size == 0:
        raise ValueError("empirical CDF of an empty sample")
    return EmpiricalCdf(s)
