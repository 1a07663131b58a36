"""Room description, transmitter grids and random receiver placement.

All coordinates are work-plane positions in meters, in a frame whose
origin is the center of the room.  The ceiling-to-work-plane height is
kept on :class:`RoomConfig` and only enters through the channel model.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "RoomConfig",
    "TransmitterLayout",
    "IntensityField",
    "build_grid_layout",
    "explicit_layout",
    "sample_ppp",
    "sample_ue",
    "nearest_transmitter",
]


@dataclass(frozen=True)
class RoomConfig:
    length: float
    width: float
    height: float

    def __post_init__(self):
        for name in ("length", "width", "height"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ValueError(f"room {name} must be positive, got {v!r}")

    @property
    def area(self) -> float:
        return self.length * self.width

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        """(xmin, xmax, ymin, ymax)."""
        return (-self.length / 2, self.length / 2, -self.width / 2, self.width / 2)


@dataclass(frozen=True)
class TransmitterLayout:
    """Fixture positions on the ceiling, projected onto the work plane.

    ``a_hat`` is the half-width of a fixture's rectangular coverage cell
    along x and ``k_hat`` the aspect ratio, so a cell spans
    ``2*a_hat`` by ``2*k_hat*a_hat``.  Hand-placed layouts may leave both
    unset; they are only needed when the UE is confined to a cell.
    """

    positions: np.ndarray
    rows: Optional[int] = None
    cols: Optional[int] = None
    edge: Optional[float] = None
    a_hat: Optional[float] = None
    k_hat: Optional[float] = None

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if pos.ndim != 2 or pos.shape[1] != 2 or pos.shape[0] == 0:
            raise ValueError("positions must be a non-empty (N, 2) array")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        if self.a_hat is not None and self.a_hat <= 0:
            raise ValueError(f"a_hat must be positive, got {self.a_hat}")
        if self.k_hat is not None and self.k_hat < 1:
            raise ValueError(f"k_hat must be >= 1, got {self.k_hat}")

    def __len__(self) -> int:
        return self.positions.shape[0]

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def has_cells(self) -> bool:
        return self.a_hat is not None and self.k_hat is not None

    def cell_bounds(self, index: int) -> tuple[float, float, float, float]:
        """(xmin, xmax, ymin, ymax) of a fixture's coverage cell."""
        if not self.has_cells:
            raise ValueError("layout has no coverage cells (a_hat/k_hat unset)")
        if not 0 <= index < self.n:
            raise IndexError(f"cell index {index} out of range for {self.n} fixtures")
        x0, y0 = self.positions[index]
        hx, hy = self.a_hat, self.k_hat * self.a_hat
        return (x0 - hx, x0 + hx, y0 - hy, y0 + hy)

    def inside(self, room: RoomConfig) -> bool:
        xmin, xmax, ymin, ymax = room.bounds
        p = self.positions
        return bool(
            np.all((p[:, 0] >= xmin) & (p[:, 0] <= xmax) & (p[:, 1] >= ymin) & (p[:, 1] <= ymax))
        )


@dataclass(frozen=True)
class IntensityField:
    """Eavesdropper intensity over the work plane, in points per m^2.

    Use :meth:`homogeneous` or :meth:`inhomogeneous` rather than the raw
    constructor.  For the inhomogeneous case ``density`` must be vectorized
    over numpy arrays and bounded above by ``lambda_max``.
    """

    rate: Optional[float] = None
    density: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = field(
        default=None, compare=False
    )
    lambda_max: Optional[float] = None

    @classmethod
    def homogeneous(cls, rate: float) -> "IntensityField":
        if not np.isfinite(rate) or rate < 0:
            raise ValueError(f"intensity must be >= 0, got {rate!r}")
        return cls(rate=float(rate))

    @classmethod
    def inhomogeneous(cls, density, lambda_max: float) -> "IntensityField":
        if not callable(density):
            raise TypeError("density must be callable")
        if not np.isfinite(lambda_max) or lambda_max < 0:
            raise ValueError(f"lambda_max must be >= 0, got {lambda_max!r}")
        return cls(density=density, lambda_max=float(lambda_max))

    @property
    def is_homogeneous(self) -> bool:
        return self.density is None

    def __call__(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.is_homogeneous:
            return np.full(np.broadcast(x, y).shape, self.rate)
        lam = np.asarray(self.density(x, y), dtype=float)
        if np.any(lam < 0):
            raise ValueError("intensity density returned negative values")
        return lam

    @property
    def upper_bound(self) -> float:
        return self.rate if self.is_homogeneous else self.lambda_max


def build_grid_layout(room: RoomConfig, rows: int, cols: int, edge: float) -> TransmitterLayout:
    """Place ``rows*cols`` fixtures at the centers of identical coverage cells.

    Rows run along the room length (x) and columns along the width (y).
    The cells tile the room minus an edge zone of thickness ``edge``, giving
    ``a_hat = (L/2 - g)/rows`` and ``k_hat = (W/2 - g)/(cols*a_hat)``.
    Fixtures are indexed row-major: ``index = i*cols + j``.
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"need at least one row and column, got {rows}x{cols}")
    if edge < 0:
        raise ValueError(f"edge zone must be >= 0, got {edge}")
    a_hat = (room.length / 2 - edge) / rows
    if a_hat <= 0:
        raise ValueError(f"edge zone {edge} m leaves no room along the length")
    k_hat = (room.width / 2 - edge) / (cols * a_hat)
    if k_hat < 1:
        raise ValueError(
            f"k_hat = {k_hat:.6g} < 1: cells would be wider along x than y; "
            "swap length/width or change the grid"
        )
    xs = -room.length / 2 + edge + a_hat * (2 * np.arange(rows) + 1)
    ys = -room.width / 2 + edge + k_hat * a_hat * (2 * np.arange(cols) + 1)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    positions = np.column_stack([gx.ravel(), gy.ravel()])
    return TransmitterLayout(positions, rows=rows, cols=cols, edge=edge, a_hat=a_hat, k_hat=k_hat)


def explicit_layout(positions, a_hat=None, k_hat=None) -> TransmitterLayout:
    return TransmitterLayout(np.asarray(positions, dtype=float), a_hat=a_hat, k_hat=k_hat)


def sample_ppp(field: IntensityField, room: RoomConfig, rng: np.random.Generator) -> np.ndarray:
    """Draw one realization of a Poisson point process inside the room.

    Inhomogeneous fields are sampled at ``lambda_max`` and thinned with
    retention probability ``lambda(x, y)/lambda_max``.  Returns an (n, 2)
    array; n may be zero.
    """
    lam = field.upper_bound
    xmin, xmax, ymin, ymax = room.bounds
    count = rng.poisson(lam * room.area) if lam > 0 else 0
    pts = np.column_stack([rng.uniform(xmin, xmax, count), rng.uniform(ymin, ymax, count)])
    if field.is_homogeneous or count == 0:
        return pts
    keep = rng.uniform(0.0, 1.0, count) * lam < field(pts[:, 0], pts[:, 1])
    return pts[keep]


def sample_ue(layout: TransmitterLayout, cell_index: int, rng: np.random.Generator, size=None):
    """Uniform point(s) in the coverage cell of fixture ``cell_index``."""
    xmin, xmax, ymin, ymax = layout.cell_bounds(cell_index)
    if size is None:
        return np.array([rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)])
    return np.column_stack([rng.uniform(xmin, xmax, size), rng.uniform(ymin, ymax, size)])


def nearest_transmitter(layout: TransmitterLayout, p):
    """Index of the fixture closest to ``p`` on the work plane.

    Accepts a single point or an (n, 2) array.  Ties go to the lowest index.
    """
    p = np.asarray(p, dtype=float)
    single = p.ndim == 1
    pts = np.atleast_2d(p)
    d2 = ((pts[:, None, :] - layout.positions[None, :, :]) ** 2).sum(axis=-1)
    idx = np.argmin(d2, axis=1)
    return int(idx[0]) if single else idx
