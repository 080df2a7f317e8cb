"""Computational domains: flat periodic tori and non-compact box charts."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class Domain:
    """A coordinate chart on which fields live.

    Tori carry per-axis radii (period 2*pi*r); box charts carry per-axis
    bounds and support only the analytic backend (no FFTs, no volume
    integrals).
    """

    kind: str
    dim: int
    radii: tuple[float, ...] | None = None
    bounds: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.kind not in ("torus", "box"):
            raise ConfigError(f"unknown domain kind {self.kind!r}")
        if self.dim < 2:
            raise ConfigError("domain dimension must be >= 2")
        if self.kind == "torus":
            if self.radii is None or len(self.radii) != self.dim:
                raise ConfigError("torus needs one radius per axis")
            if any(r <= 0 for r in self.radii):
                raise ConfigError("torus radii must be positive")
        else:
            if self.bounds is None or len(self.bounds) != self.dim:
                raise ConfigError("box needs one (lo, hi) pair per axis")
            if any(hi <= lo for lo, hi in self.bounds):
                raise ConfigError("box bounds must satisfy lo < hi")

    @property
    def is_torus(self) -> bool:
        return self.kind == "torus"

    @property
    def periods(self) -> tuple[float, ...]:
        if not self.is_torus:
            raise ConfigError("periods only defined on a torus")
        return tuple(2.0 * np.pi * r for r in self.radii)

    def grid_axes(self, n_grid: int) -> list[np.ndarray]:
        """Per-axis sample coordinates (uniform, endpoint excluded)."""
        self._check_grid(n_grid)
        return [np.arange(n_grid) * (L / n_grid) for L in self.periods]

    def grid_points(self, n_grid: int) -> np.ndarray:
        """All grid points, shape (n_grid**dim, dim), C order."""
        mesh = np.meshgrid(*self.grid_axes(n_grid), indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=-1)

    def mesh(self, n_grid: int) -> list[np.ndarray]:
        return np.meshgrid(*self.grid_axes(n_grid), indexing="ij")

    def cell_volume(self, n_grid: int) -> float:
        self._check_grid(n_grid)
        return float(np.prod([L / n_grid for L in self.periods]))

    def wavenumbers(self, n_grid: int) -> list[np.ndarray]:
        """Angular wavenumbers per axis matching numpy FFT layout."""
        self._check_grid(n_grid)
        return [
            2.0 * np.pi * np.fft.fftfreq(n_grid, d=L / n_grid) for L in self.periods
        ]

    def contains(self, point) -> bool:
        if self.is_torus:
            return True
        return all(lo <= x <= hi for x, (lo, hi) in zip(point, self.bounds))

    def wrap(self, pts: np.ndarray) -> np.ndarray:
        """Reduce coordinates modulo the periods (torus only)."""
        L = np.asarray(self.periods)
        return np.mod(pts, L)

    def _check_grid(self, n_grid: int) -> None:
        if not self.is_torus:
            raise ConfigError("grids are only defined on torus domains")
        if n_grid < 2 or n_grid % 2 != 0:
            raise ConfigError(f"grid resolution must be even and >= 2, got {n_grid}")


def torus(dim: int = 3, radii=None) -> Domain:
    radii = tuple(radii) if radii is not None else (1.0,) * dim
    return Domain("torus", dim, radii=radii)


def box(bounds) -> Domain:
    bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
    return Domain("box", len(bounds), bounds=bounds)
