"""Partition of effective-direction space into codeword design intervals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .array_model import IrsGeometry


def covered_span(spacing: float) -> float:
    """Total covered span min{4, lambda/d} with ``spacing`` in wavelengths."""
    return min(4.0, 1.0 / spacing)


@dataclass(frozen=True)
class BetaGrid:
    """``m_y x m_z`` equal-width intervals over ``[-span/2, span/2]`` per axis.

    Interval indices are zero-based; interval ``m`` on an axis spans
    ``[-span/2 + m*span/M, -span/2 + (m+1)*span/M]``.
    """

    m_y: int
    m_z: int
    beta_bar_y: float
    beta_bar_z: float
    p_y: int = 5
    p_z: int = 5

    def __post_init__(self):
        for name in ("m_y", "m_z", "p_y", "p_z"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        for name in ("beta_bar_y", "beta_bar_z"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def size(self) -> int:
        return self.m_y * self.m_z

    def _axis(self, axis: str) -> tuple[int, float, int]:
        if axis == "y":
            return self.m_y, self.beta_bar_y, self.p_y
        if axis == "z":
            return self.m_z, self.beta_bar_z, self.p_z
        raise ValueError(f"axis must be 'y' or 'z', got {axis!r}")

    def edges(self, axis: str) -> np.ndarray:
        """The ``M + 1`` interval boundaries along ``axis``."""
        m, span, _ = self._axis(axis)
        return -span / 2 + np.arange(m + 1) * (span / m)

    def axis_interval(self, axis: str, index: int) -> tuple[float, float]:
        m, _, _ = self._axis(axis)
        if not 0 <= index < m:
            raise IndexError(f"interval index {index} out of range for {m} intervals on {axis}")
        e = self.edges(axis)
        return float(e[index]), float(e[index + 1])

    def interval(self, m_y: int, m_z: int) -> tuple[tuple[float, float], tuple[float, float]]:
        return self.axis_interval("y", m_y), self.axis_interval("z", m_z)

    def center(self, m_y: int, m_z: int) -> tuple[float, float]:
        (ly, hy), (lz, hz) = self.interval(m_y, m_z)
        return (ly + hy) / 2, (lz + hz) / 2

    def width(self, axis: str) -> float:
        m, span, _ = self._axis(axis)
        return span / m

    def locate(self, axis: str, beta: float) -> tuple[int, ...]:
        """Indices of every closed interval on ``axis`` containing ``beta``.

        Interior points map to one interval, shared boundaries to two.
        """
        e = self.edges(axis)
        hits = np.nonzero((e[:-1] <= beta) & (beta <= e[1:]))[0]
        return tuple(int(i) for i in hits)

    def indices(self):
        """Row-major (m_y, m_z) iteration order used for codebooks."""
        for m_y in range(self.m_y):
            for m_z in range(self.m_z):
                yield m_y, m_z

    def as_dict(self) -> dict:
        return {
            "m_y": self.m_y,
            "m_z": self.m_z,
            "beta_bar_y": self.beta_bar_y,
            "beta_bar_z": self.beta_bar_z,
            "p_y": self.p_y,
            "p_z": self.p_z,
        }


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Discrete constraint points of one design interval.

    The optimization constrains every pair of the Cartesian product
    ``points_y x points_z``.
    """

    points_y: np.ndarray
    points_z: np.ndarray
    index: tuple[int, int] = (0, 0)

    def __post_init__(self):
        for name in ("points_y", "points_z"):
            pts = np.sort(np.asarray(getattr(self, name), dtype=float).reshape(-1))
            if pts.size == 0:
                raise ValueError(f"{name} must not be empty")
            pts.setflags(write=False)
            object.__setattr__(self, name, pts)

    @classmethod
    def from_intervals(cls, interval_y, interval_z, p_y: int = 5, p_z: int = 5, index=(0, 0)):
        return cls(_uniform_points(*interval_y, p_y), _uniform_points(*interval_z, p_z), index)

    @property
    def size(self) -> int:
        return self.points_y.size * self.points_z.size

    def pairs(self) -> np.ndarray:
        """All (beta_y, beta_z) constraint points, shape ``(P, 2)``, y-major."""
        by, bz = np.meshgrid(self.points_y, self.points_z, indexing="ij")
        return np.column_stack([by.ravel(), bz.ravel()])

    def shifted(self, dy: float, dz: float) -> "SampleSet":
        return SampleSet(self.points_y + dy, self.points_z + dz, self.index)


def _uniform_points(lo: float, hi: float, p: int) -> np.ndarray:
    if p < 1:
        raise ValueError("need at least one sample point per axis")
    if hi < lo:
        raise ValueError("interval upper end below lower end")
    if p == 1:
        return np.array([(lo + hi) / 2])
    return np.linspace(lo, hi, p)


def build_grid(geom: IrsGeometry, m_y: int, m_z: int, p_y: int = 5, p_z: int = 5) -> BetaGrid:
    """Design grid of ``m_y * m_z`` intervals covering the aliasing-free range."""
    return BetaGrid(m_y, m_z, covered_span(geom.d_y), covered_span(geom.d_z), p_y, p_z)


def sample_interval(grid: BetaGrid, m_y: int, m_z: int) -> SampleSet:
    """Uniform samples (endpoints included) of interval (m_y, m_z)."""
    iy, iz = grid.interval(m_y, m_z)
    return SampleSet.from_intervals(iy, iz, grid.p_y, grid.p_z, index=(m_y, m_z))
