"""Planar IRS geometry, steering vectors and the far-field response.

Conventions used throughout the package:

* Element spacings are stored in wavelengths, so the phase progression per
  unit of effective direction is ``2*pi*d``.
* The flattened element index is ``q = q_y * Q_z + q_z`` (z fastest), which
  matches ``np.kron(y, z)``.
* The response of a codeword with phases ``nu`` is
  ``sum_q a_q(beta) * exp(1j * nu_q)`` where ``a = y(beta_y) kron z(beta_z)``.
  All gains are normalized by the unit-cell factor ``g_bar``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class IrsGeometry:
    """Uniform planar array of ``q_y x q_z`` reflecting unit cells.

    Args:
        q_y: number of elements along y.
        q_z: number of elements along z.
        d_y: element spacing along y, in wavelengths.
        d_z: element spacing along z, in wavelengths.
        wavelength: carrier wavelength in meters. Only needed to report
            absolute unit-cell areas.
    """

    q_y: int
    q_z: int
    d_y: float = 0.5
    d_z: float = 0.5
    wavelength: Optional[float] = None

    def __post_init__(self):
        for name in ("q_y", "q_z"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        for name in ("d_y", "d_z"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be positive, got {value!r}")
            object.__setattr__(self, name, value)
        if self.wavelength is not None and not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength!r}")

    @property
    def n_elements(self) -> int:
        return self.q_y * self.q_z

    @property
    def phase_per_beta_y(self) -> float:
        """k * d_y, the phase advance per element per unit beta_y."""
        return TWO_PI * self.d_y

    @property
    def phase_per_beta_z(self) -> float:
        return TWO_PI * self.d_z

    @property
    def gain_factor(self) -> float:
        """Unit-cell factor g_bar = 4*pi*A_uc / lambda**2.

        With spacings in wavelengths this is ``4*pi*d_y*d_z`` and does not
        depend on the carrier.
        """
        return 4.0 * np.pi * self.d_y * self.d_z

    @property
    def unit_cell_area(self) -> float:
        """Unit-cell area in square meters (requires ``wavelength``)."""
        if self.wavelength is None:
            raise ValueError("unit_cell_area needs an absolute wavelength")
        return self.d_y * self.d_z * self.wavelength**2

    def element_indices(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-element (q_y, q_z) index arrays in flattened order."""
        q_y, q_z = np.divmod(np.arange(self.n_elements), self.q_z)
        return q_y, q_z

    def as_dict(self) -> dict:
        return {"q_y": self.q_y, "q_z": self.q_z, "d_y": self.d_y, "d_z": self.d_z}


@dataclass(frozen=True)
class AnglePair:
    """Elevation ``theta`` in [0, pi] and azimuth ``phi`` in [-pi, pi], radians."""

    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= np.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta!r}")
        if not -np.pi <= self.phi <= np.pi:
            raise ValueError(f"phi must lie in [-pi, pi], got {self.phi!r}")


@dataclass(frozen=True)
class EffectiveDirection:
    beta_y: float
    beta_z: float


@dataclass(frozen=True, eq=False)
class Codeword:
    """One phase configuration of the surface.

    ``bits`` is None for continuous phases; otherwise every phase lies on
    ``{0, 2*pi/S, ..., (S-1)*2*pi/S}`` with ``S = 2**bits``.
    """

    phases: np.ndarray
    bits: Optional[int] = None
    achieved_alpha: float = float("nan")
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=float).reshape(-1)
        if not np.all(np.isfinite(phases)):
            raise ValueError("codeword phases must be finite")
        phases = phases.copy()
        phases.setflags(write=False)
        object.__setattr__(self, "phases", phases)
        if self.bits is not None:
            if int(self.bits) != self.bits or self.bits < 1:
                raise ValueError(f"bits must be a positive integer, got {self.bits!r}")
            step = TWO_PI / 2 ** int(self.bits)
            levels = phases / step
            if np.any(np.abs(levels - np.round(levels)) * step > 1e-12) or np.any(
                (np.round(levels) < 0) | (np.round(levels) >= 2 ** int(self.bits))
            ):
                raise ValueError("discrete codeword phases must lie on the phase alphabet")

    @property
    def mode(self) -> str:
        return "continuous" if self.bits is None else "discrete"

    @property
    def weights(self) -> np.ndarray:
        return np.exp(1j * self.phases)

    def __len__(self):
        return self.phases.size


def wrap_phase(phases) -> np.ndarray:
    """Map phases to [0, 2*pi)."""
    wrapped = np.mod(np.asarray(phases, dtype=float), TWO_PI)
    # mod can return exactly 2*pi for tiny negative inputs
    wrapped[wrapped >= TWO_PI] = 0.0
    return wrapped


def direction_cosines(psi_i: AnglePair, psi_r: AnglePair) -> EffectiveDirection:
    """Effective direction of an incident/reflected angle pair."""
    beta_y = np.sin(psi_i.theta) * np.sin(psi_i.phi) + np.sin(psi_r.theta) * np.sin(psi_r.phi)
    beta_z = np.cos(psi_i.theta) + np.cos(psi_r.theta)
    return EffectiveDirection(float(beta_y), float(beta_z))


def direction_cosines_array(theta_i, phi_i, theta_r, phi_r) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``direction_cosines`` over arrays of angles."""
    beta_y = np.sin(theta_i) * np.sin(phi_i) + np.sin(theta_r) * np.sin(phi_r)
    beta_z = np.cos(theta_i) + np.cos(theta_r)
    return beta_y, beta_z


def _axis_steering(n: int, phase_step: float, beta) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    return np.exp(1j * phase_step * beta[..., None] * np.arange(n))


def steering_vector_y(geom: IrsGeometry, beta_y) -> np.ndarray:
    """y(beta_y) = [1, e^{j k d_y beta_y}, ..., e^{j k d_y beta_y (Q_y-1)}].

    Broadcasts over array-valued ``beta_y``; the element axis is last.
    """
    return _axis_steering(geom.q_y, geom.phase_per_beta_y, beta_y)


def steering_vector_z(geom: IrsGeometry, beta_z) -> np.ndarray:
    return _axis_steering(geom.q_z, geom.phase_per_beta_z, beta_z)


def steering_vector(geom: IrsGeometry, beta_y, beta_z) -> np.ndarray:
    """Kronecker steering vector y(beta_y) kron z(beta_z), shape ``(..., Q)``."""
    y = steering_vector_y(geom, beta_y)
    z = steering_vector_z(geom, beta_z)
    y, z = np.broadcast_arrays(y[..., :, None], z[..., None, :])
    return (y * z).reshape(*y.shape[:-2], geom.n_elements)


def _phases_of(geom: IrsGeometry, codeword) -> np.ndarray:
    phases = codeword.phases if isinstance(codeword, Codeword) else np.asarray(codeword, float)
    if phases.shape != (geom.n_elements,):
        raise ValueError(
            f"codeword has {phases.size} phases but the surface has {geom.n_elements} elements"
        )
    return phases


def response(geom: IrsGeometry, codeword, beta_y, beta_z) -> np.ndarray:
    """Normalized response g / g_bar at effective direction(s) (beta_y, beta_z).

    ``codeword`` may be a :class:`Codeword` or a plain phase vector.
    """
    phases = _phases_of(geom, codeword)
    return steering_vector(geom, beta_y, beta_z) @ np.exp(1j * phases)


def response_grid(geom: IrsGeometry, codeword, beta_y, beta_z) -> np.ndarray:
    """Response on the Cartesian grid ``beta_y x beta_z``, shape ``(n_y, n_z)``.

    Uses the separable structure: ``Y @ W @ Z.T`` with ``W`` the weights
    reshaped to ``(Q_y, Q_z)``.
    """
    phases = _phases_of(geom, codeword)
    weights = np.exp(1j * phases).reshape(geom.q_y, geom.q_z)
    y = steering_vector_y(geom, np.atleast_1d(beta_y))
    z = steering_vector_z(geom, np.atleast_1d(beta_z))
    return y @ weights @ z.T


def to_db(values, floor: float = 1e-30) -> np.ndarray:
    return 10.0 * np.log10(np.maximum(np.asarray(values, dtype=float), floor))


def gain_pattern(
    geom: IrsGeometry,
    codeword,
    beta_y,
    beta_z,
    *,
    normalize: bool = False,
    db: bool = False,
) -> np.ndarray:
    """|g/g_bar|**2 on the grid ``beta_y x beta_z``.

    With ``normalize`` the values are divided by ``Q**2`` (i.e. by
    ``|g_max/g_bar|**2``), so a perfectly steered beam peaks at 0 dB.
    """
    gain = np.abs(response_grid(geom, codeword, beta_y, beta_z)) ** 2
    if normalize:
        gain = gain / geom.n_elements**2
    return to_db(gain) if db else gain


def free_space_factor(distance: float, frequency: float) -> float:
    """Free-space path-loss factor (c / (4*pi*d*f))**2."""
    if distance <= 0 or frequency <= 0:
        raise ValueError("distance and frequency must be positive")
    return (SPEED_OF_LIGHT / (4.0 * np.pi * distance * frequency)) ** 2


def end_to_end_path_loss(
    geom: IrsGeometry, codeword, direction: EffectiveDirection, pl_t: float, pl_r: float
) -> float:
    """Path loss of the reflected link, g_bar**2 * |g/g_bar|**2 * pl_t * pl_r."""
    if not (0 < pl_t <= 1 and 0 < pl_r <= 1):
        raise ValueError("path-loss factors must lie in (0, 1]")
    g = response(geom, codeword, direction.beta_y, direction.beta_z)
    return float(geom.gain_factor**2 * abs(g) ** 2 * pl_t * pl_r)
