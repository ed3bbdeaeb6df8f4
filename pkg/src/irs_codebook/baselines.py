"""Reference codeword designs: linear (conjugate steering) and quadratic (chirped).

Both are reconstructions from their usual textbook forms, not exact copies
of any published parameterization. Codebooks built from them carry the
``baseline:reconstructed`` tag.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .array_model import Codeword, IrsGeometry, wrap_phase

BASELINE_TAG = "baseline:reconstructed"


def _axis_linear(n: int, phase_step: float, beta0: float) -> np.ndarray:
    return -phase_step * beta0 * np.arange(n)


def _axis_chirp(n: int, c: float) -> np.ndarray:
    return c * (np.arange(n) - (n - 1) / 2.0) ** 2


def linear_codeword(geom: IrsGeometry, center) -> Codeword:
    """Conjugate steering towards ``center = (beta_y0, beta_z0)``."""
    by0, bz0 = center
    ny = _axis_linear(geom.q_y, geom.phase_per_beta_y, by0)
    nz = _axis_linear(geom.q_z, geom.phase_per_beta_z, bz0)
    phases = (ny[:, None] + nz[None, :]).reshape(-1)
    return Codeword(wrap_phase(phases), None, meta={"designer": "linear", "tag": BASELINE_TAG})


@dataclass
class QuadraticProfileConfig:
    """Chirp coefficient per axis in radians per squared element index.

    ``"auto"`` sweeps the local steering direction across the interval
    width; a number sets the coefficient explicitly.
    """

    c_y: Union[str, float] = "auto"
    c_z: Union[str, float] = "auto"

    def __post_init__(self):
        for name in ("c_y", "c_z"):
            value = getattr(self, name)
            if isinstance(value, str):
                if value != "auto":
                    raise ValueError(f"{name} must be 'auto' or a number")
            elif not np.isfinite(value):
                raise ValueError(f"{name} must be finite")

    def coefficients(self, geom: IrsGeometry, width_y: float, width_z: float) -> tuple[float, float]:
        return (
            _resolve(self.c_y, geom.q_y, geom.phase_per_beta_y, width_y),
            _resolve(self.c_z, geom.q_z, geom.phase_per_beta_z, width_z),
        )


def _resolve(c, n: int, phase_step: float, width: float) -> float:
    if c != "auto":
        return float(c)
    if n == 1:
        return 0.0
    # instantaneous phase slope 2c(q - (n-1)/2) sweeps phase_step*width over the aperture
    return phase_step * width / (2.0 * (n - 1))


def quadratic_codeword(
    geom: IrsGeometry, interval, cfg: Optional[QuadraticProfileConfig] = None
) -> Codeword:
    """Linear steering to the interval center plus a per-axis quadratic phase.

    Args:
        interval: ``((lo_y, hi_y), (lo_z, hi_z))``.
    """
    cfg = cfg or QuadraticProfileConfig()
    (ly, hy), (lz, hz) = interval
    cy, cz = cfg.coefficients(geom, hy - ly, hz - lz)
    ny = _axis_linear(geom.q_y, geom.phase_per_beta_y, (ly + hy) / 2) + _axis_chirp(geom.q_y, cy)
    nz = _axis_linear(geom.q_z, geom.phase_per_beta_z, (lz + hz) / 2) + _axis_chirp(geom.q_z, cz)
    phases = (ny[:, None] + nz[None, :]).reshape(-1)
    meta = {"designer": "quadratic", "tag": BASELINE_TAG, "c_y": cy, "c_z": cz}
    return Codeword(wrap_phase(phases), None, meta=meta)
