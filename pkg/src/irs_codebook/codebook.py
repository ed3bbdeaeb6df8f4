"""Codebook generation over a design grid."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .array_model import Codeword, IrsGeometry, steering_vector, wrap_phase
from .baselines import BASELINE_TAG, QuadraticProfileConfig, linear_codeword, quadratic_codeword
from .discrete import (
    BnbConfig,
    PhaseAlphabet,
    assignment_to_codeword,
    build_discrete_program,
    solve_exact_bnb,
)
from .grid import BetaGrid, SampleSet, sample_interval
from .sca import DesignError, ScaConfig, codeword_gains, sca_design

logger = logging.getLogger(__name__)

DESIGNERS = ("continuous", "discrete", "linear", "quadratic")

# above this many elements the exact discrete solver is replaced by rounding
EXACT_DISCRETE_MAX_ELEMENTS = 25


class CodebookError(RuntimeError):
    """One or more codewords of a codebook could not be designed."""

    def __init__(self, message: str, failures: Optional[dict] = None):
        super().__init__(message)
        self.failures = failures or {}


@dataclass
class Codebook:
    geometry: IrsGeometry
    grid: BetaGrid
    designer: str
    config: dict
    codewords: list
    indices: list
    reports: list = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.codewords)

    def phase_matrix(self) -> np.ndarray:
        """All codeword phases, shape ``(M, Q)``."""
        return np.stack([cw.phases for cw in self.codewords])

    def weight_matrix(self) -> np.ndarray:
        return np.exp(1j * self.phase_matrix())


@dataclass
class DesignOptions:
    """Designer-specific settings used by :func:`generate_codebook`."""

    sca: ScaConfig = field(default_factory=ScaConfig)
    bits: Optional[int] = None
    bnb: BnbConfig = field(default_factory=BnbConfig)
    quadratic: QuadraticProfileConfig = field(default_factory=QuadraticProfileConfig)
    # design the first interval once and shift it to the others (continuous only)
    reuse_template: bool = False
    exact_discrete_max_elements: int = EXACT_DISCRETE_MAX_ELEMENTS

    def as_dict(self, designer: str) -> dict:
        out: dict = {}
        if designer == "continuous":
            out["sca"] = self.sca.as_dict()
            out["reuse_template"] = self.reuse_template
        elif designer == "discrete":
            out["bits"] = self.bits
            out["sca"] = self.sca.as_dict()
            out["bnb"] = {
                "node_limit": self.bnb.node_limit,
                "gap_tolerance": self.bnb.gap_tolerance,
                "branching": self.bnb.branching,
            }
            out["exact_discrete_max_elements"] = self.exact_discrete_max_elements
        elif designer == "quadratic":
            out["c_y"], out["c_z"] = self.quadratic.c_y, self.quadratic.c_z
        return out


def shift_codeword(geom: IrsGeometry, phases, d_beta_y: float, d_beta_z: float) -> np.ndarray:
    """Phases whose pattern is the input pattern translated by ``(d_beta_y, d_beta_z)``."""
    q_y, q_z = geom.element_indices()
    ramp = geom.phase_per_beta_y * d_beta_y * q_y + geom.phase_per_beta_z * d_beta_z * q_z
    return wrap_phase(np.asarray(phases, float) - ramp)


def design_discrete(geom: IrsGeometry, samples: SampleSet, opts: DesignOptions):
    """Exact discrete design for small surfaces, rounded SCA design otherwise."""
    alphabet = PhaseAlphabet(opts.bits)
    if geom.n_elements <= opts.exact_discrete_max_elements:
        program = build_discrete_program(geom, samples, alphabet)
        res = solve_exact_bnb(program, opts.bnb)
        cw = assignment_to_codeword(res.assignment, alphabet, res.alpha)
        report = {
            "method": "exact_bnb",
            "status": res.status,
            "bound": res.bound,
            "nodes": res.nodes,
            "achieved_alpha": res.alpha,
            "optimal": res.status == "optimal",
        }
        return Codeword(cw.phases, alphabet.bits, res.alpha, {"optimal": res.status == "optimal"}), report
    cont, sca_report = sca_design(geom, samples, opts.sca)
    levels = alphabet.quantize(cont.phases)
    levels = np.mod(levels - levels[0], alphabet.levels_count)
    phases = levels * alphabet.delta
    alpha = float(codeword_gains(geom, phases, samples).min())
    report = {
        "method": "quantized_continuous",
        "status": "non_optimal",
        "optimal": False,
        "achieved_alpha": alpha,
        "continuous_alpha": cont.achieved_alpha,
        "sca": sca_report.as_dict(),
    }
    return Codeword(phases, alphabet.bits, alpha, {"optimal": False}), report


def design_one(geom: IrsGeometry, grid: BetaGrid, index, designer: str, opts: DesignOptions):
    """Design the codeword of interval ``index``; returns ``(Codeword, report dict)``."""
    m_y, m_z = index
    samples = sample_interval(grid, m_y, m_z)
    if designer == "continuous":
        cfg = opts.sca
        cw, rep = sca_design(geom, samples, cfg)
        return cw, rep.as_dict()
    if designer == "discrete":
        return design_discrete(geom, samples, opts)
    if designer == "linear":
        cw = linear_codeword(geom, grid.center(m_y, m_z))
    elif designer == "quadratic":
        cw = quadratic_codeword(geom, grid.interval(m_y, m_z), opts.quadratic)
    else:
        raise ValueError(f"unknown designer {designer!r}")
    alpha = float(codeword_gains(geom, cw.phases, samples).min())
    return Codeword(cw.phases, None, alpha, cw.meta), {"tag": BASELINE_TAG, "achieved_alpha": alpha}


def _design_task(args):
    geom, grid, index, designer, opts = args
    try:
        return index, design_one(geom, grid, index, designer, opts), None
    except DesignError as exc:
        return index, None, str(exc)


def generate_codebook(
    geom: IrsGeometry,
    grid: BetaGrid,
    designer: str = "continuous",
    opts: Optional[DesignOptions] = None,
    *,
    jobs: int = 1,
) -> Codebook:
    """Design one codeword per grid interval, in row-major (m_y, m_z) order.

    Raises:
        CodebookError: any codeword failed; partial codebooks are not returned.
    """
    if designer not in DESIGNERS:
        raise ValueError(f"designer must be one of {DESIGNERS}, got {designer!r}")
    opts = opts or DesignOptions()
    if designer == "discrete" and opts.bits is None:
        raise ValueError("the discrete designer needs a bit resolution")
    indices = list(grid.indices())

    if opts.reuse_template and designer == "continuous":
        results = _template_codebook(geom, grid, indices, opts)
    else:
        tasks = [(geom, grid, idx, designer, opts) for idx in indices]
        if jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_design_task, tasks))
        else:
            results = [_design_task(t) for t in tasks]

    failures = {idx: err for idx, _, err in results if err is not None}
    if failures:
        raise CodebookError(f"{len(failures)} of {len(indices)} codewords failed", failures)
    codewords = [out[0] for _, out, _ in results]
    reports = [out[1] for _, out, _ in results]
    config = opts.as_dict(designer)
    if designer in ("linear", "quadratic"):
        config["tag"] = BASELINE_TAG
    return Codebook(geom, grid, designer, config, codewords, indices, reports)


def _template_codebook(geom, grid, indices, opts):
    """Continuous design of the first interval, translated to the others.

    Exact for equal-width intervals: the sample pattern translates with the
    interval, and the translated codeword has the same sampled gains.
    """
    base = indices[0]
    try:
        cw, rep = design_one(geom, grid, base, "continuous", opts)
    except DesignError as exc:
        return [(idx, None, str(exc)) for idx in indices]
    by0, bz0 = grid.center(*base)
    results = []
    for idx in indices:
        by, bz = grid.center(*idx)
        phases = shift_codeword(geom, cw.phases, by - by0, bz - bz0)
        phases = wrap_phase(phases - phases[0])
        alpha = float(codeword_gains(geom, phases, sample_interval(grid, *idx)).min())
        results.append((idx, (Codeword(phases, None, alpha), {**rep, "template_of": list(base)}), None))
    return results


def codebook_steering_gains(codebook: Codebook, beta_y, beta_z) -> np.ndarray:
    """|w_m^T a(beta)|**2 for every codeword and direction, shape ``(N, M)``."""
    a = steering_vector(codebook.geometry, np.asarray(beta_y), np.asarray(beta_z))
    return np.abs(a @ codebook.weight_matrix().T) ** 2
