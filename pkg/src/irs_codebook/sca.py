"""Continuous phase-shift design by penalized SDP and successive convex approximation.

For a codeword with weights ``w = exp(1j*nu)`` the gain at a sample point is
``|a^T w|**2 = w^H conj(A) w`` with ``A = a a^H`` the steering outer product.
The designer therefore lifts ``W = w w^H`` and constrains
``Tr(W conj(A_p)) >= alpha`` for every sample point ``p``.

Each iteration maximizes the concave surrogate

    alpha - eta * (Tr(W) - ||W_prev||_2 - <L, W - W_prev>)

where ``L`` is the outer product of the principal eigenvector of
``W_prev``; the bracket upper-bounds ``||W||_* - ||W||_2`` because the
linearized spectral norm is a global minorant.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .array_model import Codeword, IrsGeometry, steering_vector, wrap_phase
from .grid import SampleSet
from .sdp import SdpSolverError, solve_unit_diagonal_sdp

logger = logging.getLogger(__name__)

PSD_TOL = 1e-7
DIAG_TOL = 1e-6
HERMITIAN_TOL = 1e-9


class DesignError(RuntimeError):
    """Every subproblem attempt of a codeword design failed."""

    def __init__(self, message: str, report: Optional["DesignReport"] = None):
        super().__init__(message)
        self.report = report


class CertificateError(RuntimeError):
    """The conic solver returned a point that fails the feasibility certificate."""


@dataclass
class ScaConfig:
    """Penalty schedule and stopping rules.

    ``None`` entries are filled from the problem size: ``eta_init = 1e-6*Q**2``,
    ``eta_max = 1e3*Q**2`` and ``tol_rank = 1e-5*Q``.
    """

    eta_init: Optional[float] = None
    eta_growth: float = 1.5
    eta_max: Optional[float] = None
    i_max: int = 25
    tol_objective: float = 1e-4
    tol_rank: Optional[float] = None
    rng_seed: int = 0
    restarts: int = 1
    sdp_tol: float = 1e-9

    def __post_init__(self):
        if self.eta_init is not None and not self.eta_init > 0:
            raise ValueError("eta_init must be positive")
        if not self.eta_growth > 1:
            raise ValueError("eta_growth must exceed 1")
        if (
            self.eta_init is not None
            and self.eta_max is not None
            and self.eta_max < self.eta_init
        ):
            raise ValueError("eta_max must be at least eta_init")
        if self.i_max < 1:
            raise ValueError("i_max must be at least 1")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")

    def resolved(self, n_elements: int) -> "ScaConfig":
        q2 = float(n_elements) ** 2
        eta_init = 1e-6 * q2 if self.eta_init is None else self.eta_init
        eta_max = 1e3 * q2 if self.eta_max is None else self.eta_max
        return ScaConfig(
            eta_init=eta_init,
            eta_growth=self.eta_growth,
            eta_max=max(eta_max, eta_init),
            i_max=self.i_max,
            tol_objective=self.tol_objective,
            tol_rank=1e-5 * n_elements if self.tol_rank is None else self.tol_rank,
            rng_seed=self.rng_seed,
            restarts=self.restarts,
            sdp_tol=self.sdp_tol,
        )

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class DesignReport:
    """Per-codeword solve telemetry."""

    iterations: int = 0
    objective_trace: list = field(default_factory=list)
    # objective of the previous iterate under the same eta, for monotonicity checks
    start_objective_trace: list = field(default_factory=list)
    rank_residual_trace: list = field(default_factory=list)
    eta_trace: list = field(default_factory=list)
    sdp_alpha_trace: list = field(default_factory=list)
    subproblem_status: list = field(default_factory=list)
    achieved_alpha: float = float("nan")
    sdp_alpha: float = float("nan")
    converged: bool = False
    relaxation_gap_flag: bool = False
    restart: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def sample_steering(geom: IrsGeometry, samples: SampleSet) -> np.ndarray:
    """Steering vectors of every sample point, shape ``(P, Q)``."""
    pts = samples.pairs()
    return steering_vector(geom, pts[:, 0], pts[:, 1])


def constraint_matrices(geom: IrsGeometry, samples: SampleSet) -> np.ndarray:
    """Rank-one steering outer products ``A_p = a_p a_p^H``, shape ``(P, Q, Q)``."""
    a = sample_steering(geom, samples)
    return a[:, :, None] * a.conj()[:, None, :]


def gain_vectors(geom: IrsGeometry, samples: SampleSet) -> np.ndarray:
    """Rows ``v_p`` with ``gain_p(W) = v_p^H W v_p`` for the lifted weights."""
    return sample_steering(geom, samples).conj()


def lifted_gains(vectors: np.ndarray, W: np.ndarray) -> np.ndarray:
    return np.real(np.einsum("pq,qr,pr->p", vectors.conj(), W, vectors))


def codeword_gains(geom: IrsGeometry, phases, samples: SampleSet) -> np.ndarray:
    """Exact |g/g_bar|**2 of a phase vector at every sample point."""
    return np.abs(sample_steering(geom, samples) @ np.exp(1j * np.asarray(phases))) ** 2


def _principal(W: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    vals, vecs = np.linalg.eigh(0.5 * (W + W.conj().T))
    return float(vals[-1]), vecs[:, -1], vals


def spectral_norm(W: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (W + W.conj().T)))))


def rank_residual(W: np.ndarray) -> float:
    """Nuclear minus spectral norm, zero exactly for rank <= 1."""
    vals = np.abs(np.linalg.eigvalsh(0.5 * (W + W.conj().T)))
    return float(vals.sum() - vals.max())


def taylor_spectral_lower_bound(W_prev: np.ndarray, W: np.ndarray) -> float:
    """First-order expansion of ``||W||_2`` around ``W_prev``.

    ``||W_prev||_2 + <lam lam^H, W - W_prev>`` with ``lam`` the principal
    eigenvector of ``W_prev``; never exceeds ``||W||_2`` for Hermitian ``W``.
    """
    lam_max, vec, _ = _principal(W_prev)
    return lam_max + float(np.real(vec.conj() @ (W - W_prev) @ vec))


def certify(W: np.ndarray, alpha: float, vectors: np.ndarray) -> dict:
    """Check PSD, unit diagonal and constraint satisfaction of a subproblem point."""
    Q = W.shape[0]
    herm = float(np.max(np.abs(W - W.conj().T))) if W.size else 0.0
    min_eig = float(np.linalg.eigvalsh(0.5 * (W + W.conj().T))[0])
    diag_dev = float(np.max(np.abs(np.diag(W) - 1.0)))
    violation = float(max(0.0, alpha - lifted_gains(vectors, W).min()))
    cert = {
        "hermitian_error": herm,
        "min_eigenvalue": min_eig,
        "diag_deviation": diag_dev,
        "constraint_violation": violation,
    }
    if herm > HERMITIAN_TOL or min_eig < -PSD_TOL or diag_dev > DIAG_TOL or violation > 1e-6 * Q**2:
        raise CertificateError(f"subproblem solution failed its certificate: {cert}")
    return cert


def solve_convex_subproblem(vectors, W_prev: np.ndarray, eta: float, *, tol: float = 1e-9):
    """One convexified penalty subproblem.

    Args:
        vectors: ``(P, Q)`` rows with ``gain_p(W) = v_p^H W v_p`` (see
            :func:`gain_vectors`).
        W_prev: current iterate, feasible within the certificate tolerances.
        eta: penalty factor.

    Returns:
        ``(W, alpha, status)`` where ``alpha`` is the exact minimum sampled
        gain of the returned ``W``.

    Raises:
        SdpSolverError: the conic solver failed.
        CertificateError: the solver's point is not feasible.
    """
    vectors = np.atleast_2d(np.asarray(vectors, dtype=complex))
    Q = vectors.shape[1]
    if Q == 1:
        W = np.ones((1, 1), dtype=complex)
        return W, float(lifted_gains(vectors, W).min()), "trivial"
    _, vec, _ = _principal(W_prev)
    cost = eta * np.outer(vec, vec.conj()) if eta > 0 else None
    sol = solve_unit_diagonal_sdp(vectors, cost, tol=tol)
    W = 0.5 * (sol.W + sol.W.conj().T)
    certify(W, sol.alpha, vectors)
    return W, float(lifted_gains(vectors, W).min()), sol.status


def penalized_objective(W: np.ndarray, vectors: np.ndarray, eta: float) -> float:
    """alpha(W) - eta * (||W||_* - ||W||_2) for PSD, unit-diagonal ``W``."""
    return float(lifted_gains(vectors, W).min()) - eta * rank_residual(W)


def rank_one_recovery(W: np.ndarray) -> np.ndarray:
    """Unit-modulus phases from the principal eigenvector of ``W``.

    ``w = sqrt(Tr W) * v``; each entry is projected to unit modulus by
    keeping its argument (``arg 0 = 0``), then the common phase is removed
    so that the first phase is zero. Phases are returned in [0, 2*pi).
    """
    W = np.asarray(W, dtype=complex)
    _, vec, _ = _principal(W)
    w = np.sqrt(max(float(np.real(np.trace(W))), 0.0)) * vec
    phases = np.angle(w)
    return wrap_phase(phases - phases[0])


def random_rank_one(n: int, rng: np.random.Generator) -> np.ndarray:
    w = np.exp(1j * rng.uniform(0.0, 2 * np.pi, n))
    return np.outer(w, w.conj())


def sca_design(
    geom: IrsGeometry,
    samples: SampleSet,
    cfg: Optional[ScaConfig] = None,
    *,
    init_phases=None,
) -> tuple[Codeword, DesignReport]:
    """Design one continuous codeword for a sample set.

    Runs the penalized SCA from a random rank-one start (or from
    ``init_phases``), recovers a unit-modulus codeword from the final lifted
    matrix and reports its exact worst sampled gain.

    Raises:
        DesignError: no subproblem could be solved.
    """
    cfg = (cfg or ScaConfig()).resolved(geom.n_elements)
    Q = geom.n_elements
    vectors = gain_vectors(geom, samples)
    if Q == 1:
        alpha = float(codeword_gains(geom, [0.0], samples).min())
        report = DesignReport(iterations=0, achieved_alpha=alpha, sdp_alpha=alpha, converged=True)
        return Codeword(np.zeros(1), None, alpha), report

    rng = np.random.default_rng(cfg.rng_seed)
    best_phases, best_report = None, None
    for restart in range(cfg.restarts):
        if init_phases is not None and restart == 0:
            w0 = np.exp(1j * np.asarray(init_phases, dtype=float))
            W = np.outer(w0, w0.conj())
        else:
            W = random_rank_one(Q, rng)
        report, W = _run_sca(W, vectors, cfg)
        report.restart = restart
        if W is None:
            best_report = best_report or report
            continue
        phases = rank_one_recovery(W)
        report.achieved_alpha = float(codeword_gains(geom, phases, samples).min())
        report.relaxation_gap_flag = bool(report.achieved_alpha < 0.85 * report.sdp_alpha)
        if best_phases is None or report.achieved_alpha > best_report.achieved_alpha:
            best_phases, best_report = phases, report

    if best_phases is None:
        raise DesignError("all convex subproblems failed", best_report)
    return Codeword(best_phases, None, best_report.achieved_alpha), best_report


def _run_sca(W: np.ndarray, vectors: np.ndarray, cfg: ScaConfig):
    report = DesignReport()
    eta = cfg.eta_init
    prev_obj = None
    Q = W.shape[0]
    for _ in range(cfg.i_max):
        start_obj = penalized_objective(W, vectors, eta)
        try:
            W_new, sdp_alpha, status = solve_convex_subproblem(vectors, W, eta, tol=cfg.sdp_tol)
        except (SdpSolverError, CertificateError) as exc:
            logger.warning("subproblem failed at eta=%.3g: %s", eta, exc)
            report.subproblem_status.append(f"failed: {type(exc).__name__}")
            break
        nuclear = float(np.real(np.trace(W_new)))
        if abs(nuclear - Q) > 1e-6 * max(1.0, Q):
            raise CertificateError(f"nuclear norm {nuclear} differs from Q={Q}")
        residual = rank_residual(W_new)
        obj = sdp_alpha - eta * residual
        W = W_new
        report.iterations += 1
        report.objective_trace.append(obj)
        report.start_objective_trace.append(start_obj)
        report.rank_residual_trace.append(residual)
        report.eta_trace.append(eta)
        report.sdp_alpha_trace.append(sdp_alpha)
        report.subproblem_status.append(status)
        report.sdp_alpha = sdp_alpha
        if prev_obj is not None:
            rel = abs(obj - prev_obj) / max(1.0, abs(prev_obj))
            if rel < cfg.tol_objective and residual < cfg.tol_rank:
                report.converged = True
                break
        prev_obj = obj
        eta = min(cfg.eta_growth * eta, cfg.eta_max)
    if report.iterations and not report.converged:
        report.converged = report.rank_residual_trace[-1] < cfg.tol_rank
    return report, (W if report.iterations else None)
