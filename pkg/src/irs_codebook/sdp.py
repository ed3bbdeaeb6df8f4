"""Primal-dual interior-point solver for unit-diagonal max-min SDPs.

Solves

    maximize    alpha + Re<C, W>
    subject to  v_p^H W v_p >= alpha      for every row v_p
                diag(W) = 1
                W Hermitian positive semidefinite

together with its dual

    minimize    sum(y)
    subject to  Z = Diag(y) - sum_p mu_p v_p v_p^H - C  >= 0
                mu >= 0,  sum(mu) = 1.

The Newton system uses the HKM direction. Because the equality operator is
the diagonal and every inequality matrix is rank one, the Schur complement
is a dense ``(Q + P + 1)``-square system assembled in O(Q^2 P + Q P^2).
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg

logger = logging.getLogger(__name__)

SHORT_STEP = 0.2
CENTERING_SIGMA = 0.5


class SdpSolverError(RuntimeError):
    """The interior-point iteration broke down or did not converge."""


@dataclass
class SdpSolution:
    W: np.ndarray
    alpha: float
    objective: float
    status: str
    iterations: int
    gap: float
    primal_infeasibility: float
    dual_infeasibility: float
    y: np.ndarray
    mu: np.ndarray


def _herm(x):
    return 0.5 * (x + x.conj().T)


def _unique_rows(V: np.ndarray, decimals: int = 10) -> np.ndarray:
    """Drop repeated constraint rows (e.g. samples aliased one period apart).

    Repeats leave the problem unchanged but make the Newton system singular.
    """
    key = np.round(np.concatenate([V.real, V.imag], axis=1), decimals) + 0.0
    _, first = np.unique(key, axis=0, return_index=True)
    return V[np.sort(first)]


def _max_step(x: np.ndarray, dx: np.ndarray) -> float:
    """Largest t with x + t*dx still positive semidefinite."""
    try:
        chol = np.linalg.cholesky(x)
    except np.linalg.LinAlgError as exc:
        raise SdpSolverError("iterate left the positive definite cone") from exc
    inv = linalg.solve_triangular(chol, np.eye(x.shape[0]), lower=True)
    try:
        lam_min = np.linalg.eigvalsh(_herm(inv @ dx @ inv.conj().T))[0]
    except np.linalg.LinAlgError as exc:
        raise SdpSolverError("eigenvalue computation failed") from exc
    return np.inf if lam_min >= 0 else -1.0 / lam_min


def _max_step_vec(x: np.ndarray, dx: np.ndarray) -> float:
    neg = dx < 0
    return np.inf if not np.any(neg) else float(np.min(-x[neg] / dx[neg]))


def solve_unit_diagonal_sdp(
    vectors,
    cost=None,
    *,
    tol: float = 1e-9,
    max_iter: int = 100,
) -> SdpSolution:
    """Solve the max-min SDP described in the module docstring.

    Args:
        vectors: ``(P, Q)`` complex array; row ``p`` is ``v_p``.
        cost: optional Hermitian ``(Q, Q)`` linear objective term ``C``.
        tol: relative tolerance on the duality gap and the residuals.
        max_iter: interior-point iteration cap.

    Raises:
        SdpSolverError: numerical breakdown, or no usable point after
            ``max_iter`` iterations.
    """
    V = np.atleast_2d(np.asarray(vectors, dtype=complex))
    P, Q = V.shape
    if P == 0:
        raise ValueError("need at least one constraint row")
    V = _unique_rows(V)
    P = V.shape[0]
    C = np.zeros((Q, Q), dtype=complex) if cost is None else _herm(np.asarray(cost, complex))
    if C.shape != (Q, Q):
        raise ValueError("cost matrix has the wrong shape")

    # scale rows to unit norm; alpha and C are rescaled accordingly
    scale = float(np.max(np.sum(np.abs(V) ** 2, axis=1)))
    if scale <= 0:
        raise ValueError("constraint rows are all zero")
    A = V.T / np.sqrt(scale)
    C = C / scale
    c_norm = float(np.linalg.norm(C))

    def g(X):
        return np.real(np.sum(A.conj() * (X @ A), axis=0))

    def a_adj(m):
        return (A * m) @ A.conj().T

    n = Q + P
    W = np.eye(Q, dtype=complex)
    alpha = 0.0
    s = np.maximum(g(W) - alpha, 1.0)
    mu = np.full(P, 1.0 / P)
    B = C + a_adj(mu)
    zeta = 1.0 + float(np.max(np.abs(np.linalg.eigvalsh(B))))
    Z = zeta * np.eye(Q, dtype=complex)
    y = np.real(np.diag(Z + B)).copy()

    status = "max_iter"
    gap = pinf = dinf = np.inf
    for it in range(1, max_iter + 1):
        Rd = _herm(np.diag(y) - a_adj(mu) - C - Z)
        rp1 = np.real(np.diag(W)) - 1.0
        rp2 = g(W) - alpha - s
        re = mu.sum() - 1.0
        comp = float(np.real(np.vdot(W, Z))) + float(mu @ s)
        pobj = alpha + float(np.real(np.vdot(C, W)))
        gap = comp / (1.0 + abs(pobj))
        pinf = max(np.max(np.abs(rp1)), np.max(np.abs(rp2)) / (1.0 + abs(alpha)))
        dinf = max(np.linalg.norm(Rd) / (1.0 + c_norm), abs(re))
        if gap < tol and pinf < tol and dinf < tol:
            status = "optimal"
            break
        nu = comp / n

        try:
            chol_z = linalg.cho_factor(Z, lower=True)
        except linalg.LinAlgError as exc:
            raise SdpSolverError("dual slack lost definiteness") from exc
        Zinv = _herm(linalg.cho_solve(chol_z, np.eye(Q)))
        U = Zinv @ A
        Vw = W @ A
        M11 = np.real(Zinv * W.T)
        M12 = np.real(U * Vw.conj())
        M22 = np.real((A.conj().T @ U) * (A.conj().T @ Vw).T)
        D = s / mu
        K = np.zeros((n + 1, n + 1))
        K[:Q, :Q] = M11
        K[:Q, Q:n] = -M12
        K[Q:n, :Q] = M12.T
        K[Q:n, Q:n] = -(M22 + np.diag(D))
        K[Q:n, n] = 1.0
        K[n, Q:n] = 1.0
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", linalg.LinAlgWarning)
                lu = linalg.lu_factor(K, check_finite=True)
        except (linalg.LinAlgError, linalg.LinAlgWarning, ValueError) as exc:
            raise SdpSolverError("singular Newton system") from exc

        def T(X):
            return _herm(Zinv @ X @ W)

        def direction(Rc_W, Rc_s):
            H = Rc_W - T(Rd)
            rhs = np.concatenate([np.real(np.diag(H)) + rp1, g(H) - Rc_s + rp2, [-re]])
            sol = linalg.lu_solve(lu, rhs)
            if not np.all(np.isfinite(sol)):
                raise SdpSolverError("non-finite Newton direction")
            dy, dmu, dalpha = sol[:Q], sol[Q:n], sol[n]
            dZ = _herm(np.diag(dy) - a_adj(dmu) + Rd)
            dW = _herm(Rc_W - T(dZ))
            ds = Rc_s - D * dmu
            return dW, dalpha, ds, dy, dmu, dZ

        try:
            dW, dal, ds, dy, dmu, dZ = direction(-W, -s)
            ap = min(1.0, _max_step(W, dW), _max_step_vec(s, ds))
            ad = min(1.0, _max_step(Z, dZ), _max_step_vec(mu, dmu))
            nu_aff = (
                float(np.real(np.vdot(W + ap * dW, Z + ad * dZ)))
                + float((mu + ad * dmu) @ (s + ap * ds))
            ) / n
            sigma = min(1.0, max(0.0, nu_aff / nu)) ** 3
            Rc_W = sigma * nu * Zinv - W - _herm(dW @ dZ @ Zinv)
            Rc_s = (sigma * nu - mu * s - dmu * ds) / mu
            dW, dal, ds, dy, dmu, dZ = direction(Rc_W, Rc_s)
            tau = 0.98 if it < 5 else 0.995
            ap = min(1.0, tau * _max_step(W, dW), tau * _max_step_vec(s, ds))
            ad = min(1.0, tau * _max_step(Z, dZ), tau * _max_step_vec(mu, dmu))
            if min(ap, ad) < SHORT_STEP:
                # off-center iterate: a plain centering direction without the
                # second-order term usually allows a much longer step
                sig_c = max(sigma, CENTERING_SIGMA)
                cand = direction(sig_c * nu * Zinv - W, (sig_c * nu - mu * s) / mu)
                ap_c = min(1.0, tau * _max_step(W, cand[0]), tau * _max_step_vec(s, cand[2]))
                ad_c = min(1.0, tau * _max_step(Z, cand[5]), tau * _max_step_vec(mu, cand[4]))
                if min(ap_c, ad_c) > min(ap, ad):
                    dW, dal, ds, dy, dmu, dZ = cand
                    ap, ad = ap_c, ad_c
        except SdpSolverError:
            status = "breakdown"
            break
        if not np.isfinite(ap * ad) or ap * ad == 0.0:
            status = "stalled"
            break

        W = _herm(W + ap * dW)
        s = s + ap * ds
        alpha = alpha + ap * dal
        Z = _herm(Z + ad * dZ)
        mu = mu + ad * dmu
        y = y + ad * dy

    if status != "optimal":
        # usable if close enough; callers certify the point anyway
        if gap < 1e-6 and pinf < 1e-6 and dinf < 1e-6:
            status = "inaccurate"
        else:
            raise SdpSolverError(
                f"interior point failed ({status}): gap={gap:.2e} pinf={pinf:.2e} dinf={dinf:.2e}"
            )
    logger.debug("sdp: %s after %d iterations, gap %.2e", status, it, gap)
    return SdpSolution(
        W=W,
        alpha=alpha * scale,
        objective=(alpha + float(np.real(np.vdot(C, W)))) * scale,
        status=status,
        iterations=it,
        gap=gap,
        primal_infeasibility=pinf,
        dual_infeasibility=dinf,
        y=y * scale,
        mu=mu,
    )
