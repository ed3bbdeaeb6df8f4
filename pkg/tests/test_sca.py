import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irs_codebook.array_model import IrsGeometry, gain_pattern, response_grid, steering_vector
from irs_codebook.codebook import CodebookError, DesignOptions, generate_codebook, shift_codeword
from irs_codebook.grid import SampleSet, build_grid, sample_interval
from irs_codebook import sca as sca_mod
from irs_codebook.sca import (
    CertificateError,
    DesignError,
    ScaConfig,
    certify,
    codeword_gains,
    constraint_matrices,
    gain_vectors,
    lifted_gains,
    penalized_objective,
    random_rank_one,
    rank_one_recovery,
    rank_residual,
    sca_design,
    solve_convex_subproblem,
    spectral_norm,
    taylor_spectral_lower_bound,
)
from irs_codebook.sdp import solve_unit_diagonal_sdp


def _random_psd(rng, n, rank=None):
    rank = rank or n
    X = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    return X @ X.conj().T


def test_config_defaults_and_validation():
    cfg = ScaConfig().resolved(10)
    assert cfg.eta_init == pytest.approx(1e-6 * 100)
    assert cfg.eta_max == pytest.approx(1e3 * 100)
    assert cfg.tol_rank == pytest.approx(1e-4)
    assert cfg.i_max == 25
    for bad in (dict(eta_init=0.0), dict(eta_growth=1.0), dict(i_max=0), dict(eta_init=2.0, eta_max=1.0)):
        with pytest.raises(ValueError):
            ScaConfig(**bad)


def test_constraint_matrices_examples():
    g = IrsGeometry(2, 2)
    A = constraint_matrices(g, SampleSet([0.0], [0.0]))
    assert np.allclose(A[0], np.ones((4, 4)))
    g = IrsGeometry(4, 1)
    A = constraint_matrices(g, SampleSet([0.5], [0.0]))[0]
    q = np.arange(4)
    oracle = np.exp(1j * np.pi * 0.5 * (q[:, None] - q[None, :]))
    assert np.allclose(A, oracle, atol=1e-14)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.floats(-2, 2), st.floats(-2, 2))
def test_constraint_matrices_rank_one_unit_modulus(qy, qz, by, bz):
    g = IrsGeometry(qy, qz)
    A = constraint_matrices(g, SampleSet([by], [bz]))[0]
    assert np.allclose(np.abs(A), 1.0, atol=1e-12)
    assert np.trace(A).real == pytest.approx(g.n_elements)
    vals = np.linalg.eigvalsh(A)
    assert np.sum(vals > 1e-9 * g.n_elements) == 1


def test_lifted_gain_matches_codeword_gain():
    g = IrsGeometry(3, 3)
    s = SampleSet.from_intervals((-0.3, 0.2), (0.1, 0.5), 3, 3)
    ph = np.random.default_rng(3).uniform(0, 6, 9)
    w = np.exp(1j * ph)
    assert np.allclose(lifted_gains(gain_vectors(g, s), np.outer(w, w.conj())), codeword_gains(g, ph, s))


def test_taylor_bound_examples():
    rng = np.random.default_rng(0)
    W = _random_psd(rng, 5)
    assert taylor_spectral_lower_bound(W, W) == pytest.approx(spectral_norm(W), rel=1e-12)
    target = np.diag([3.0, 1.0]).astype(complex)
    for vec in (np.array([1.0, 0.0]), np.array([0.0, 1.0])):
        bound = 1.0 + vec @ (target - np.eye(2)) @ vec
        assert bound <= 3.0
    assert taylor_spectral_lower_bound(np.eye(2), target) <= 3.0 + 1e-12


@pytest.mark.filterwarnings("ignore::UserWarning")
def test_sdp_matches_cvxpy():
    cp = pytest.importorskip("cvxpy")
    rng = np.random.default_rng(5)
    g = IrsGeometry(2, 3)
    s = SampleSet.from_intervals((-0.4, 0.1), (0.0, 0.6), 3, 2)
    V = gain_vectors(g, s)
    C = 0.3 * _random_psd(rng, 6, 1)
    sol = solve_unit_diagonal_sdp(V, C, tol=1e-10)
    X = cp.Variable((6, 6), hermitian=True)
    a = cp.Variable()
    cons = [X >> 0, cp.diag(X) == 1] + [cp.real(cp.quad_form(v, X)) >= a for v in V]
    prob = cp.Problem(cp.Maximize(a + cp.real(cp.trace(C @ X))), cons)
    prob.solve(solver=cp.CLARABEL if "CLARABEL" in cp.installed_solvers() else None)
    assert sol.objective == pytest.approx(prob.value, rel=1e-5, abs=1e-6)


def test_subproblem_single_point_reaches_q_squared():
    g = IrsGeometry(4, 4)
    V = gain_vectors(g, SampleSet([0.31], [-0.44]))
    W0 = random_rank_one(16, np.random.default_rng(1))
    W, alpha, status = solve_convex_subproblem(V, W0, 0.0)
    assert alpha >= 0.999 * 256
    assert status in ("optimal", "inaccurate")


def test_subproblem_q1():
    V = gain_vectors(IrsGeometry(1, 1), SampleSet([0.2, 0.7], [0.1]))
    W, alpha, status = solve_convex_subproblem(V, np.ones((1, 1)), 1.0)
    assert W.shape == (1, 1) and alpha == pytest.approx(1.0) and status == "trivial"


def test_subproblem_large_penalty_keeps_rank_one():
    g = IrsGeometry(4, 4)
    V = gain_vectors(g, SampleSet.from_intervals((-0.2, 0.2), (-0.2, 0.2), 3, 3))
    W0 = random_rank_one(16, np.random.default_rng(2))
    W, _, _ = solve_convex_subproblem(V, W0, 1e6)
    assert rank_residual(W) <= 1e-4


def test_certificate_rejects_bad_points():
    V = gain_vectors(IrsGeometry(2, 1), SampleSet([0.0], [0.0]))
    good = np.ones((2, 2), complex)
    certify(good, 4.0, V)
    with pytest.raises(CertificateError):
        certify(np.array([[1, 2], [2, 1]], complex), 0.0, V)  # indefinite
    with pytest.raises(CertificateError):
        certify(np.eye(2) * 1.1, 0.0, V)  # diagonal off
    with pytest.raises(CertificateError):
        certify(np.eye(2, dtype=complex), 3.0, V)  # gain 2 < alpha 3


def test_rank_one_recovery_exact():
    rng = np.random.default_rng(4)
    a = np.exp(1j * rng.uniform(0, 6, 7))
    ph = rank_one_recovery(np.outer(a, a.conj()))
    expected = np.mod(np.angle(a) - np.angle(a[0]), 2 * np.pi)
    assert ph[0] == 0.0
    assert np.allclose(np.exp(1j * ph), np.exp(1j * expected), atol=1e-12)


def test_rank_one_recovery_degenerate_identity():
    ph = rank_one_recovery(np.eye(2, dtype=complex))
    assert ph[0] == 0.0 and ph.shape == (2,) and np.all(np.isfinite(ph))


def test_rank_one_recovery_perturbed():
    rng = np.random.default_rng(7)
    Q = 16
    for _ in range(20):
        a = np.exp(1j * rng.uniform(0, 2 * np.pi, Q))
        b = np.exp(1j * rng.uniform(0, 2 * np.pi, Q))
        if abs(np.vdot(a, b)) / Q > 0.3:
            continue
        ph = rank_one_recovery(0.9 * np.outer(a, a.conj()) + 0.1 * np.outer(b, b.conj()))
        ref = np.angle(a) - np.angle(a[0])
        err = np.angle(np.exp(1j * (ph - ref)))
        assert np.max(np.abs(err)) <= 0.2


def test_point_target_design():
    g = IrsGeometry(4, 4)
    cw, rep = sca_design(g, SampleSet([0.3], [-0.2]))
    assert cw.achieved_alpha >= 0.99 * 256
    assert cw.phases[0] == 0.0
    assert len(rep.objective_trace) == rep.iterations == len(rep.rank_residual_trace)


def test_q1_design():
    cw, rep = sca_design(IrsGeometry(1, 1), SampleSet([0.1, 0.4], [0.2]))
    assert list(cw.phases) == [0.0] and cw.achieved_alpha == pytest.approx(1.0)


def test_full_period_interval_hits_parseval_bound():
    # 5x5 samples over [-1, 1]^2 alias onto the 16 orthogonal DFT beams of a
    # 4x4 half-wavelength array, so no codeword can exceed 16 everywhere.
    g = IrsGeometry(4, 4)
    s = sample_interval(build_grid(g, 1, 1), 0, 0)
    cw, _ = sca_design(g, s)
    assert cw.achieved_alpha <= 16 + 1e-9
    assert cw.achieved_alpha >= 0.99 * 16


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_symmetric_interval_gives_symmetric_pattern(seed):
    g = IrsGeometry(4, 4)
    s = SampleSet.from_intervals((-0.25, 0.25), (-0.25, 0.25), 5, 5)
    cw, _ = sca_design(g, s, ScaConfig(rng_seed=seed))
    b = np.linspace(-1, 1, 41)
    G = np.abs(response_grid(g, cw, b, b))
    assert np.max(np.abs(G - G[::-1, ::-1])) <= 1e-3 * G.max()


def test_design_traces_and_properties():
    g = IrsGeometry(4, 4)
    s = SampleSet.from_intervals((0.1, 0.4), (-0.3, 0.0), 4, 4)
    cw, rep = sca_design(g, s, ScaConfig(rng_seed=3))
    cfg = ScaConfig().resolved(16)
    assert rep.iterations == len(rep.eta_trace) == len(rep.subproblem_status)
    assert all(r >= -1e-8 for r in rep.rank_residual_trace)
    for before, after in zip(rep.start_objective_trace, rep.objective_trace):
        assert after >= before - 1e-6 * max(1.0, abs(before))
    assert rep.converged and rep.rank_residual_trace[-1] <= cfg.tol_rank
    assert cw.achieved_alpha == pytest.approx(codeword_gains(g, cw.phases, s).min())
    assert cw.achieved_alpha >= 0.85 * rep.sdp_alpha
    assert not rep.relaxation_gap_flag


def test_penalized_objective_of_rank_one_is_gain():
    g = IrsGeometry(3, 2)
    s = SampleSet([0.2, 0.3], [0.1])
    w = np.exp(1j * np.arange(6))
    V = gain_vectors(g, s)
    W = np.outer(w, w.conj())
    assert penalized_objective(W, V, 100.0) == pytest.approx(lifted_gains(V, W).min(), abs=1e-8)


def test_failed_subproblems_raise_design_error(monkeypatch):
    def boom(*a, **k):
        raise sca_mod.SdpSolverError("forced")

    monkeypatch.setattr(sca_mod, "solve_unit_diagonal_sdp", boom)
    with pytest.raises(DesignError) as info:
        sca_design(IrsGeometry(2, 2), SampleSet([0.0], [0.0]))
    assert info.value.report.subproblem_status == ["failed: SdpSolverError"]


def test_restarts_keep_best():
    g = IrsGeometry(3, 3)
    s = SampleSet.from_intervals((-0.3, 0.3), (0.0, 0.4), 3, 3)
    one, _ = sca_design(g, s, ScaConfig(rng_seed=1, restarts=1))
    three, rep = sca_design(g, s, ScaConfig(rng_seed=1, restarts=3))
    assert three.achieved_alpha >= one.achieved_alpha - 1e-9
    assert 0 <= rep.restart < 3


def test_codebook_m1_equals_single_design():
    g = IrsGeometry(3, 3)
    grid = build_grid(g, 1, 1, 3, 3)
    cb = generate_codebook(g, grid, "continuous", DesignOptions(sca=ScaConfig(rng_seed=4)))
    cw, _ = sca_design(g, sample_interval(grid, 0, 0), ScaConfig(rng_seed=4))
    assert cb.size == 1 and np.array_equal(cb.codewords[0].phases, cw.phases)


def test_codebook_order_and_determinism():
    g = IrsGeometry(2, 3)
    grid = build_grid(g, 2, 2, 3, 3)
    a = generate_codebook(g, grid, "continuous")
    b = generate_codebook(g, grid, "continuous", jobs=2)
    assert a.indices == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert np.array_equal(a.phase_matrix(), b.phase_matrix())


def test_partial_codebook_rejected(monkeypatch):
    import irs_codebook.codebook as cb_mod

    real = cb_mod.sca_design
    calls = {"n": 0}

    def flaky(geom, samples, cfg=None, **kw):
        calls["n"] += 1
        if calls["n"] == 2:
            raise DesignError("forced failure")
        return real(geom, samples, cfg, **kw)

    monkeypatch.setattr(cb_mod, "sca_design", flaky)
    g = IrsGeometry(2, 2)
    with pytest.raises(CodebookError) as info:
        generate_codebook(g, build_grid(g, 1, 2, 2, 2), "continuous")
    assert list(info.value.failures) == [(0, 1)]


def test_template_shift_translates_pattern():
    g = IrsGeometry(3, 4)
    ph = np.random.default_rng(2).uniform(0, 6, 12)
    moved = shift_codeword(g, ph, 0.3, -0.2)
    b = np.linspace(-0.5, 0.5, 9)
    assert np.allclose(gain_pattern(g, moved, b + 0.3, b - 0.2), gain_pattern(g, ph, b, b), atol=1e-9)


def test_template_codebook_matches_sampled_gains():
    g = IrsGeometry(3, 3)
    grid = build_grid(g, 3, 3, 3, 3)
    cb = generate_codebook(g, grid, "continuous", DesignOptions(reuse_template=True))
    alphas = [cw.achieved_alpha for cw in cb.codewords]
    assert np.allclose(alphas, alphas[0], rtol=1e-9)
    for idx, cw in zip(cb.indices, cb.codewords):
        assert cw.achieved_alpha == pytest.approx(codeword_gains(g, cw.phases, sample_interval(grid, *idx)).min())
