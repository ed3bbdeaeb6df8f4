import numpy as np
import pytest

from irs_codebook.array_model import IrsGeometry, gain_pattern, response
from irs_codebook.baselines import QuadraticProfileConfig, linear_codeword, quadratic_codeword


def _half_power_width(pattern, beta):
    above = beta[pattern >= pattern.max() / 2]
    return above.max() - above.min()


def test_linear_examples():
    g = IrsGeometry(4, 3)
    assert np.all(linear_codeword(g, (0.0, 0.0)).phases == 0.0)
    cw = linear_codeword(g, (0.3, -0.45))
    assert abs(response(g, cw, 0.3, -0.45)) ** 2 == pytest.approx(144.0, rel=1e-12)


def test_quadratic_zero_chirp_is_linear():
    g = IrsGeometry(5, 4)
    iv = ((0.1, 0.3), (-0.2, 0.2))
    q = quadratic_codeword(g, iv, QuadraticProfileConfig(0.0, 0.0))
    lin = linear_codeword(g, (0.2, 0.0))
    assert np.allclose(np.exp(1j * q.phases), np.exp(1j * lin.phases), atol=1e-12)


def test_quadratic_widens_beam():
    g = IrsGeometry(16, 1)
    iv = ((-0.15, 0.15), (-1.0, 1.0))
    beta = np.linspace(-1, 1, 4001)
    lin = gain_pattern(g, linear_codeword(g, (0.0, 0.0)), beta, [0.0])[:, 0]
    quad = gain_pattern(g, quadratic_codeword(g, iv), beta, [0.0])[:, 0]
    assert _half_power_width(quad, beta) >= _half_power_width(lin, beta)
    assert quad.max() < lin.max()


def test_auto_chirp_degenerates_for_single_element_axis():
    g = IrsGeometry(1, 6)
    cw = quadratic_codeword(g, ((-0.2, 0.2), (-0.2, 0.2)))
    assert cw.meta["c_y"] == 0.0 and cw.meta["c_z"] > 0


def test_config_validation():
    with pytest.raises(ValueError):
        QuadraticProfileConfig("big", 0.0)
    with pytest.raises(ValueError):
        QuadraticProfileConfig(np.inf, 0.0)


@pytest.mark.parametrize("maker", ["linear", "quadratic"])
def test_baselines_are_separable(maker):
    g = IrsGeometry(4, 5)
    cw = linear_codeword(g, (0.2, -0.1)) if maker == "linear" else quadratic_codeword(g, ((0.1, 0.3), (-0.3, 0.1)))
    W = cw.weights.reshape(4, 5)
    # rank one in the (q_y, q_z) layout means w = w_y kron w_z
    s = np.linalg.svd(W, compute_uv=False)
    assert s[1] <= 1e-10 * s[0]
    assert np.allclose(np.abs(cw.weights), 1.0, atol=1e-15)
