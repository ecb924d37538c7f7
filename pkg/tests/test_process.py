import math

import numpy as np
import pytest

from dynstrat import ReturnProcess, ValidationError, acf_toeplitz, arma_acf, simulate_returns


def test_white_noise_acf():
    p = ReturnProcess()
    assert p.kind == "white-noise"
    assert p.acf(0) == 1.0
    assert p.acf(1) == 0.0
    assert p.acf(-3) == 0.0


def test_ar1_acf_geometric():
    a = 0.6
    p = ReturnProcess(ar=(a,))
    for k in range(6):
        assert p.acf(k) == pytest.approx(a ** k, abs=1e-12)
    assert p.acf(-2) == p.acf(2)


def test_ma1_acf():
    # c(1) = theta / (1 + theta^2), zero beyond; reference 0.5/1.25 = 0.4
    p = ReturnProcess(ma=(0.5,))
    assert p.acf(1) == pytest.approx(0.4, abs=1e-14)
    assert p.acf(2) == 0.0
    assert p.acf(5) == 0.0


def test_arma11_acf_matches_direct_recursion():
    # for ARMA(1,1): c(k) = a c(k-1) for k >= 2
    p = ReturnProcess(ar=(0.5,), ma=(0.3,))
    c1 = p.acf(1)
    for k in range(2, 8):
        assert p.acf(k) == pytest.approx(0.5 * p.acf(k - 1), abs=1e-12)
    assert 0 < c1 < 1


def test_nonstationary_rejected():
    with pytest.raises(ValidationError):
        ReturnProcess(ar=(1.0,))
    with pytest.raises(ValidationError):
        ReturnProcess(ar=(0.5, 0.6))
    with pytest.raises(ValidationError):
        arma_acf((1.2,), (), 5)


def test_bad_sigma_rejected():
    with pytest.raises(ValidationError):
        ReturnProcess(sigma=0.0)
    with pytest.raises(ValidationError):
        ReturnProcess(sigma=-1.0)


def test_toeplitz_structure():
    p = ReturnProcess(ar=(0.5,))
    c = acf_toeplitz(p, 4)
    assert c.shape == (4, 4)
    assert np.allclose(c, c.T)
    assert np.allclose(np.diag(c), 1.0)
    assert c[0, 3] == pytest.approx(0.5 ** 3)
    # ACF matrices of stationary processes are positive semi-definite
    assert np.linalg.eigvalsh(c).min() > 0


def test_wold_ar1():
    psi = ReturnProcess(ar=(0.7,)).wold()
    assert psi[0] == 1.0
    assert psi[3] == pytest.approx(0.7 ** 3)
    assert abs(psi[-1]) < 1e-13


def test_simulation_deterministic_and_calibrated():
    p = ReturnProcess(sigma=2.0, ar=(0.5,))
    r1 = simulate_returns(p, 500, seed=42)
    r2 = simulate_returns(p, 500, seed=42)
    np.testing.assert_array_equal(r1, r2)
    r3 = simulate_returns(p, 500, seed=43)
    assert not np.array_equal(r1, r3)

    long = simulate_returns(p, 400_000, seed=1)
    # marginal std sigma=2 and lag-1 autocorr 0.5 within sampling error
    assert long.std() == pytest.approx(2.0, rel=0.02)
    ac1 = np.corrcoef(long[1:], long[:-1])[0, 1]
    assert ac1 == pytest.approx(0.5, abs=0.02)


def test_json_round_trip():
    p = ReturnProcess(sigma=1.5, ar=(0.4, -0.2), ma=(0.1,))
    q = ReturnProcess.from_json(p.to_json())
    assert q == p
    assert q.kind == "arma"
