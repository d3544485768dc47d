import numpy as np
import pytest

from platoonsim import ConvergenceError, DomainError, expm, lambert_w, log_norm, spectral_norm, sym_eigvals

from _oracles import eigvalsh_max, svd_norm


def _random_matrices(count, max_dim=12, scale=1.0, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(1, max_dim + 1))
        yield rng.standard_normal((n, n)) * scale


# ------------------------------------------------------------------- expm

def test_expm_zero_dt_is_identity():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((7, 7))
    assert np.array_equal(expm(a, 0.0), np.eye(7))


def test_expm_diagonal():
    d = np.array([-1.0, 0.0, 0.5, 2.0])
    got = expm(np.diag(d), 0.7)
    np.testing.assert_allclose(got, np.diag(np.exp(d * 0.7)), rtol=1e-14, atol=1e-15)


def test_expm_nilpotent():
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    for t in (0.3, 1.0, 7.5):
        got = expm(a, t)
        np.testing.assert_allclose(got, [[1.0, t], [0.0, 1.0]], rtol=0, atol=1e-12)


def test_expm_semigroup():
    rng = np.random.default_rng(2)
    for a in _random_matrices(20, max_dim=10, scale=0.8, seed=3):
        s, t = rng.uniform(0.0, 1.0, size=2)
        whole = expm(a, s + t)
        split = expm(a, s) @ expm(a, t)
        assert np.linalg.norm(whole - split) <= 1e-9 * max(np.linalg.norm(whole), 1.0)


def test_expm_matches_scipy():
    import scipy.linalg

    for a in _random_matrices(15, max_dim=12, scale=1.5, seed=4):
        for dt in (0.05, 1.0, 3.0):
            got = expm(a, dt)
            want = scipy.linalg.expm(a * dt)
            np.testing.assert_allclose(got, want, rtol=1e-11, atol=1e-13)


def test_expm_growth_bounds():
    # both one-sided growth bounds that the step rules lean on
    for a in _random_matrices(15, max_dim=9, scale=1.2, seed=5):
        for t in (0.1, 0.6, 1.3):
            grown = svd_norm(expm(a, t))
            assert grown <= np.exp(spectral_norm(a) * t) * (1.0 + 1e-9)
            assert grown <= np.exp(log_norm(a) * t) * (1.0 + 1e-9)


# ------------------------------------------------------ norms and eigvals

def test_spectral_norm_trivial():
    assert spectral_norm(np.zeros((4, 4))) == 0.0
    assert spectral_norm(np.eye(5)) == pytest.approx(1.0, abs=1e-13)
    assert spectral_norm(np.diag([-1.0, -2.0])) == pytest.approx(2.0, abs=1e-13)


def test_spectral_norm_matches_svd():
    for a in _random_matrices(25, max_dim=14, scale=2.0, seed=6):
        assert spectral_norm(a) == pytest.approx(svd_norm(a), rel=1e-10, abs=1e-12)


def test_spectral_norm_clustered_spectrum(v_mats):
    # the platoon system matrix has a tightly clustered top of the Gram
    # spectrum; plain power iteration stalls there and the escalation path
    # must still deliver full precision
    a = v_mats.A_c
    assert spectral_norm(a) == pytest.approx(svd_norm(a), rel=1e-10)


def test_sym_eigvals_matches_eigvalsh():
    rng = np.random.default_rng(7)
    for n in (1, 2, 3, 6, 13, 31):
        m = rng.standard_normal((n, n))
        s = (m + m.T) / 2.0
        np.testing.assert_allclose(sym_eigvals(s), np.linalg.eigvalsh(s), rtol=1e-10, atol=1e-10)


def test_sym_eigvals_degenerate():
    np.testing.assert_allclose(sym_eigvals(np.eye(6) * 3.0), np.full(6, 3.0), rtol=0, atol=1e-13)


def test_log_norm_examples():
    assert log_norm(np.array([[0.0, 2.0], [0.0, 0.0]])) == pytest.approx(1.0, abs=1e-13)
    assert log_norm(np.diag([-1.0, -2.0])) == pytest.approx(-1.0, abs=1e-13)


def test_log_norm_matches_eigvalsh():
    for a in _random_matrices(20, max_dim=12, scale=1.5, seed=8):
        assert log_norm(a) == pytest.approx(eigvalsh_max(a), rel=1e-10, abs=1e-12)


def test_log_norm_bounded_by_spectral_norm():
    # mu(A) <= ||A|| always; the reverse inequality is false in general and
    # deliberately not asserted anywhere
    for a in _random_matrices(20, max_dim=10, scale=1.5, seed=9):
        assert log_norm(a) <= spectral_norm(a) + 1e-10


# -------------------------------------------------------------- lambert_w

def test_lambert_point_values():
    assert lambert_w(0.0) == 0.0
    assert lambert_w(float(np.e)) == pytest.approx(1.0, abs=1e-12)
    assert lambert_w(-1.0 / np.e) == pytest.approx(-1.0, abs=1e-7)
    assert lambert_w(-1.0 / np.e, branch="minus_one") == pytest.approx(-1.0, abs=1e-7)


def test_lambert_principal_residual_grid():
    xs = np.concatenate(
        [
            -np.exp(-1.0) * np.logspace(0.0, -12.0, 5000),
            np.logspace(-12.0, 8.0, 5000),
        ]
    )
    for x in xs:
        w = lambert_w(x)
        assert w >= -1.0 - 1e-9
        assert abs(w * np.exp(w) - x) <= 1e-12 * max(abs(x), 1e-300)


def test_lambert_minus_one_residual_grid():
    xs = -np.exp(-1.0) * np.logspace(0.0, -250.0, 10000)
    for x in xs:
        w = lambert_w(x, branch="minus_one")
        assert w <= -1.0 + 1e-9
        assert abs(w * np.exp(w) - x) <= 1e-12 * abs(x)


def test_lambert_branch_point_series():
    # just off the branch point both branches continue smoothly
    for eps in (1e-14, 1e-10, 1e-8):
        x = -np.exp(-1.0) * (1.0 - eps)
        w0 = lambert_w(x)
        w1 = lambert_w(x, branch="minus_one")
        assert w0 >= -1.0 >= w1
        assert abs(w0 * np.exp(w0) - x) <= 1e-12 * abs(x)
        assert abs(w1 * np.exp(w1) - x) <= 1e-12 * abs(x)


def test_lambert_domain_errors():
    with pytest.raises(DomainError):
        lambert_w(-1.0 / np.e - 1e-6)
    with pytest.raises(DomainError):
        lambert_w(-1.0 / np.e - 1e-6, branch="minus_one")
    with pytest.raises(DomainError):
        lambert_w(0.1, branch="minus_one")
    with pytest.raises(DomainError):
        lambert_w(1.0, branch="no_such_branch")


# ---------------------------------------------------------------- errors

def test_dimension_checks():
    from platoonsim import DimensionError

    with pytest.raises(DimensionError):
        expm(np.zeros((2, 3)))
    with pytest.raises(DimensionError):
        spectral_norm(np.zeros(4))
    with pytest.raises(DimensionError):
        sym_eigvals(np.zeros((3, 2)))


def test_jacobi_sweep_limit_raises():
    rng = np.random.default_rng(10)
    m = rng.standard_normal((8, 8))
    with pytest.raises(ConvergenceError):
        sym_eigvals((m + m.T) / 2.0, max_sweeps=1)
