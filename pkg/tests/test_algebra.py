import numpy as np
import pytest

from talg import Algebra, ConfigError, Domain, TScalar, partial_le, tmul
from talg.algebra import dct_matrix, dft_matrix

from oracles import circular_convolution, spectrum, transform_matrix


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def test_delta_transforms_to_ones():
    alg = Algebra((3, 3))
    delta = np.zeros((3, 3))
    delta[0, 0] = 1
    np.testing.assert_allclose(TScalar(alg, delta).spectral().data, np.ones((3, 3)))
    np.testing.assert_allclose(alg.identity().spatial().data, delta, atol=1e-15)


def test_length_two_dft_by_hand():
    alg = Algebra((2,))
    x = TScalar(alg, [1, 2])
    np.testing.assert_allclose(x.spectral().data, [3, -1], atol=1e-15)
    back = TScalar(alg, [3, -1], Domain.SPECTRAL).spatial().data
    np.testing.assert_allclose(back, [1, 2], atol=1e-15)


def test_length_two_product_by_hand():
    alg = Algebra((2,))
    out = tmul(TScalar(alg, [1, 2]), TScalar(alg, [3, 4])).spatial().data
    np.testing.assert_allclose(out, [11, 10], atol=1e-14)


def test_zero_transforms_to_zero():
    np.testing.assert_array_equal(Algebra((2, 3)).zero().spatial().data, 0)


def test_round_trip(rng):
    alg = Algebra((3, 3))
    worst = 0.0
    for _ in range(100):
        x = alg.random(rng)
        err = np.abs(x.spectral().spatial().data - x.data).max() / np.abs(x.data).max()
        worst = max(worst, err)
    assert worst < 1e-12


@pytest.mark.parametrize("kind", ["dft", "dct", "dct-ortho"])
def test_forward_matches_dense_kronecker(kind, rng):
    alg = Algebra((2, 3), kind)
    x = alg.random(rng)
    np.testing.assert_allclose(x.spectral().data, spectrum(x.data, alg.matrices), atol=1e-12)


def test_literal_dct_entries():
    w = dct_matrix(4)
    for a in range(4):
        for b in range(4):
            assert w[a, b] == pytest.approx(np.cos(np.pi / 4 * a * (b + 0.5)))
    assert not np.allclose(w @ w.conj().T, np.eye(4))
    o = dct_matrix(4, orthonormal=True)
    np.testing.assert_allclose(o @ o.conj().T, np.eye(4), atol=1e-14)


def test_dft_entries():
    w = dft_matrix(3)
    assert w[1, 2] == pytest.approx(np.exp(-2j * np.pi * 2 / 3))


@pytest.mark.parametrize("shape", [(2,), (3, 3), (2, 2, 2)])
def test_tmul_is_circular_convolution(shape, rng):
    alg = Algebra(shape)
    for _ in range(5):
        x, y = alg.random(rng), alg.random(rng)
        ref = circular_convolution(x.data, y.data)
        np.testing.assert_allclose(tmul(x, y).spatial().data, ref, rtol=1e-12, atol=1e-12)


def test_identity_and_annihilator(rng):
    alg = Algebra((3, 2))
    x = alg.random(rng)
    assert alg.identity() * x == x
    assert (alg.zero() * x).allclose(alg.zero())
    assert (x + alg.zero()) == x
    assert (0 * x).allclose(alg.zero())


def test_linearity_of_transform(rng):
    alg = Algebra((3, 3), "dct")
    x, y = alg.random(rng), alg.random(rng)
    a, b = 1.5 - 2j, -0.25j
    lhs = (x.scale(a) + y.scale(b)).spectral().data
    rhs = a * x.spectral().data + b * y.spectral().data
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_mixed_domain_addition(rng):
    alg = Algebra((2, 2))
    x = alg.random(rng)
    y = alg.random(rng).spectral()
    np.testing.assert_allclose((x + y).spatial().data, x.data + y.spatial().data, atol=1e-14)


def test_conjugation(rng):
    alg = Algebra((3, 3))
    assert alg.identity().conj() == alg.identity()
    for _ in range(50):
        x = alg.random(rng)
        assert (x * x.conj()).is_nonnegative()
        assert x.conj().conj() == x
    a = 2 - 3j
    assert alg.inception(a).conj() == alg.inception(np.conj(a))


def test_modulus(rng):
    alg = Algebra((2, 3))
    assert alg.zero().modulus().allclose(alg.zero())
    assert alg.inception(3 - 4j).modulus() == alg.inception(5)
    for _ in range(50):
        x, y = alg.random(rng), alg.random(rng)
        assert (x * y).modulus().allclose(x.modulus() * y.modulus(), rtol=1e-12)
        assert x.modulus().is_nonnegative()
        assert (x.modulus() * x.modulus()).allclose(x * x.conj(), rtol=1e-12, atol=1e-12)


def test_trace_and_norm(rng):
    alg = Algebra((2, 3))
    assert alg.identity().trace() == pytest.approx(6)
    assert alg.zero().frob_norm() == 0
    x = alg.random(rng)
    assert x.trace() == pytest.approx(spectrum(x.data, alg.matrices).sum())


def test_dct_norm_differs_from_spatial_norm(rng):
    alg = Algebra((3, 3), "dct")
    x = alg.random(rng)
    dense = transform_matrix(alg.matrices) @ x.data.ravel()
    assert x.frob_norm() == pytest.approx(np.linalg.norm(dense), rel=1e-12)
    assert abs(x.frob_norm() - np.linalg.norm(x.data)) > 1e-3
    ortho = Algebra((3, 3), "dct-ortho")
    y = TScalar(ortho, x.data)
    assert y.frob_norm() == pytest.approx(np.linalg.norm(x.data), rel=1e-12)


def test_partial_order(rng):
    alg = Algebra((2,))
    x = alg.random(rng)
    assert partial_le(alg.zero(), x.modulus())
    assert x.modulus() <= x.modulus()
    a = TScalar(alg, [1, 0], Domain.SPECTRAL)
    b = TScalar(alg, [0, 1], Domain.SPECTRAL)
    assert not a <= b and not b <= a
    with pytest.raises(ConfigError):
        partial_le(TScalar(alg, [1j, 0], Domain.SPECTRAL), a)


def test_eigenvalues_match_dense_operator(rng):
    alg = Algebra((2, 2))
    for _ in range(5):
        x = alg.random(rng)
        # multiplication by x as a dense 4x4 operator on spatial vectors
        op = np.stack([tmul(x, TScalar(alg, e.reshape(2, 2))).spatial().data.ravel()
                       for e in np.eye(4)], axis=1)
        got = np.sort_complex(x.eigenvalues())
        want = np.sort_complex(np.linalg.eigvals(op))
        np.testing.assert_allclose(got, want, atol=1e-12)
        np.testing.assert_allclose(np.diag(x.matrix()), x.eigenvalues())
    assert np.allclose(alg.identity().eigenvalues(), 1)
    assert np.allclose(alg.inception(2j).eigenvalues(), 2j)


def test_eigenvalue_order_is_row_major():
    alg = Algebra((2, 3))
    spec = np.arange(6).reshape(2, 3).astype(complex)
    np.testing.assert_array_equal(TScalar(alg, spec, Domain.SPECTRAL).eigenvalues(), np.arange(6))


def test_inception_subalgebra():
    alg = Algebra((3, 3))
    a, b = 1 + 2j, -0.5 + 1j
    assert alg.inception(a) * alg.inception(b) == alg.inception(a * b)
    assert alg.inception(a) + alg.inception(b) == alg.inception(a + b)


def test_degenerate_algebra_is_complex_field():
    for alg in (Algebra(()), Algebra((1, 1))):
        assert alg.degenerate
        x, y = TScalar(alg, np.full(alg.shape, 2 + 1j)), TScalar(alg, np.full(alg.shape, -3j))
        assert complex((x * y).spatial().data.ravel()[0]) == (2 + 1j) * (-3j)


def test_bad_configs():
    with pytest.raises(ConfigError):
        Algebra((0,))
    with pytest.raises(ConfigError):
        Algebra((2,), "wavelet")
    with pytest.raises(ConfigError):
        Algebra((2,), matrices=[np.ones((2, 2))])
    with pytest.raises(ConfigError):
        TScalar(Algebra((2,)), np.zeros(3))
    with pytest.raises(ConfigError):
        tmul(Algebra((2,)).identity(), Algebra((3,)).identity())


def test_custom_matrices(rng):
    w = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    alg = Algebra((3,), matrices=[w])
    x, y = alg.random(rng), alg.random(rng)
    np.testing.assert_allclose(tmul(x, y).spectral().data, (w @ x.data) * (w @ y.data), rtol=1e-10)


def test_values_are_read_only(rng):
    x = Algebra((2,)).random(rng)
    with pytest.raises(ValueError):
        x.data[0] = 1
