import numpy as np
import pytest

from talg import (
    FULL,
    Algebra,
    ConfigError,
    NeighborhoodSpec,
    PcaSpec,
    Variant,
    center_samples,
    pca_approximate,
    pca_refine,
)

from oracles import covariance_pca, psnr


@pytest.fixture
def rng():
    return np.random.default_rng(31)


@pytest.fixture
def samples(rng):
    return [rng.uniform(0, 255, (6, 5, 3)) for _ in range(12)]


def test_center_samples(rng):
    stack, mean = center_samples([rng.standard_normal((3, 4))])
    np.testing.assert_array_equal(stack, 0)
    many = [rng.standard_normal((3, 4)) for _ in range(7)]
    stack, mean = center_samples(many)
    assert stack.shape == (3, 4, 7)
    assert np.abs(stack.sum(axis=-1)).max() < 1e-12
    running = np.zeros((3, 4))
    for q, s in enumerate(many, 1):
        running += (s - running) / q
    np.testing.assert_allclose(mean, running, atol=1e-12)
    with pytest.raises(ConfigError):
        center_samples([])
    with pytest.raises(ConfigError):
        center_samples([np.zeros(2), np.zeros(3)])


def test_variant_modes():
    assert Variant.PCA.deficient_modes(3) == (3,)
    assert Variant.T2DPCA.deficient_modes(3) == (1,)
    assert Variant.TWO_D_SQUARED_PCA.deficient_modes(3) == (0, 1)
    assert Variant.TMPCA.deficient_modes(3) == (0, 1, 2)
    spec = PcaSpec("custom", (FULL, 2, FULL, 3))
    assert spec.full_ranks((4, 5, 6, 7)) == (4, 2, 6, 3)


@pytest.mark.parametrize("variant", ["pca", "2dpca", "2d2pca", "mpca"])
def test_full_ranks_are_identity(variant, samples):
    dims = samples[0].shape + (len(samples),)
    modes = Variant(variant).deficient_modes(3)
    res = pca_approximate(samples, PcaSpec(variant, [dims[m] for m in modes]))
    np.testing.assert_allclose(res.reconstruction.real, np.stack(samples, -1), atol=1e-9)


def test_pca_matches_covariance_eigenvectors(rng):
    samples = [rng.standard_normal((8, 8)) for _ in range(50)]
    for r in (1, 5, 20):
        got = pca_approximate(samples, PcaSpec("pca", (r,))).samples()
        want = covariance_pca(samples, r)
        err = np.linalg.norm(np.stack(got) - np.stack(want)) / np.linalg.norm(np.stack(want))
        assert err < 1e-8


def test_sample_projector_is_gram_projector(rng):
    samples = [rng.standard_normal((4, 4)) for _ in range(10)]
    res = pca_approximate(samples, PcaSpec("pca", (3,)))
    p = res.decomposition.projectors()[2].spatial().data
    X = np.stack([s.ravel() for s in samples])
    Xc = X - X.mean(0)
    w, u = np.linalg.eigh(Xc @ Xc.T)
    U = u[:, np.argsort(w)[::-1][:3]]
    np.testing.assert_allclose(p, U @ U.T, atol=1e-8)


@pytest.mark.parametrize("tv,cv", [("tpca", "pca"), ("t2dpca", "2dpca"), ("tmpca", "mpca")])
def test_t_variants_reduce_on_degenerate_algebra(tv, cv, samples):
    ranks = {"pca": (4,), "2dpca": (2,), "mpca": (3, 2, 2)}[cv]
    alg = Algebra((1,))
    t = pca_approximate([s[None] for s in samples], PcaSpec(tv, ranks), algebra=alg)
    c = pca_approximate(samples, PcaSpec(cv, ranks))
    np.testing.assert_allclose(t.reconstruction[0], c.reconstruction, atol=1e-9)


def test_error_monotone_in_each_rank(samples):
    base = [3, 3]
    for k in range(2):
        errs = []
        for r in range(1, samples[0].shape[k] + 1):
            ranks = list(base)
            ranks[k] = r
            errs.append(pca_approximate(samples, PcaSpec("2d2pca", ranks)).objective)
        assert all(b <= a * (1 + 1e-12) for a, b in zip(errs, errs[1:]))


def test_lifted_t_variant_beats_canonical(samples):
    lifting = NeighborhoodSpec((3, 3))
    orig = np.stack(samples, -1)
    for ranks in [(2, 2), (3, 3), (4, 2)]:
        c = pca_approximate(samples, PcaSpec("2d2pca", ranks)).reconstruction.real
        t = pca_approximate(samples, PcaSpec("t2d2pca", ranks), lifting=lifting).reconstruction.real
        assert psnr(orig, t, 255) > psnr(orig, c, 255)


def test_refine_single_mode_is_noop(samples):
    res = pca_approximate(samples, PcaSpec("2dpca", (2,)))
    assert pca_refine(res) is res


def test_refine_improves(samples):
    orig = np.stack(samples, -1)
    for variant, kw in [("2d2pca", {}), ("t2d2pca", {"lifting": NeighborhoodSpec((3, 3))})]:
        for ranks in [(2, 2), (3, 3)]:
            a = pca_approximate(samples, PcaSpec(variant, ranks), **kw)
            b = pca_refine(a)
            h = np.array(b.decomposition.history)
            assert np.all(h[1:] <= h[:-1] * (1 + 1e-12))
            assert b.objective <= a.objective
            if "lifting" not in kw:
                assert psnr(orig, b.reconstruction.real, 255) >= psnr(orig, a.reconstruction.real, 255)


def test_bad_configs(samples):
    with pytest.raises(ConfigError):
        pca_approximate(samples, PcaSpec("2d2pca", (7, 2)))
    with pytest.raises(ConfigError):
        pca_approximate(samples, PcaSpec("2d2pca", (2,)))
    with pytest.raises(ConfigError):
        pca_approximate(samples, PcaSpec("t2d2pca", (2, 2)))
    with pytest.raises(ConfigError):
        pca_approximate(samples, PcaSpec("2d2pca", (2, 2)), lifting=NeighborhoodSpec((3, 3)))
    with pytest.raises(ConfigError):
        PcaSpec("custom", (2,)).full_ranks((3, 3))
    with pytest.raises(ValueError):
        PcaSpec("ica", (2,))
