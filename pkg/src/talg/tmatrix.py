"""T-matrices: products, block-matrix representation, TSVD, rank and pseudo-inverse.

Every operation decouples over spectral slices: slice ``k`` of a t-matrix is
the ordinary complex matrix formed by the k-th eigenvalue of each entry. The
slice-wise TSVD is the production path; :func:`tsvd_via_block_svd` rebuilds
the same decomposition from one SVD of the block-diagonal representation and
serves as an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import Domain, TArray, TScalar
from .errors import ConfigError, DegenerateSpectrum

EPS = np.finfo(float).eps


class TMatrix(TArray):
    """Rectangular array of t-scalars, underlying shape ``algebra.shape + (D1, D2)``."""

    __slots__ = ()

    def __init__(self, algebra, data, domain=Domain.SPATIAL):
        super().__init__(algebra, data, domain)
        if len(self.dims) != 2:
            raise ConfigError(f"t-matrix needs two structural modes, got {self.dims}")

    @classmethod
    def identity(cls, algebra, n):
        eye = np.broadcast_to(np.eye(n, dtype=complex), (algebra.K, n, n))
        return cls.from_slices(algebra, eye)

    @classmethod
    def zeros(cls, algebra, m, n):
        return cls(algebra, np.zeros(algebra.shape + (m, n), complex), Domain.SPECTRAL)

    @classmethod
    def random(cls, algebra, m, n, rng, complex_=True):
        data = rng.standard_normal(algebra.shape + (m, n))
        if complex_:
            data = data + 1j * rng.standard_normal(algebra.shape + (m, n))
        return cls(algebra, data)

    @property
    def shape(self):
        return self.dims

    def __getitem__(self, idx):
        i, j = idx
        lead = (slice(None),) * self.algebra.order
        if isinstance(i, (int, np.integer)) and isinstance(j, (int, np.integer)):
            return TScalar(self.algebra, self.data[lead + (i, j)], self.domain)
        i = slice(i, i + 1) if isinstance(i, (int, np.integer)) else i
        j = slice(j, j + 1) if isinstance(j, (int, np.integer)) else j
        return TMatrix(self.algebra, self.data[lead + (i, j)], self.domain)

    def __matmul__(self, other):
        return tmatmul(self, other)

    @property
    def H(self):
        return conj_transpose(self)

    def block_matrix(self):
        return block_matrix_repr(self)

    def frob_norm_t(self):
        return frob_norm_t(self)


def tmatmul(a, b):
    """T-matrix product; one complex matmul per spectral slice."""
    if a.algebra != b.algebra:
        raise ConfigError("operands belong to different algebras")
    if a.dims[1] != b.dims[0]:
        raise ConfigError(f"inner dimensions differ: {a.dims} @ {b.dims}")
    return TMatrix.from_slices(a.algebra, a.slices() @ b.slices())


def conj_transpose(a):
    return TMatrix.from_slices(a.algebra, np.conj(a.slices()).transpose(0, 2, 1))


def block_matrix_repr(a):
    """The ``K*D1 x K*D2`` matrix whose (i, j) block is ``diag(F(a[i, j]))``."""
    s = a.slices()
    K, d1, d2 = s.shape
    out = np.zeros((d1, K, d2, K), complex)
    k = np.arange(K)
    out[:, k, :, k] = s
    return out.reshape(d1 * K, d2 * K)


def from_block_matrix(algebra, mat, tol=1e-10):
    """Inverse of :func:`block_matrix_repr`; rejects non-diagonal blocks."""
    K = algebra.K
    mat = np.asarray(mat, dtype=complex)
    if mat.shape[0] % K or mat.shape[1] % K:
        raise ConfigError(f"matrix shape {mat.shape} is not a multiple of K={K}")
    d1, d2 = mat.shape[0] // K, mat.shape[1] // K
    blocks = mat.reshape(d1, K, d2, K)
    k = np.arange(K)
    diag = blocks[:, k, :, k]
    rest = blocks.copy()
    rest[:, k, :, k] = 0
    scale = max(1.0, float(np.abs(mat).max(initial=0)))
    if np.abs(rest).max(initial=0) > tol * scale:
        raise ConfigError("block matrix has nonzero off-diagonal block entries")
    return TMatrix.from_slices(algebra, diag)


def frob_norm_t(a):
    """T-scalar valued Frobenius norm: spectral sqrt of the summed squared moduli."""
    s = a.slices()
    spec = np.sqrt((np.abs(s) ** 2).reshape(s.shape[0], -1).sum(axis=1))
    return TScalar(a.algebra, spec.reshape(a.algebra.shape).astype(complex), Domain.SPECTRAL)


def frob_norm(a):
    return a.frob_norm()


def _phase_fix(U, V):
    """Make the largest-magnitude entry of every column of ``U`` real positive."""
    K, _, D = U.shape
    idx = np.argmax(np.abs(U), axis=1)
    lead = np.take_along_axis(U, idx[:, None, :], axis=1)[:, 0, :]
    mag = np.abs(lead)
    phase = np.where(mag > 0, np.conj(lead) / np.where(mag > 0, mag, 1), 1.0)
    return U * phase[:, None, :], V * phase[:, None, :]


@dataclass(frozen=True)
class TSVDResult:
    """``a = U o diag(S) o V*`` with singular t-scalars sorted per slice."""

    U: TMatrix
    sigma: np.ndarray  # (K, D) real, descending along axis 1
    V: TMatrix

    @property
    def algebra(self):
        return self.U.algebra

    @property
    def S(self):
        alg = self.algebra
        return [
            TScalar(alg, self.sigma[:, i].reshape(alg.shape).astype(complex), Domain.SPECTRAL)
            for i in range(self.sigma.shape[1])
        ]

    def S_matrix(self):
        D = self.sigma.shape[1]
        diag = np.zeros((self.algebra.K, D, D), complex)
        diag[:, np.arange(D), np.arange(D)] = self.sigma
        return TMatrix.from_slices(self.algebra, diag)

    def reconstruct(self, r=None):
        D = self.sigma.shape[1]
        r = D if r is None else r
        u = self.U.slices()[:, :, :r]
        v = self.V.slices()[:, :, :r]
        return TMatrix.from_slices(
            self.algebra, (u * self.sigma[:, None, :r]) @ np.conj(v).transpose(0, 2, 1)
        )


def tsvd(a, full=False):
    """Slice-wise TSVD: one complex SVD per spectral slice."""
    s = a.slices()
    u, sig, vh = np.linalg.svd(s, full_matrices=full)
    v = np.conj(vh).transpose(0, 2, 1)
    D = sig.shape[1]
    fixed_u, fixed_v = _phase_fix(u[:, :, :D], v[:, :, :D])
    u = np.concatenate([fixed_u, u[:, :, D:]], axis=2)
    v = np.concatenate([fixed_v, v[:, :, D:]], axis=2)
    alg = a.algebra
    return TSVDResult(TMatrix.from_slices(alg, u), sig, TMatrix.from_slices(alg, v))


def _split_by_slice(vectors, K, n):
    """Resolve vectors spanning a singular subspace into single-slice vectors.

    ``vectors`` is ``(K*n, m)`` with orthonormal columns whose span is a direct
    sum of per-slice subspaces. Returns a list of ``(k, vec_n)``.
    """
    parts = vectors.reshape(n, K, -1)
    found = []
    for k in range(K):
        b = parts[:, k, :]
        if not np.any(b):
            continue
        ub, sb, _ = np.linalg.svd(b, full_matrices=False)
        if np.any((sb > 1e-6) & (sb < 1 - 1e-6)):
            raise DegenerateSpectrum(f"singular vectors mix spectral slice {k} with others")
        found.extend((k, ub[:, i]) for i in np.flatnonzero(sb >= 1 - 1e-6))
    if len(found) != vectors.shape[1]:
        raise DegenerateSpectrum("singular subspace is not a sum of single-slice vectors")
    return found


def _complement(algebra, basis, k, n, count):
    """``count`` unit vectors of slice ``k`` orthogonal to ``basis`` (n x c).

    Taken as the leading left singular vectors of the block matrix of
    ``D_k o I - U_k o U_k*``.
    """
    K = algebra.K
    proj = np.zeros((K, n, n), complex)
    proj[k] = np.eye(n) - basis @ np.conj(basis).T
    w, sw, _ = np.linalg.svd(block_matrix_repr(TMatrix.from_slices(algebra, proj)))
    out = []
    for kk, vec in _split_by_slice(w[:, :count], K, n):
        if kk != k:
            raise DegenerateSpectrum("complement vector left its spectral slice")
        out.append(vec)
    return out


def tsvd_via_block_svd(a):
    """TSVD assembled from the SVD of the block-diagonal representation ``M(a)``.

    Left singular vectors of ``M(a)`` with nonzero singular value are sorted
    into K classes by the spectral slice they live on (their t-scalar valued
    rank is a rank-one idempotent). Rank-deficient classes are padded with
    orthonormal-complement vectors and zero singular values, then each class
    is sorted descending and the classes are summed into singular t-vectors.
    """
    alg = a.algebra
    K = alg.K
    d1, d2 = a.dims
    D = min(d1, d2)
    M = block_matrix_repr(a)
    ub, sb, vbh = np.linalg.svd(M, full_matrices=False)
    smax = sb[0] if sb.size else 0.0
    tol = max(M.shape) * EPS * smax
    nz = np.flatnonzero(sb > tol)

    classes = [[] for _ in range(K)]
    # group numerically equal singular values; their vectors may mix slices
    start = 0
    while start < nz.size:
        stop = start + 1
        while stop < nz.size and sb[nz[start]] - sb[nz[stop]] <= 1e-8 * smax:
            stop += 1
        cols = nz[start:stop]
        for k, u in _split_by_slice(ub[:, cols], K, d1):
            full_u = np.zeros((d1, K), complex)
            full_u[:, k] = u
            w = np.conj(M).T @ full_u.reshape(-1)
            sigma = np.linalg.norm(w)
            v = (w / sigma).reshape(d2, K)
            if np.linalg.norm(v[:, k]) < 1 - 1e-6:
                raise DegenerateSpectrum("right singular vector left its spectral slice")
            classes[k].append((sigma, u, v[:, k]))
        start = stop

    U = np.zeros((K, d1, D), complex)
    V = np.zeros((K, d2, D), complex)
    sig = np.zeros((K, D))
    for k, members in enumerate(classes):
        if len(members) > D:
            raise DegenerateSpectrum(f"slice {k} collected {len(members)} > {D} singular vectors")
        members.sort(key=lambda m: -m[0])
        c = len(members)
        if c:
            sig[k, :c] = [m[0] for m in members]
            U[k, :, :c] = np.stack([m[1] for m in members], axis=1)
            V[k, :, :c] = np.stack([m[2] for m in members], axis=1)
        if c < D:
            U[k, :, c:] = np.stack(_complement(alg, U[k, :, :c], k, d1, D - c), axis=1)
            V[k, :, c:] = np.stack(_complement(alg, V[k, :, :c], k, d2, D - c), axis=1)
    U, V = _phase_fix(U, V)
    return TSVDResult(TMatrix.from_slices(alg, U), sig, TMatrix.from_slices(alg, V))


def tsvd_truncate(res, r1, r2):
    """Keep the leading ``min(r1, r2)`` singular t-scalars."""
    D = res.sigma.shape[1]
    for r in (r1, r2):
        if not 1 <= r <= D:
            raise ConfigError(f"rank {r} outside [1, {D}]")
    return res.reconstruct(min(r1, r2))


def _rank_tol(sig, d1, d2, K):
    smax = float(sig.max(initial=0.0))
    return max(K * d1, K * d2) * EPS * smax


def rank_t(a):
    """T-scalar valued rank: per-slice count of singular values above tolerance."""
    sig = np.linalg.svd(a.slices(), compute_uv=False)
    d1, d2 = a.dims
    counts = (sig > _rank_tol(sig, d1, d2, a.algebra.K)).sum(axis=1)
    return TScalar(a.algebra, counts.reshape(a.algebra.shape).astype(complex), Domain.SPECTRAL)


def rank(a):
    return int(round(rank_t(a).trace().real))


def pinv(a):
    """Moore-Penrose inverse, computed slice by slice."""
    u, sig, vh = np.linalg.svd(a.slices(), full_matrices=False)
    d1, d2 = a.dims
    tol = _rank_tol(sig, d1, d2, a.algebra.K)
    inv = np.where(sig > tol, 1.0 / np.where(sig > tol, sig, 1.0), 0.0)
    out = (np.conj(vh).transpose(0, 2, 1) * inv[:, None, :]) @ np.conj(u).transpose(0, 2, 1)
    return TMatrix.from_slices(a.algebra, out)
