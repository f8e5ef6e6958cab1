"""G-tensors over the t-algebra: unfolding, mode products, THOSVD and THOOI.

All decompositions run in the spectral domain where every slice is an
independent canonical tensor; inputs are transformed once and results are
returned tagged spectral. With a degenerate algebra (K = 1) the routines are
the canonical HOSVD and HOOI. Modes are numbered from zero.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from .algebra import Algebra, Domain, TArray, TScalar
from .errors import ConfigError
from .tmatrix import TMatrix, rank_t

#: Objective, relative to the input norm, treated as an exact fit.
EXACT_TOL = 1e-12
WIDE_RATIO = 16


class GTensor(TArray):
    """M-mode array of t-scalars, underlying shape ``algebra.shape + (D_1, ..., D_M)``."""

    __slots__ = ()

    @classmethod
    def canonical(cls, array):
        """Wrap a plain complex tensor as a g-tensor over the complex field."""
        return cls(Algebra(()), array)

    @property
    def M(self):
        return len(self.dims)

    def unfold(self, k):
        return unfold(self, k)

    def mode_mul(self, k, y):
        return mode_mul(self, k, y)

    def frob_norm_t(self):
        return frob_norm_t_gt(self)


def _check_mode(M, k):
    if not 0 <= k < M:
        raise ConfigError(f"mode {k} outside [0, {M})")


def _unfold_perm(M, k):
    # remaining modes reversed so that C-order flattening makes the lowest mode fastest
    return [0, k + 1] + [m + 1 for m in reversed(range(M)) if m != k]


def slice_unfold(arr, k):
    """Mode-k unfolding of every slice of ``arr`` (shape ``(K,) + dims``)."""
    M = arr.ndim - 1
    return arr.transpose(_unfold_perm(M, k)).reshape(arr.shape[0], arr.shape[k + 1], -1)


def slice_fold(mat, k, dims):
    M = len(dims)
    perm = _unfold_perm(M, k)
    shape = [mat.shape[0]] + [dims[p - 1] for p in perm[1:]]
    return mat.reshape(shape).transpose(np.argsort(perm))


def slice_mode_mul(arr, k, mats):
    """``arr x_k mats`` per slice, with ``mats`` of shape ``(K, J, D_k)``."""
    moved = np.moveaxis(arr, k + 1, -1)
    shape = moved.shape
    out = moved.reshape(shape[0], -1, shape[-1]) @ mats.transpose(0, 2, 1)
    return np.moveaxis(out.reshape(shape[:-1] + (mats.shape[1],)), -1, k + 1)


def unfold(x, k):
    """Generalized mode-k unfolding into a ``D_k x (prod D / D_k)`` t-matrix.

    Column ``j`` (zero-based) of entry ``(d_1..d_M)`` is
    ``sum_{m != k} d_m * prod_{n < m, n != k} D_n``.
    """
    _check_mode(x.M, k)
    alg = x.algebra
    return TMatrix.from_slices(alg, slice_unfold(x.slices(), k)).in_domain(x.domain)


def fold(t, k, dims):
    dims = tuple(dims)
    _check_mode(len(dims), k)
    if t.dims[0] != dims[k] or t.dims[1] * dims[k] != int(np.prod(dims)):
        raise ConfigError(f"t-matrix of shape {t.dims} cannot fold into {dims} along mode {k}")
    return GTensor.from_slices(t.algebra, slice_fold(t.slices(), k, dims)).in_domain(t.domain)


def mode_mul(x, k, y):
    """Generalized mode-k product ``x o_k y`` with ``y`` a ``J x D_k`` t-matrix."""
    _check_mode(x.M, k)
    if x.algebra != y.algebra:
        raise ConfigError("operands belong to different algebras")
    if y.dims[1] != x.dims[k]:
        raise ConfigError(f"t-matrix with {y.dims[1]} columns cannot act on mode of size {x.dims[k]}")
    return GTensor.from_slices(x.algebra, slice_mode_mul(x.slices(), k, y.slices()))


def frob_norm_gt(x):
    return x.frob_norm()


def frob_norm_t_gt(x):
    s = x.slices()
    spec = np.sqrt((np.abs(s) ** 2).reshape(s.shape[0], -1).sum(axis=1))
    return TScalar(x.algebra, spec.reshape(x.algebra.shape).astype(complex), Domain.SPECTRAL)


def left_singular(arr, k):
    """Square unitary factor of each slice's mode-k unfolding, columns sorted by singular value."""
    a = slice_unfold(arr, k)
    if a.shape[2] > WIDE_RATIO * a.shape[1]:
        # very wide unfoldings: eigenvectors of the Gram matrix, descending
        w, u = np.linalg.eigh(a @ np.conj(a).transpose(0, 2, 1))
        return u[:, :, ::-1], np.sqrt(np.clip(w[:, ::-1], 0, None))
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    n = u.shape[2]
    d = a.shape[1]
    if n < d:
        comp = np.linalg.svd(u, full_matrices=True)[0][:, :, n:]
        u = np.concatenate([u, comp], axis=2)
        s = np.concatenate([s, np.zeros((s.shape[0], d - n))], axis=1)
    return u, s


def _project(arr, us, skip=None):
    """Apply ``P_m = U_m U_m*`` on every mode with a factor, except ``skip``."""
    for m, u in enumerate(us):
        if u is None or m == skip:
            continue
        arr = slice_mode_mul(arr, m, np.conj(u).transpose(0, 2, 1))
        arr = slice_mode_mul(arr, m, u)
    return arr


def _check_ranks(dims, ranks):
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != len(dims):
        raise ConfigError(f"need {len(dims)} ranks, got {len(ranks)}")
    for r, d in zip(ranks, dims):
        if not 1 <= r <= d:
            raise ConfigError(f"rank {r} outside [1, {d}]")
    return ranks


class THOSVDResult:
    """Factors, core and approximation of a (T)HOSVD or (T)HOOI run.

    ``factors[k]`` holds at least ``ranks[k]`` orthonormal columns; the
    first ``ranks[k]`` define the projector ``P_k``. Modes kept at full rank
    may carry an implicit identity factor.
    """

    def __init__(self, x, ranks, bases, approx_slices, history=(), slice_history=(),
                 iterations=0, rejected=0, singular_values=None):
        self.x = x
        self.algebra = x.algebra
        self.ranks = ranks
        self._bases = bases
        self._approx = approx_slices
        self.history = list(history)
        self.slice_history = list(slice_history)
        self.iterations = iterations
        self.rejected = rejected
        self.singular_values = singular_values

    def _basis(self, k):
        u = self._bases[k]
        if u is None:
            d = self.x.dims[k]
            u = np.broadcast_to(np.eye(d, dtype=complex), (self.algebra.K, d, d))
        return u

    @cached_property
    def factors(self):
        return [TMatrix.from_slices(self.algebra, self._basis(k)) for k in range(self.x.M)]

    def truncated_factors(self):
        return [TMatrix.from_slices(self.algebra, self._basis(k)[:, :, :r])
                for k, r in enumerate(self.ranks)]

    def projectors(self):
        out = []
        for k, r in enumerate(self.ranks):
            u = self._basis(k)[:, :, :r]
            out.append(TMatrix.from_slices(self.algebra, u @ np.conj(u).transpose(0, 2, 1)))
        return out

    @cached_property
    def core(self):
        """``x o_1 U_1* ... o_M U_M*`` using all stored columns of each factor."""
        arr = self.x.slices()
        for m, u in enumerate(self._bases):
            if u is not None:
                arr = slice_mode_mul(arr, m, np.conj(u).transpose(0, 2, 1))
        return GTensor.from_slices(self.algebra, arr)

    @property
    def approx(self):
        return GTensor.from_slices(self.algebra, self._approx)

    def error(self):
        """Scalar Frobenius norm of ``x - approx`` (spectral domain)."""
        return float(np.linalg.norm((self.x.slices() - self._approx).ravel()))

    def reconstruct_from_core(self):
        """``core[:r_1, ..., :r_M] o_1 U_1 ... o_M U_M`` (truncated factors)."""
        arr = self.core.data.reshape((self.algebra.K,) + self.core.dims)
        cut = (slice(None),) + tuple(
            slice(None, r) if u is not None else slice(None) for r, u in zip(self.ranks, self._bases)
        )
        arr = arr[cut]
        for m, (r, u) in enumerate(zip(self.ranks, self._bases)):
            if u is not None:
                arr = slice_mode_mul(arr, m, u[:, :, :r])
        return GTensor.from_slices(self.algebra, arr)


def thosvd(x, ranks=None, compute_full_modes=True):
    """THOSVD of a g-tensor with per-mode ranks (default: full).

    Each spectral slice is decomposed by a canonical HOSVD. When
    ``compute_full_modes`` is false, modes with ``r_k = D_k`` get an identity
    factor instead of an SVD; the approximation is unchanged.
    """
    if not isinstance(x, GTensor):
        raise ConfigError("thosvd expects a GTensor")
    ranks = _check_ranks(x.dims, x.dims if ranks is None else ranks)
    arr = x.slices()
    bases, svals = [], []
    for k, (r, d) in enumerate(zip(ranks, x.dims)):
        if r == d and not compute_full_modes:
            bases.append(None)
            svals.append(None)
            continue
        u, s = left_singular(arr, k)
        bases.append(u)
        svals.append(s)
    trunc = [u[:, :, :r] if u is not None and r < u.shape[1] else None for u, r in zip(bases, ranks)]
    approx = _project(arr, trunc)
    res = THOSVDResult(x, ranks, bases, approx, singular_values=svals)
    res.history = [res.error()]
    res.slice_history = [_slice_errors(arr, approx)]
    return res


def _slice_errors(arr, approx):
    diff = (arr - approx).reshape(arr.shape[0], -1)
    return np.einsum("ij,ij->i", diff.conj(), diff).real


def hosvd(x, ranks=None):
    """Canonical HOSVD of a plain complex array (THOSVD over the complex field)."""
    return thosvd(GTensor.canonical(np.asarray(x)), ranks)


def thooi(x, ranks=None, init=None, max_iters=50, tol=1e-8):
    """Alternating refinement of THOSVD projectors (generalized HOOI).

    Each sweep visits modes in ascending order: the mode's projector is reset
    to the identity, the current approximation is formed, and the projector is
    replaced by the leading ``r_k`` left singular t-vectors of its mode-k
    unfolding. Stops when the relative objective decrease falls below ``tol``
    or after ``max_iters`` sweeps, or once the fit is exact. Modes at full rank
    stay identity. A sweep that would increase the objective is discarded and
    counted in ``rejected``.
    """
    if init is None:
        ranks = _check_ranks(x.dims, x.dims if ranks is None else ranks)
        init = thosvd(x, ranks, compute_full_modes=False)
    else:
        ranks = init.ranks if ranks is None else _check_ranks(x.dims, ranks)
        if ranks != init.ranks or init.x.dims != x.dims or init.algebra != x.algebra:
            raise ConfigError("initial decomposition does not conform to the input")
    alg = x.algebra
    us = []
    for k, (r, d) in enumerate(zip(ranks, x.dims)):
        if r == d:
            us.append(None)
            continue
        u = init._basis(k)[:, :, :r]
        rt = rank_t(TMatrix.from_slices(alg, u)).spectral().data.real
        if not np.allclose(rt, r):
            raise ConfigError(f"initial projector of mode {k} does not have t-rank {r}")
        us.append(np.array(u))

    arr = x.slices()
    approx = _project(arr, us)
    prev = float(np.linalg.norm((arr - approx).ravel()))
    xnorm = float(np.linalg.norm(arr.ravel()))
    history = [prev]
    slice_history = [_slice_errors(arr, approx)]
    rejected = 0
    it = 0
    active = [k for k, u in enumerate(us) if u is not None]
    while it < max_iters and active and prev > 0:
        it += 1
        new = list(us)
        for k in active:
            y = _project(arr, new, skip=k)
            u, _ = left_singular(y, k)
            new[k] = u[:, :, : ranks[k]]
        cand = _project(arr, new)
        obj = float(np.linalg.norm((arr - cand).ravel()))
        if obj > prev * (1 + 1e-12):
            rejected += 1
            break
        us, approx = new, cand
        history.append(obj)
        slice_history.append(_slice_errors(arr, approx))
        if prev - obj <= tol * prev or obj <= EXACT_TOL * xnorm:
            break
        prev = obj
    return THOSVDResult(x, ranks, us, approx, history, slice_history, it, rejected)


def hooi(x, ranks, max_iters=50, tol=1e-8):
    """Canonical HOOI initialised from HOSVD."""
    return thooi(GTensor.canonical(np.asarray(x)), ranks, max_iters=max_iters, tol=tol)
