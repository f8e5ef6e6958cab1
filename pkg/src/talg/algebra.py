"""T-scalar algebra: spectral transforms and t-scalar arithmetic.

A t-scalar is a fixed-shape complex array. Multiplication is defined by an
invertible multiway transform ``F``: ``F(x * y) = F(x) . F(y)`` elementwise.
Every value carries a domain tag telling whether ``data`` holds spatial
entries or spectral entries (eigenvalues).
"""

from __future__ import annotations

import enum
import numpy as np

from .errors import ConfigError

#: Relative tolerance used to decide self-conjugacy / nonnegativity of spectra.
SC_TOL = 1e-10
#: Condition-number limit for transform matrices.
COND_LIMIT = 1e12


class Domain(enum.Enum):
    SPATIAL = "spatial"
    SPECTRAL = "spectral"


class TransformKind(enum.Enum):
    DFT = "dft"
    DCT = "dct"
    DCT_ORTHO = "dct-ortho"
    CUSTOM = "custom"


def dft_matrix(n):
    """Unnormalized Fourier matrix, ``W[a, b] = exp(-2*pi*i*a*b/n)``."""
    idx = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / n)


def dct_matrix(n, orthonormal=False):
    """Cosine matrix ``W[a, b] = cos(pi/n * a * (b + 1/2))`` (zero-based).

    The literal matrix is not orthogonal; with ``orthonormal=True`` the rows are
    rescaled to give the orthonormal DCT-II.
    """
    a = np.arange(n)[:, None]
    b = np.arange(n)[None, :]
    w = np.cos(np.pi / n * a * (b + 0.5))
    if orthonormal:
        scale = np.full(n, np.sqrt(2.0 / n))
        scale[0] = np.sqrt(1.0 / n)
        w = scale[:, None] * w
    return w.astype(complex)


def mode_apply(data, axis, mat):
    """Mode-``axis`` product ``data x_axis mat`` for a plain complex array."""
    out = np.tensordot(mat, data, axes=(1, axis))
    return np.moveaxis(out, 0, axis)


class Algebra:
    """The t-algebra context: t-scalar shape plus one transform matrix per mode.

    ``shape=()`` (or all ones) is the degenerate algebra, i.e. the complex field.
    """

    def __init__(self, shape=(), transform="dft", matrices=None):
        shape = tuple(int(s) for s in shape)
        if any(s < 1 for s in shape):
            raise ConfigError(f"t-scalar dimensions must be positive, got {shape}")
        try:
            kind = TransformKind(transform) if not isinstance(transform, TransformKind) else transform
        except ValueError:
            raise ConfigError(f"unknown transform {transform!r}") from None
        if matrices is not None:
            kind = TransformKind.CUSTOM
        self.shape = shape
        self.kind = kind

        if kind is TransformKind.CUSTOM:
            if matrices is None or len(matrices) != len(shape):
                raise ConfigError("custom transform needs one matrix per t-scalar mode")
            mats = [np.asarray(m, dtype=complex) for m in matrices]
            for n, m in zip(shape, mats):
                if m.shape != (n, n):
                    raise ConfigError(f"transform matrix of shape {m.shape}, expected {(n, n)}")
        elif kind is TransformKind.DFT:
            mats = [dft_matrix(n) for n in shape]
        else:
            mats = [dct_matrix(n, orthonormal=kind is TransformKind.DCT_ORTHO) for n in shape]

        for m in mats:
            if not np.isfinite(m).all() or np.linalg.cond(m) > COND_LIMIT:
                raise ConfigError("transform matrix is singular or ill-conditioned")
        self.matrices = tuple(_frozen(m) for m in mats)
        self.inverses = tuple(_frozen(np.linalg.inv(m)) for m in mats)

    @property
    def order(self):
        return len(self.shape)

    @property
    def K(self):
        return int(np.prod(self.shape, dtype=int))

    @property
    def degenerate(self):
        return self.K == 1

    @property
    def label(self):
        return "x".join(str(s) for s in self.shape) if self.shape else "1"

    def __repr__(self):
        return f"Algebra(shape={self.shape}, transform={self.kind.value!r})"

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Algebra):
            return NotImplemented
        return (
            self.shape == other.shape
            and self.kind == other.kind
            and all(np.array_equal(a, b) for a, b in zip(self.matrices, other.matrices))
        )

    def __hash__(self):
        return hash((self.shape, self.kind))

    # transforms over the leading t-scalar modes of an underlying array

    def forward(self, data):
        data = np.asarray(data, dtype=complex)
        for n, w in enumerate(self.matrices):
            if w.shape[0] > 1:
                data = mode_apply(data, n, w)
        return data

    def inverse(self, data):
        data = np.asarray(data, dtype=complex)
        for n, w in enumerate(self.inverses):
            if w.shape[0] > 1:
                data = mode_apply(data, n, w)
        return data

    def check(self, data):
        if tuple(data.shape[: self.order]) != self.shape:
            raise ConfigError(
                f"array of shape {data.shape} does not start with t-scalar shape {self.shape}"
            )

    # constructors

    def scalar(self, data, domain=Domain.SPATIAL):
        return TScalar(self, data, domain)

    def zero(self):
        return TScalar(self, np.zeros(self.shape, complex), Domain.SPECTRAL)

    def identity(self):
        return TScalar(self, np.ones(self.shape, complex), Domain.SPECTRAL)

    def inception(self, alpha):
        """The t-scalar ``alpha * E``."""
        return TScalar(self, np.full(self.shape, complex(alpha)), Domain.SPECTRAL)

    def idempotent(self, k):
        """Rank-one idempotent ``D_k``: spectrum is the k-th unit vector."""
        spec = np.zeros(self.K, complex)
        spec[k] = 1.0
        return TScalar(self, spec.reshape(self.shape), Domain.SPECTRAL)

    def random(self, rng, complex_=True):
        data = rng.standard_normal(self.shape)
        if complex_:
            data = data + 1j * rng.standard_normal(self.shape)
        return TScalar(self, data)


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


class TArray:
    """Common storage for t-scalars, t-matrices and g-tensors.

    ``data`` has shape ``algebra.shape + dims``: t-scalar modes lead.
    Instances are immutable; conversions return new objects.
    """

    __slots__ = ("algebra", "data", "domain")

    def __init__(self, algebra, data, domain=Domain.SPATIAL):
        data = np.asarray(data, dtype=complex).view()
        algebra.check(data)
        data.setflags(write=False)
        self.algebra = algebra
        self.data = data
        self.domain = Domain(domain)

    @property
    def dims(self):
        return self.data.shape[self.algebra.order :]

    def _new(self, data, domain):
        return type(self)(self.algebra, data, domain)

    def spectral(self):
        if self.domain is Domain.SPECTRAL:
            return self
        return self._new(self.algebra.forward(self.data), Domain.SPECTRAL)

    def spatial(self):
        if self.domain is Domain.SPATIAL:
            return self
        return self._new(self.algebra.inverse(self.data), Domain.SPATIAL)

    def in_domain(self, domain):
        return self.spectral() if domain is Domain.SPECTRAL else self.spatial()

    def slices(self):
        """Spectral data as an array of shape ``(K,) + dims``."""
        return self.spectral().data.reshape((self.algebra.K,) + self.dims)

    @classmethod
    def from_slices(cls, algebra, slices):
        slices = np.asarray(slices)
        return cls(algebra, slices.reshape(algebra.shape + slices.shape[1:]), Domain.SPECTRAL)

    def _coerce(self, other):
        if not isinstance(other, TArray) or other.algebra != self.algebra:
            raise ConfigError("operands belong to different algebras")
        if other.dims != self.dims:
            raise ConfigError(f"shape mismatch: {self.dims} vs {other.dims}")
        return other.in_domain(self.domain)

    def __add__(self, other):
        other = self._coerce(other)
        return self._new(self.data + other.data, self.domain)

    def __sub__(self, other):
        other = self._coerce(other)
        return self._new(self.data - other.data, self.domain)

    def __neg__(self):
        return self._new(-self.data, self.domain)

    def scale(self, alpha):
        return self._new(complex(alpha) * self.data, self.domain)

    def allclose(self, other, rtol=1e-10, atol=1e-12):
        other = self._coerce(other)
        return np.allclose(self.data, other.data, rtol=rtol, atol=atol)

    def tscale(self, a):
        """C-linear scaling: every t-scalar entry multiplied by ``a``."""
        if not isinstance(a, TScalar) or a.algebra != self.algebra:
            raise ConfigError("tscale expects a t-scalar of the same algebra")
        spec = a.spectral().data.reshape(a.algebra.shape + (1,) * len(self.dims))
        return self._new(self.spectral().data * spec, Domain.SPECTRAL)

    def frob_norm(self):
        """Scalar Frobenius norm, taken over spectral entries."""
        return float(np.linalg.norm(self.spectral().data.ravel()))


def _is_real(spec, tol=SC_TOL):
    return bool(np.all(np.abs(spec.imag) <= tol * (1 + np.abs(spec))))


class TScalar(TArray):
    """An element of the t-algebra."""

    __slots__ = ()

    def __init__(self, algebra, data, domain=Domain.SPATIAL):
        super().__init__(algebra, data, domain)
        if self.dims:
            raise ConfigError(f"t-scalar data must have shape {algebra.shape}")

    def __mul__(self, other):
        if isinstance(other, TArray) and not isinstance(other, TScalar):
            return other.tscale(self)
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return tmul(self, other)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, TScalar):
            return NotImplemented
        return self.allclose(other)

    __hash__ = None

    def __le__(self, other):
        return partial_le(self, other)

    def __ge__(self, other):
        return partial_le(other, self)

    def __repr__(self):
        return f"TScalar({self.algebra.label}, {self.domain.value}, {self.data!r})"

    def eigenvalues(self):
        """Spectral entries in row-major order over the t-scalar index."""
        return self.spectral().data.reshape(-1).copy()

    def conj(self):
        return TScalar(self.algebra, np.conj(self.spectral().data), Domain.SPECTRAL)

    def modulus(self):
        return TScalar(self.algebra, np.abs(self.spectral().data), Domain.SPECTRAL)

    def trace(self):
        return complex(self.spectral().data.sum())

    def sqrt(self):
        """Entrywise spectral square root (principal branch)."""
        return TScalar(self.algebra, np.sqrt(self.spectral().data), Domain.SPECTRAL)

    def is_self_conjugate(self):
        return _is_real(self.spectral().data)

    def is_nonnegative(self):
        spec = self.spectral().data
        return _is_real(spec) and bool(np.all(spec.real >= -SC_TOL * (1 + np.abs(spec))))

    def matrix(self):
        """Diagonal matrix representation ``diag(F_1, ..., F_K)``."""
        return np.diag(self.eigenvalues())


def tmul(x, y):
    """T-scalar product: Hadamard product of spectra."""
    if not isinstance(y, TScalar):
        raise ConfigError("tmul expects two t-scalars")
    y = x._coerce(y)
    return TScalar(x.algebra, x.spectral().data * y.spectral().data, Domain.SPECTRAL)


def partial_le(x, y):
    """``x <= y`` in the partial order of self-conjugate t-scalars."""
    for v in (x, y):
        if not v.is_self_conjugate():
            raise ConfigError("partial order is only defined for self-conjugate t-scalars")
    return (y - x).is_nonnegative()
