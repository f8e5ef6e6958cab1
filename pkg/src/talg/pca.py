"""PCA-style approximators expressed as (T)HOSVD with per-mode projector selection.

Samples of shape ``(D_1, ..., D_M)`` are mean-subtracted and stacked along a
trailing sample mode. Each variant fixes which modes get a rank-deficient
projector; the remaining modes keep the identity. The t-variants either lift
every sample with a neighborhood spec or treat leading sample modes as
t-scalar modes of a given algebra.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .algebra import Algebra
from .errors import ConfigError
from .gtensor import GTensor, THOSVDResult, thooi, thosvd
from .lifting import lift_array, unlift


class Variant(enum.Enum):
    PCA = "pca"
    TWO_D_PCA = "2dpca"
    TWO_D_SQUARED_PCA = "2d2pca"
    MPCA = "mpca"
    TPCA = "tpca"
    T2DPCA = "t2dpca"
    T2D_SQUARED_PCA = "t2d2pca"
    TMPCA = "tmpca"
    CUSTOM = "custom"

    @property
    def generalized(self):
        return self in (Variant.TPCA, Variant.T2DPCA, Variant.T2D_SQUARED_PCA, Variant.TMPCA)

    def deficient_modes(self, M):
        """Zero-based rank-deficient modes for ``M`` structural modes plus the sample mode."""
        if self in (Variant.PCA, Variant.TPCA):
            return (M,)
        if self in (Variant.TWO_D_PCA, Variant.T2DPCA):
            return (1,)
        if self in (Variant.TWO_D_SQUARED_PCA, Variant.T2D_SQUARED_PCA):
            return (0, 1)
        if self in (Variant.MPCA, Variant.TMPCA):
            return tuple(range(M))
        raise ConfigError("custom variant needs explicit per-mode ranks")


#: Marker for a mode kept at full rank.
FULL = None


@dataclass(frozen=True)
class PcaSpec:
    """``ranks`` lists one rank per deficient mode of the variant.

    For ``Variant.CUSTOM`` it lists one entry per stacked mode (sample mode
    last), with ``FULL`` for modes that keep the identity projector.
    """

    variant: Variant
    ranks: tuple
    optimize: bool = False
    center: bool = True
    max_iters: int = 50
    tol: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "ranks", tuple(self.ranks))

    def full_ranks(self, stack_dims):
        """Rank tuple over all stacked modes."""
        M = len(stack_dims) - 1
        if self.variant is Variant.CUSTOM:
            if len(self.ranks) != M + 1:
                raise ConfigError(f"custom ranks need {M + 1} entries, got {len(self.ranks)}")
            out = [d if r is FULL else int(r) for r, d in zip(self.ranks, stack_dims)]
        else:
            modes = self.variant.deficient_modes(M)
            if max(modes) > M:
                raise ConfigError(f"{self.variant.value} needs more modes than {stack_dims}")
            if len(self.ranks) != len(modes):
                raise ConfigError(f"{self.variant.value} takes {len(modes)} ranks, got {len(self.ranks)}")
            out = list(stack_dims)
            for m, r in zip(modes, self.ranks):
                out[m] = stack_dims[m] if r is FULL else int(r)
        for r, d in zip(out, stack_dims):
            if not 1 <= r <= d:
                raise ConfigError(f"rank {r} outside [1, {d}]")
        return tuple(out)


def center_samples(samples, center=True):
    """Stack samples along a new trailing mode after subtracting their mean."""
    samples = [np.asarray(s) for s in samples]
    if not samples:
        raise ConfigError("no samples given")
    shape = samples[0].shape
    if any(s.shape != shape for s in samples):
        raise ConfigError("samples must share one shape")
    stack = np.stack(samples, axis=-1).astype(complex)
    mean = stack.mean(axis=-1)
    if center:
        stack = stack - mean[..., None]
    else:
        mean = np.zeros_like(mean)
    return stack, mean


@dataclass
class ApproxResult:
    """Reconstructions of a sample stack together with the decomposition behind them."""

    spec: PcaSpec
    ranks: tuple
    decomposition: THOSVDResult
    mean: np.ndarray
    original: np.ndarray
    lifting: object = None

    @property
    def reconstruction(self):
        """Approximated samples stacked along the trailing mode, mean restored."""
        approx = self.decomposition.approx.spatial().data
        if self.lifting is not None:
            approx = unlift(approx, self.lifting)
        return approx + self.mean[..., None]

    def samples(self):
        rec = self.reconstruction
        return [rec[..., q] for q in range(rec.shape[-1])]

    @property
    def objective(self):
        return self.decomposition.history[-1]


def _build(stack, spec, algebra, lifting):
    canonical = not spec.variant.generalized and spec.variant is not Variant.CUSTOM
    if lifting is not None:
        if canonical:
            raise ConfigError(f"{spec.variant.value} is a canonical variant; drop the lifting")
        return GTensor(lifting.algebra(algebra or "dft"), lift_array(stack, lifting))
    if isinstance(algebra, Algebra):
        if canonical and not algebra.degenerate:
            raise ConfigError(f"{spec.variant.value} is a canonical variant; drop the algebra")
        return GTensor(algebra, stack)
    if spec.variant.generalized:
        raise ConfigError(f"{spec.variant.value} needs a lifting spec or a t-algebra")
    return GTensor.canonical(stack)


def pca_approximate(samples, spec, algebra=None, lifting=None):
    """Approximate samples with the PCA variant in ``spec``.

    ``lifting`` (a ``NeighborhoodSpec``) lifts the two leading sample modes;
    ``algebra`` is then the transform name. Otherwise an ``Algebra`` treats the
    leading ``algebra.order`` sample modes as t-scalar modes.
    """
    stack, mean = center_samples(samples, spec.center)
    x = _build(stack, spec, algebra, lifting)
    ranks = spec.full_ranks(x.dims)
    dec = thosvd(x, ranks, compute_full_modes=False)
    res = ApproxResult(spec, ranks, dec, mean, stack + mean[..., None], lifting)
    if spec.optimize:
        res = pca_refine(res, spec.max_iters, spec.tol)
    return res


def pca_refine(approx, max_iters=50, tol=1e-8):
    """Alternating refinement of the rank-deficient projectors (no-op for fewer than two)."""
    deficient = [k for k, (r, d) in enumerate(zip(approx.ranks, approx.decomposition.x.dims)) if r < d]
    if len(deficient) < 2:
        return approx
    dec = thooi(approx.decomposition.x, approx.ranks, init=approx.decomposition,
                max_iters=max_iters, tol=tol)
    return ApproxResult(approx.spec, approx.ranks, dec, approx.mean, approx.original,
                        approx.lifting)
