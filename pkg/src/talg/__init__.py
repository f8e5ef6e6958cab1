"""Tensor decompositions over t-scalar algebras: TSVD, THOSVD, THOOI and PCA variants."""

__version__ = "0.1.0"

from .algebra import Algebra, Domain, TArray, TransformKind, TScalar, partial_le, tmul
from .errors import ConfigError, DataError, DegenerateSpectrum, TalgError
from .gtensor import GTensor, THOSVDResult, fold, hooi, hosvd, mode_mul, thooi, thosvd, unfold
from .lifting import Anchor, NeighborhoodSpec, lift, unlift
from .metrics import psnr
from .pca import FULL, ApproxResult, PcaSpec, Variant, center_samples, pca_approximate, pca_refine
from .tmatrix import (
    TMatrix,
    TSVDResult,
    block_matrix_repr,
    conj_transpose,
    pinv,
    rank,
    rank_t,
    tmatmul,
    tsvd,
    tsvd_truncate,
    tsvd_via_block_svd,
)

__all__ = [
    "Algebra", "Anchor", "ApproxResult", "ConfigError", "DataError", "DegenerateSpectrum", "Domain",
    "FULL", "GTensor", "NeighborhoodSpec", "PcaSpec", "TArray", "THOSVDResult", "TMatrix", "TSVDResult",
    "TScalar", "TalgError", "TransformKind", "Variant", "block_matrix_repr", "center_samples",
    "conj_transpose", "fold", "hooi", "hosvd", "lift", "mode_mul", "partial_le", "pca_approximate",
    "pca_refine", "pinv", "psnr", "rank", "rank_t", "thooi", "thosvd", "tmatmul", "tsvd",
    "tmul", "tsvd_truncate", "tsvd_via_block_svd", "unfold", "unlift",
]
