"""Approximation quality metrics."""

import math

import numpy as np

from .errors import ConfigError

#: Largest imaginary part, relative to the data norm, tolerated when exporting reals.
IMAG_TOL = 1e-8


def to_real(arr):
    """Drop the imaginary part after checking it is negligible."""
    arr = np.asarray(arr)
    if not np.iscomplexobj(arr):
        return arr.astype(float)
    limit = IMAG_TOL * max(float(np.linalg.norm(arr.ravel())), 1.0)
    worst = float(np.abs(arr.imag).max(initial=0.0))
    if worst > limit:
        raise ConfigError(f"imaginary residue {worst:.3g} exceeds {limit:.3g}")
    return arr.real.copy()


def psnr(original, approx, max_value=255.0):
    """Peak signal-to-noise ratio in dB, ``20 log10(MAX * sqrt(N) / ||X - Xhat||_F)``.

    Returns ``inf`` when the arrays are identical.
    """
    original = np.asarray(original)
    approx = np.asarray(approx)
    if original.shape != approx.shape:
        raise ConfigError(f"shape mismatch: {original.shape} vs {approx.shape}")
    if not max_value > 0:
        raise ConfigError("max_value must be positive")
    err = float(np.linalg.norm((original - approx).ravel()))
    if err == 0.0:
        return math.inf
    return 20.0 * math.log10(max_value * math.sqrt(original.size) / err)


def format_psnr(value, digits=6):
    return "inf" if math.isinf(value) else f"{value:.{digits}f}"
