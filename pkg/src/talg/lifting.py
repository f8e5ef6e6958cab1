"""Pixel-neighborhood order lifting.

Each pixel of the two leading image modes is replaced by the window of
pixels around it, which becomes a t-scalar. The inception anchor puts the
pixel at the window corner (offsets ``0..I-1`` forward); the center anchor
puts it in the middle. Out-of-image neighbors take the padding value.
Nesting applies the window map repeatedly, appending new t-scalar modes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .algebra import Algebra, TArray
from .errors import ConfigError
from .gtensor import GTensor


class Anchor(enum.Enum):
    INCEPTION = "inception"
    CENTER = "center"


@dataclass(frozen=True)
class NeighborhoodSpec:
    window: tuple = (3, 3)
    anchor: Anchor = Anchor.INCEPTION
    padding: complex = 0.0
    nesting_depth: int = 1

    def __post_init__(self):
        object.__setattr__(self, "window", tuple(int(w) for w in self.window))
        object.__setattr__(self, "anchor", Anchor(self.anchor))
        if len(self.window) != 2 or min(self.window) < 1:
            raise ConfigError(f"window must be two positive sizes, got {self.window}")
        if self.nesting_depth < 1:
            raise ConfigError("nesting depth must be at least 1")
        if self.anchor is Anchor.CENTER and any(w % 2 == 0 for w in self.window):
            raise ConfigError("center anchor needs odd window sizes")

    @property
    def tshape(self):
        return self.window * self.nesting_depth

    def offsets(self, axis):
        w = self.window[axis]
        start = 0 if self.anchor is Anchor.INCEPTION else -(w // 2)
        return np.arange(start, start + w)

    @property
    def anchor_index(self):
        if self.anchor is Anchor.INCEPTION:
            return (0, 0) * self.nesting_depth
        return tuple(w // 2 for w in self.window) * self.nesting_depth

    def algebra(self, transform="dft"):
        return Algebra(self.tshape, transform)


def _shift(img, a0, a1, o0, o1, pad):
    """``out[d0, d1] = img[d0 + o0, d1 + o1]`` along axes ``a0, a1``, padded."""
    out = np.full_like(img, pad)
    n0, n1 = img.shape[a0], img.shape[a1]
    src = [slice(None)] * img.ndim
    dst = [slice(None)] * img.ndim
    src[a0] = slice(max(o0, 0), n0 + min(o0, 0))
    dst[a0] = slice(max(-o0, 0), n0 + min(-o0, 0))
    src[a1] = slice(max(o1, 0), n1 + min(o1, 0))
    dst[a1] = slice(max(-o1, 0), n1 + min(-o1, 0))
    out[tuple(dst)] = img[tuple(src)]
    return out


def _window_map(arr, lead, spec):
    """Add two window modes after the first ``lead`` (t-scalar) modes."""
    a0, a1 = lead, lead + 1
    o0s, o1s = spec.offsets(0), spec.offsets(1)
    out = np.empty(arr.shape[:lead] + (len(o0s), len(o1s)) + arr.shape[lead:], arr.dtype)
    for i, o0 in enumerate(o0s):
        for j, o1 in enumerate(o1s):
            idx = (slice(None),) * lead + (i, j)
            out[idx] = _shift(arr, a0, a1, o0, o1, spec.padding)
    return out


def lift_array(image, spec):
    """Underlying lifted array of shape ``spec.tshape + image.shape``."""
    image = np.asarray(image, dtype=complex)
    if image.ndim < 2:
        raise ConfigError("lifting needs at least two spatial modes")
    d0, d1 = image.shape[:2]
    if spec.window[0] > d0 or spec.window[1] > d1:
        raise ConfigError(f"window {spec.window} larger than image {image.shape[:2]}")
    arr = image
    for level in range(spec.nesting_depth):
        arr = _window_map(arr, 2 * level, spec)
    return arr


def lift(image, spec, transform="dft"):
    """Lift an image of shape ``(D1, D2, ...)`` into a g-tensor over ``spec.tshape``."""
    return GTensor(spec.algebra(transform), lift_array(image, spec))


def _underlying(x, spec):
    if isinstance(x, TArray):
        arr = x.spatial().data
    else:
        arr = np.asarray(x)
    n = len(spec.tshape)
    if arr.shape[:n] != spec.tshape:
        raise ConfigError(f"array of shape {arr.shape} was not lifted with window {spec.tshape}")
    return arr, n


def unlift(x, spec, average=False):
    """Read pixels back from a lifted g-tensor.

    By default each pixel is read at the anchor t-index. With ``average=True``
    every in-image copy of the pixel across all windows is averaged.
    """
    arr, n = _underlying(x, spec)
    if not average:
        return arr[spec.anchor_index].copy()
    dims = arr.shape[n:]
    valid = lift_array(np.ones(dims), NeighborhoodSpec(spec.window, spec.anchor, 0.0, spec.nesting_depth))
    valid = valid.real > 0.5
    total = np.zeros(dims, complex)
    count = np.zeros(dims)
    offs = [spec.offsets(0), spec.offsets(1)]
    for tidx in np.ndindex(*spec.tshape):
        s0 = sum(offs[0][tidx[2 * l]] for l in range(spec.nesting_depth))
        s1 = sum(offs[1][tidx[2 * l + 1]] for l in range(spec.nesting_depth))
        vals = np.where(valid[tidx], arr[tidx], 0)
        # entry at pixel d estimates the image at d + (s0, s1); move it back there
        total += _shift(vals, 0, 1, -s0, -s1, 0)
        count += _shift(valid[tidx].astype(float), 0, 1, -s0, -s1, 0)
    return total / np.maximum(count, 1)


def inception_mask(x, spec):
    """Zero every non-anchor entry of each lifted t-scalar."""
    arr, n = _underlying(x, spec)
    out = np.zeros_like(arr)
    out[spec.anchor_index] = arr[spec.anchor_index]
    alg = x.algebra if isinstance(x, TArray) else spec.algebra()
    return GTensor(alg, out)
