"""Built-in oracle checks run by ``talg selftest``."""

from __future__ import annotations

import itertools
import math

import numpy as np

from .algebra import Algebra, tmul
from .gtensor import GTensor, hooi, hosvd, thooi, thosvd
from .metrics import psnr
from .tmatrix import TMatrix, block_matrix_repr, tsvd, tsvd_via_block_svd


def _circular_convolution(a, b):
    out = np.zeros_like(a)
    shape = a.shape
    for i in itertools.product(*map(range, shape)):
        for j in itertools.product(*map(range, shape)):
            k = tuple((p - q) % n for p, q, n in zip(i, j, shape))
            out[i] += a[j] * b[k]
    return out


def check_convolution(rng):
    worst = 0.0
    for shape in [(2,), (3, 3), (2, 2, 2)]:
        alg = Algebra(shape)
        for _ in range(10):
            x, y = alg.random(rng), alg.random(rng)
            ref = _circular_convolution(x.data, y.data)
            got = tmul(x, y).spatial().data
            worst = max(worst, np.abs(got - ref).max() / np.abs(ref).max())
    return worst < 1e-12, f"max rel err {worst:.2e}"


def check_homomorphism(rng):
    alg = Algebra((3, 3))
    a, b = TMatrix.random(alg, 4, 5, rng), TMatrix.random(alg, 5, 3, rng)
    lhs = block_matrix_repr(a @ b)
    rhs = block_matrix_repr(a) @ block_matrix_repr(b)
    err = np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs)
    nerr = abs(a.frob_norm() - np.linalg.norm(block_matrix_repr(a))) / a.frob_norm()
    return max(err, nerr) < 1e-11, f"product {err:.2e}, norm {nerr:.2e}"


def check_tsvd_paths(rng):
    alg = Algebra((2, 2))
    worst = 0.0
    for _ in range(5):
        a = TMatrix.random(alg, 5, 4, rng)
        s1 = np.sort(tsvd(a).sigma.ravel())
        s2 = np.sort(tsvd_via_block_svd(a).sigma.ravel())
        worst = max(worst, np.abs(s1 - s2).max())
    return worst < 1e-9, f"singular value gap {worst:.2e}"


def check_canonical(rng):
    x = rng.standard_normal((6, 5, 4))
    ranks = (3, 3, 2)
    g = GTensor(Algebra((1,)), x[None])
    a = thosvd(g, ranks).approx.spatial().data[0]
    b = hosvd(x, ranks).approx.spatial().data
    t = thooi(g, ranks).history
    h = hooi(x, ranks).history
    err = max(np.abs(a - b).max(), max(abs(p - q) for p, q in zip(t, h)))
    return err < 1e-10 and len(t) == len(h), f"max gap {err:.2e}"


def check_psnr(rng):
    a = psnr(np.array([255.0]), np.array([254.0]), 255.0)
    b = psnr(np.zeros(100), np.full(100, 0.1), 1.0)
    ok = abs(a - 20 * math.log10(255)) < 1e-10 and abs(b - 20.0) < 1e-10
    return ok, f"{a:.6f} dB, {b:.6f} dB"


CHECKS = [
    ("circular-convolution", check_convolution),
    ("block-homomorphism", check_homomorphism),
    ("tsvd-dual-path", check_tsvd_paths),
    ("canonical-reduction", check_canonical),
    ("psnr-formula", check_psnr),
]


def run(seed=0, out=print):
    """Run every check; returns True when all pass."""
    rng = np.random.default_rng(seed)
    ok_all = True
    for name, func in CHECKS:
        try:
            ok, info = func(rng)
        except Exception as exc:  # noqa: BLE001
            ok, info = False, f"raised {type(exc).__name__}: {exc}"
        ok_all &= ok
        out(f"{'PASS' if ok else 'FAIL'} {name}: {info}")
    return ok_all
