"""Experiment runner: single approximations, rank-grid sweeps and PCA-family runs.

Grid points run on a bounded thread pool with BLAS pinned to one thread, and
rows are emitted in sorted rank order, so output does not depend on the pool
size.
"""

from __future__ import annotations

import csv
import io as _io
import itertools
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError
from .gtensor import GTensor, thooi, thosvd
from .lifting import Anchor, NeighborhoodSpec, lift, unlift
from .metrics import format_psnr, psnr, to_real
from .pca import Variant, pca_approximate
from .tmatrix import TMatrix, tsvd, tsvd_truncate

METHODS = ("hosvd", "hooi", "thosvd", "thooi", "tsvd")
CANONICAL = ("hosvd", "hooi")
BYTES_PER_ENTRY = 16
#: Working copies of the spectral array held at once during a decomposition.
WORKING_COPIES = 6


def parse_tshape(text):
    try:
        shape = tuple(int(p) for p in str(text).lower().split("x"))
    except ValueError:
        raise ConfigError(f"bad t-scalar shape {text!r}, expected e.g. 3x3") from None
    if len(shape) != 2 or min(shape) < 1:
        raise ConfigError(f"bad t-scalar shape {text!r}, expected two positive sizes")
    return shape


def parse_range(text):
    """Inclusive range ``start:stop:step`` (or a single integer) as a list."""
    parts = str(text).split(":")
    try:
        nums = [int(p) for p in parts]
    except ValueError:
        raise ConfigError(f"bad rank range {text!r}") from None
    if len(nums) == 1:
        return nums
    if len(nums) not in (2, 3):
        raise ConfigError(f"bad rank range {text!r}, expected start:stop[:step]")
    start, stop = nums[:2]
    step = nums[2] if len(nums) == 3 else 1
    if step < 1 or stop < start:
        raise ConfigError(f"empty rank range {text!r}")
    return list(range(start, stop + 1, step))


def thread_count():
    raw = os.environ.get("TALG_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"TALG_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError("TALG_THREADS must be at least 1")
    return n


@dataclass
class ExperimentConfig:
    method: str = "thosvd"
    tshape: tuple = (3, 3)
    transform: str = "dft"
    nest: int = 1
    anchor: str = "inception"
    average: bool = False
    psnr_max: float = 255.0
    max_iters: int = 50
    tol: float = 1e-8
    seed: int = 0
    mem_budget_mb: float = 2048.0
    record_time: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if not self.psnr_max > 0:
            raise ConfigError("psnr_max must be positive")
        if self.nest < 1:
            raise ConfigError("nesting depth must be at least 1")
        self.tshape = tuple(self.tshape)

    @property
    def lifted(self):
        return self.method not in CANONICAL

    def neighborhood(self):
        return NeighborhoodSpec(self.tshape, Anchor(self.anchor), 0.0, self.nest)

    def algebra_label(self):
        if not self.lifted:
            return "1"
        return "x".join(str(s) for s in self.neighborhood().tshape)

    def transform_label(self):
        return self.transform if self.lifted else "none"


def check_memory(cfg, dims):
    k = int(np.prod(cfg.neighborhood().tshape)) if cfg.lifted else 1
    need = k * int(np.prod(dims)) * BYTES_PER_ENTRY * WORKING_COPIES / 2 ** 20
    if need > cfg.mem_budget_mb:
        raise ConfigError(f"configuration needs about {need:.0f} MiB, over the {cfg.mem_budget_mb:.0f} MiB budget")


def synthetic(spec, seed):
    """Random test input from a ``random:64x64`` style spec."""
    dims = parse_dims(spec.split(":", 1)[1])
    rng = np.random.default_rng(seed)
    return rng.uniform(0, 255, size=dims)


def parse_dims(text):
    try:
        dims = tuple(int(p) for p in text.lower().split("x"))
    except ValueError:
        raise ConfigError(f"bad dimensions {text!r}") from None
    if min(dims) < 1:
        raise ConfigError(f"bad dimensions {text!r}")
    return dims


def approximate_image(image, cfg, ranks):
    """Approximate ``image`` with ``cfg.method`` at ``ranks``; returns ``(approx, iterations)``."""
    image = np.asarray(image, dtype=float)
    ranks = tuple(ranks)
    if len(ranks) != image.ndim:
        raise ConfigError(f"need {image.ndim} ranks for an image of shape {image.shape}, got {len(ranks)}")
    if cfg.method == "tsvd":
        if image.ndim != 2:
            raise ConfigError("tsvd needs a two-mode image")
        spec = cfg.neighborhood()
        x = lift(image, spec, cfg.transform)
        a = TMatrix(x.algebra, x.data, x.domain)
        out = tsvd_truncate(tsvd(a), *ranks)
        return to_real(unlift(out, spec, cfg.average)), 0
    if cfg.lifted:
        spec = cfg.neighborhood()
        x = lift(image, spec, cfg.transform)
    else:
        x = GTensor.canonical(image)
    if cfg.method in ("thooi", "hooi"):
        res = thooi(x, ranks, max_iters=cfg.max_iters, tol=cfg.tol)
        iters = res.iterations
    else:
        res = thosvd(x, ranks, compute_full_modes=False)
        iters = 0
    approx = res.approx
    if cfg.lifted:
        approx = unlift(approx, spec, cfg.average)
    else:
        approx = approx.spatial().data
    return to_real(approx), iters


HEADER_FIXED = ("method", "algebra", "transform")


def header(M):
    return list(HEADER_FIXED) + [f"r{i + 1}" for i in range(M)] + ["psnr_db", "iters", "seconds"]


def run_point(image, cfg, ranks):
    t0 = time.perf_counter()
    approx, iters = approximate_image(image, cfg, ranks)
    elapsed = time.perf_counter() - t0
    return {
        "method": cfg.method,
        "algebra": cfg.algebra_label(),
        "transform": cfg.transform_label(),
        "ranks": tuple(ranks),
        "psnr_db": psnr(image, approx, cfg.psnr_max),
        "iters": iters,
        "seconds": elapsed if cfg.record_time else None,
    }


def run_grid(func, points, threads=None):
    """Evaluate ``func`` on every point; results come back in sorted point order."""
    from threadpoolctl import threadpool_limits

    points = sorted(set(tuple(p) for p in points))
    threads = thread_count() if threads is None else threads
    with threadpool_limits(limits=1):
        if threads == 1 or len(points) == 1:
            return [func(p) for p in points]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(func, points))


def sweep(image, cfg, grids, threads=None):
    """Run ``cfg`` over the Cartesian product of per-mode rank lists."""
    image = np.asarray(image, dtype=float)
    if len(grids) != image.ndim:
        raise ConfigError(f"need {image.ndim} rank lists, got {len(grids)}")
    for g, d in zip(grids, image.shape):
        if min(g) < 1 or max(g) > d:
            raise ConfigError(f"rank grid {g[0]}..{g[-1]} outside [1, {d}]")
    check_memory(cfg, image.shape)
    return run_grid(lambda r: run_point(image, cfg, r), itertools.product(*grids), threads)


def rows_to_csv(rows, M):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header(M))
    for row in rows:
        secs = "" if row["seconds"] is None else f"{row['seconds']:.6f}"
        w.writerow([row["method"], row["algebra"], row["transform"], *row["ranks"],
                    format_psnr(row["psnr_db"]), row["iters"], secs])
    return buf.getvalue()


def write_outputs(out_dir, rows, M, cfg, inputs, name="results"):
    """Write ``<name>.csv`` and ``<name>.manifest.json`` into ``out_dir``."""
    from .io import sha256_file

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{name}.csv"
    csv_path.write_text(rows_to_csv(rows, M))
    manifest = {
        "version": __version__,
        "config": {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(cfg).items()},
        "inputs": [
            {"path": str(p), "sha256": sha256_file(p)} if Path(p).is_file() else {"source": str(p)}
            for p in inputs
        ],
        "rows": len(rows),
        "csv": csv_path.name,
    }
    (out / f"{name}.manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return csv_path


def plot_rows(path, rows, title=""):
    """PSNR heatmap over (r1, r2) or a PSNR-vs-rank curve, depending on the grid."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        raise ConfigError("plotting needs matplotlib") from None
    ranks = np.array([r["ranks"] for r in rows])
    vals = np.array([min(r["psnr_db"], 400.0) for r in rows])
    varying = [k for k in range(ranks.shape[1]) if len(set(ranks[:, k])) > 1]
    fig, ax = plt.subplots(figsize=(5, 4))
    if len(varying) == 2:
        a, b = varying
        xs, ys = sorted(set(ranks[:, b])), sorted(set(ranks[:, a]))
        grid = np.full((len(ys), len(xs)), np.nan)
        for r, v in zip(ranks, vals):
            grid[ys.index(r[a]), xs.index(r[b])] = v
        im = ax.imshow(grid, origin="lower", aspect="auto",
                       extent=(xs[0], xs[-1], ys[0], ys[-1]) if len(xs) > 1 and len(ys) > 1 else None)
        fig.colorbar(im, ax=ax, label="PSNR (dB)")
        ax.set_xlabel(f"r{b + 1}")
        ax.set_ylabel(f"r{a + 1}")
    else:
        k = varying[0] if varying else 0
        ax.plot(ranks[:, k], vals, marker="o")
        ax.set_xlabel(f"r{k + 1}")
        ax.set_ylabel("PSNR (dB)")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def pca_point(samples, spec, algebra=None, lifting=None, psnr_max=255.0):
    """Global PSNR of a PCA-family reconstruction over the whole sample set."""
    res = pca_approximate(samples, spec, algebra=algebra, lifting=lifting)
    rec = to_real(res.reconstruction)
    return psnr(to_real(res.original), rec, psnr_max), res.decomposition.iterations


def pca_variant_label(variant, optimize):
    return Variant(variant).value + ("-op" if optimize else "")
