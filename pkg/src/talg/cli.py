"""Command-line entry point ``talg``.

Exit codes: 0 success, 1 selftest failure, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import itertools
import sys
from pathlib import Path

import numpy as np

from . import __version__, bench
from .algebra import Algebra
from .errors import ConfigError, DataError
from .io import load_any, load_cifar10, read_raw, save_image, write_raw
from .lifting import Anchor, NeighborhoodSpec
from .pca import PcaSpec, Variant

MAX_RANK_FLAGS = 6


def _ints(text):
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError:
        raise ConfigError(f"bad rank list {text!r}, expected e.g. 8,8") from None


def _add_algebra_flags(p):
    p.add_argument("--transform", default="dft", choices=["dft", "dct", "dct-ortho"])
    p.add_argument("--tshape", default="3x3", help="neighborhood window, e.g. 3x3")
    p.add_argument("--nest", type=int, default=1, help="neighborhood nesting depth")
    p.add_argument("--anchor", default="inception", choices=[a.value for a in Anchor])
    p.add_argument("--average", action="store_true", help="unlift by averaging all copies of a pixel")


def _add_run_flags(p):
    p.add_argument("--optimize", action="store_true", help="refine with alternating iterations")
    p.add_argument("--max-iters", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output directory for CSV and manifest")
    p.add_argument("--psnr-max", type=float, help="PSNR peak value (default from input kind)")
    p.add_argument("--mem-budget", type=float, default=2048.0, help="memory budget in MiB")
    p.add_argument("--record-time", action="store_true", help="fill the seconds column")
    p.add_argument("--plot", action="store_true", help="also write a PNG plot")


def _add_rank_grid(p):
    for i in range(1, MAX_RANK_FLAGS + 1):
        p.add_argument(f"--r{i}", help=f"inclusive rank range for mode {i}, start:stop:step")


def build_parser():
    parser = argparse.ArgumentParser(prog="talg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"talg {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("approx", help="approximate one input at one rank tuple")
    p.add_argument("input", help="image, raw tensor, or random:HxW")
    p.add_argument("--kind", choices=["png", "pgm", "raw-tensor"])
    p.add_argument("--method", default="thosvd", choices=bench.METHODS)
    p.add_argument("--ranks", required=True, help="comma-separated ranks, one per mode")
    p.add_argument("--save-approx", help="write the reconstruction (.png/.pgm/.talg)")
    _add_algebra_flags(p)
    _add_run_flags(p)

    p = sub.add_parser("sweep", help="approximate one input over a rank grid")
    p.add_argument("input")
    p.add_argument("--kind", choices=["png", "pgm", "raw-tensor"])
    p.add_argument("--method", default="thosvd", choices=bench.METHODS)
    _add_rank_grid(p)
    _add_algebra_flags(p)
    _add_run_flags(p)

    p = sub.add_parser("pca", help="PCA-family approximation of a sample set")
    p.add_argument("inputs", nargs="+", help="CIFAR-10 batches, images, or one raw tensor (samples last)")
    p.add_argument("--kind", choices=["cifar10-bin", "png", "pgm", "raw-tensor"])
    p.add_argument("--variant", required=True, choices=[v.value for v in Variant if v is not Variant.CUSTOM])
    p.add_argument("--limit", type=int, help="use only the first N samples")
    p.add_argument("--channel-tmode", action="store_true",
                   help="use the leading sample mode (CIFAR channels) as the t-scalar mode instead of lifting")
    _add_rank_grid(p)
    _add_algebra_flags(p)
    _add_run_flags(p)

    p = sub.add_parser("convert", help="convert between images and raw tensor files")
    p.add_argument("input")
    p.add_argument("output")

    p = sub.add_parser("selftest", help="run the built-in oracle checks")
    p.add_argument("--seed", type=int, default=0)
    return parser


def _load_single(args):
    if args.input.startswith("random:"):
        return bench.synthetic(args.input, args.seed), 255.0
    return load_any(args.input, args.kind)


def _config(args, method, psnr_max):
    if args.optimize:
        method = {"hosvd": "hooi", "thosvd": "thooi"}.get(method, method)
    return bench.ExperimentConfig(
        method=method,
        tshape=bench.parse_tshape(args.tshape),
        transform=args.transform,
        nest=args.nest,
        anchor=args.anchor,
        average=args.average,
        psnr_max=args.psnr_max if args.psnr_max is not None else psnr_max,
        max_iters=args.max_iters,
        tol=args.tol,
        seed=args.seed,
        mem_budget_mb=args.mem_budget,
        record_time=args.record_time,
    )


def _grids(args, dims):
    grids = []
    for i, d in enumerate(dims):
        spec = getattr(args, f"r{i + 1}", None)
        grids.append(bench.parse_range(spec) if spec else [d])
    extra = [i for i in range(len(dims), MAX_RANK_FLAGS) if getattr(args, f"r{i + 1}", None)]
    if extra:
        raise ConfigError(f"--r{extra[0] + 1} given for an input with {len(dims)} modes")
    return grids


def _emit(args, rows, M, cfg, inputs, title):
    text = bench.rows_to_csv(rows, M)
    sys.stdout.write(text)
    if args.out:
        bench.write_outputs(args.out, rows, M, cfg, inputs)
        if args.plot:
            bench.plot_rows(Path(args.out) / "results.png", rows, title)
    elif args.plot:
        raise ConfigError("--plot needs --out")


def cmd_approx(args):
    image, peak = _load_single(args)
    cfg = _config(args, args.method, peak)
    ranks = _ints(args.ranks)
    bench.check_memory(cfg, image.shape)
    rows = bench.run_grid(lambda r: bench.run_point(image, cfg, r), [ranks], threads=1)
    if args.save_approx:
        approx, _ = bench.approximate_image(image, cfg, ranks)
        _save(args.save_approx, approx)
    _emit(args, rows, image.ndim, cfg, [args.input], f"{cfg.method} {cfg.algebra_label()}")
    return 0


def cmd_sweep(args):
    image, peak = _load_single(args)
    cfg = _config(args, args.method, peak)
    rows = bench.sweep(image, cfg, _grids(args, image.shape))
    _emit(args, rows, image.ndim, cfg, [args.input], f"{cfg.method} {cfg.algebra_label()}")
    return 0


def _load_samples(args):
    kind = args.kind
    if kind is None and all(p.endswith(".bin") for p in args.inputs):
        kind = "cifar10-bin"
    if kind == "cifar10-bin":
        images, _ = load_cifar10(args.inputs, args.limit)
        # (n, C, H, W) -> rows and columns leading unless channels are t-scalar modes
        samples = images.astype(float) if args.channel_tmode else images.transpose(0, 2, 3, 1).astype(float)
        return list(samples), 255.0
    if kind == "raw-tensor" or (kind is None and len(args.inputs) == 1 and args.inputs[0].endswith(".talg")):
        arr = read_raw(args.inputs[0])
        arr = np.moveaxis(arr, -1, 0)[: args.limit]
        return list(arr), float(np.abs(arr).max(initial=0.0)) or 1.0
    loaded = [load_any(p, kind) for p in args.inputs[: args.limit]]
    return [a for a, _ in loaded], loaded[0][1]


def cmd_pca(args):
    samples, peak = _load_samples(args)
    variant = Variant(args.variant)
    psnr_max = args.psnr_max if args.psnr_max is not None else peak
    dims = samples[0].shape
    if variant.generalized and args.channel_tmode:
        algebra, lifting = Algebra(dims[:1], args.transform), None
        dims = dims[1:]
        label = str(algebra.shape[0])
    elif variant.generalized:
        lifting = NeighborhoodSpec(bench.parse_tshape(args.tshape), Anchor(args.anchor), 0.0, args.nest)
        algebra = args.transform
        label = "x".join(map(str, lifting.tshape))
    else:
        algebra = lifting = None
        label = "1"
    modes = variant.deficient_modes(len(dims))
    stack_dims = dims + (len(samples),)
    grids = []
    for i, m in enumerate(modes):
        spec = getattr(args, f"r{i + 1}", None)
        grids.append(bench.parse_range(spec) if spec else [stack_dims[m]])
    cfg = _config(args, "thosvd" if variant.generalized else "hosvd", psnr_max)
    bench.check_memory(cfg, stack_dims)
    method = bench.pca_variant_label(variant, args.optimize)

    def point(ranks):
        spec = PcaSpec(variant, ranks, optimize=args.optimize, max_iters=args.max_iters, tol=args.tol)
        value, iters = bench.pca_point(samples, spec, algebra=algebra, lifting=lifting, psnr_max=psnr_max)
        return {"method": method, "algebra": label,
                "transform": args.transform if variant.generalized else "none",
                "ranks": ranks, "psnr_db": value, "iters": iters, "seconds": None}

    rows = bench.run_grid(point, itertools.product(*grids))
    _emit(args, rows, len(modes), cfg, args.inputs, method)
    return 0


def _save(path, array):
    path = Path(path)
    if path.suffix.lower() in (".png", ".pgm"):
        save_image(path, array)
    else:
        write_raw(path, array)


def cmd_convert(args):
    src = Path(args.input)
    if src.suffix.lower() == ".talg":
        arr = read_raw(src)
        if np.iscomplexobj(arr):
            arr = arr.real
        _save(args.output, arr)
    else:
        arr, _ = load_any(src)
        _save(args.output, arr)
    return 0


def cmd_selftest(args):
    from .selftest import run

    return 0 if run(args.seed) else 1


COMMANDS = {
    "approx": cmd_approx,
    "sweep": cmd_sweep,
    "pca": cmd_pca,
    "convert": cmd_convert,
    "selftest": cmd_selftest,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"talg: configuration error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"talg: data error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"talg: data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
