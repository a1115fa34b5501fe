"""Command line front end: ``qhosvd {fuse,denoise,metrics,decompose}``.

Images go to files; stdout carries a single JSON manifest line per run
(``metrics`` prints its ``psnr=... ssim=...`` line first).  Exit status is
0 on success, 1 on processing errors and 2 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time


from . import __version__
from .decomposition import full_modes, qhosvd, reconstruct
from .denoise import DenoiseConfig, block_match, denoise
from .errors import QhosvdError
from .fusion import FusionConfig, fuse
from .imaging import encode_rgb, read_image, write_image
from .metrics import add_gaussian_noise, format_psnr, psnr, ssim

THREADS_ENV = "QHOSVD_THREADS"
HELP_WIDTH = 88


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _formatter(prog):
    return argparse.HelpFormatter(prog, width=HELP_WIDTH)


def _add_threads(p):
    p.add_argument(
        "--threads",
        type=int,
        default=None,
        help=f"worker threads over patch groups (default: ${THREADS_ENV}, else CPU count)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qhosvd",
        description="Quaternion HOSVD color image fusion, denoising and inspection.",
        formatter_class=_formatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("fuse", help="fuse multi-focus color images", formatter_class=_formatter)
    p.add_argument("--inputs", nargs="+", required=True, metavar="PATH", help="source images, same extents (required)")
    p.add_argument("--output", required=True, metavar="PATH", help="fused image, PNG or PPM (required)")
    p.add_argument("--patch", type=int, default=25, help="patch side in pixels (default: %(default)s)")
    p.add_argument("--overlap", type=int, default=6, help="overlap between patches (default: %(default)s)")
    p.add_argument(
        "--tie-tolerance", type=float, default=1e-12, help="relative L1 tie tolerance (default: %(default)s)"
    )
    p.add_argument(
        "--allow-single", action="store_true", help="accept one input and pass it through (default: off)"
    )
    _add_threads(p)

    p = sub.add_parser("denoise", help="denoise a color image", formatter_class=_formatter)
    p.add_argument("--input", required=True, metavar="PATH", help="noisy image, or clean image with --add-noise (required)")
    p.add_argument("--output", required=True, metavar="PATH", help="denoised image, PNG or PPM (required)")
    p.add_argument("--sigma", type=float, required=True, help="noise standard deviation in [0, 255] units (required)")
    p.add_argument("--patch", type=int, default=None, help="patch side w (default: from sigma schedule)")
    p.add_argument("--group", type=int, default=None, help="similar patches K (default: from sigma schedule)")
    p.add_argument("--iters", type=int, default=None, help="iterations (default: from sigma schedule)")
    p.add_argument("--eta", type=float, default=None, help="threshold scale (default: from sigma schedule)")
    p.add_argument("--delta", type=float, default=0.1, help="relaxation parameter (default: %(default)s)")
    p.add_argument("--window", type=int, default=30, help="search window side W (default: %(default)s)")
    p.add_argument("--stride", type=int, default=4, help="reference patch stride (default: %(default)s)")
    p.add_argument("--tau", type=float, default=None, help="fixed hard threshold (default: eta-sigma rule)")
    p.add_argument("--add-noise", action="store_true", help="add seeded Gaussian noise first (default: off)")
    p.add_argument("--seed", type=int, default=0, help="noise seed for --add-noise (default: %(default)s)")
    p.add_argument("--noisy-output", metavar="PATH", default=None, help="also write the noisy image (default: none)")
    _add_threads(p)

    p = sub.add_parser("metrics", help="PSNR and SSIM of two images", formatter_class=_formatter)
    p.add_argument("--ref", required=True, metavar="PATH", help="reference image (required)")
    p.add_argument("--test", required=True, metavar="PATH", help="image under test (required)")

    p = sub.add_parser("decompose", help="QHOSVD of an image patch group or whole image", formatter_class=_formatter)
    p.add_argument("--input", required=True, metavar="PATH", help="image to decompose (required)")
    p.add_argument("--csv", required=True, metavar="PATH", help="CSV of per-mode singular values (required)")
    p.add_argument(
        "--tensor", choices=("group", "image"), default="group",
        help="w x w x K similar-patch group or the whole image matrix (default: %(default)s)",
    )
    p.add_argument("--anchor", type=int, nargs=2, default=[0, 0], metavar=("ROW", "COL"),
                   help="reference patch anchor for --tensor group (default: 0 0)")
    p.add_argument("--patch", type=int, default=6, help="patch side w (default: %(default)s)")
    p.add_argument("--group", type=int, default=70, help="similar patches K (default: %(default)s)")
    p.add_argument("--window", type=int, default=30, help="search window side W (default: %(default)s)")
    _add_threads(p)
    return parser


class _Run:
    def __init__(self, command: str):
        self.command = command
        self.start = time.perf_counter()
        self.config: dict = {}
        self.inputs: dict = {}
        self.outputs: list = []
        self.results: dict = {}
        self.threads = 1

    def add_input(self, path):
        self.inputs[str(path)] = file_digest(path)

    def add_output(self, path):
        self.outputs.append({"path": str(path), "sha256": file_digest(path)})

    def manifest(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "results": self.results,
            "runtime": {"duration_s": round(time.perf_counter() - self.start, 6), "threads": self.threads},
        }


def _threads(args) -> int:
    return args.threads if getattr(args, "threads", None) else default_threads()


def _json_number(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return v


def _cmd_fuse(args, run: _Run):
    cfg = FusionConfig(args.patch, args.patch, args.overlap, args.tie_tolerance)
    run.threads = _threads(args)
    run.config = {
        "patch_rows": cfg.patch_rows,
        "patch_cols": cfg.patch_cols,
        "overlap": cfg.overlap,
        "stride": list(cfg.stride),
        "tie_tolerance": cfg.tie_tolerance,
        "allow_single": args.allow_single,
    }
    sources = []
    for path in args.inputs:
        sources.append(read_image(path))
        run.add_input(path)
    fused = fuse(sources, cfg, allow_single=args.allow_single, threads=run.threads)
    write_image(args.output, fused)
    run.add_output(args.output)


def _cmd_denoise(args, run: _Run):
    cfg = DenoiseConfig.for_sigma(
        args.sigma,
        patch_size=args.patch,
        group_size=args.group,
        iterations=args.iters,
        eta=args.eta,
        delta=args.delta,
        search_window=args.window,
        ref_stride=args.stride,
        tau=args.tau,
    )
    run.threads = _threads(args)
    run.config = cfg.as_dict()
    run.config.update({"add_noise": args.add_noise, "seed": args.seed if args.add_noise else None})
    img = read_image(args.input)
    run.add_input(args.input)
    clean = None
    if args.add_noise:
        clean = img
        img = add_gaussian_noise(clean, args.sigma, args.seed)
        if args.noisy_output:
            write_image(args.noisy_output, img)
            run.add_output(args.noisy_output)

    def progress(i, n):
        print(f"denoise: iteration {i}/{n}", file=sys.stderr, flush=True)

    out = denoise(img, cfg, threads=run.threads, progress=progress)
    write_image(args.output, out)
    run.add_output(args.output)
    if clean is not None:
        run.results = {
            "psnr_noisy": _json_number(psnr(clean, img)),
            "psnr_denoised": _json_number(psnr(clean, out)),
            "ssim_noisy": ssim(clean, img),
            "ssim_denoised": ssim(clean, out),
        }


def _cmd_metrics(args, run: _Run):
    a, b = read_image(args.ref), read_image(args.test)
    run.add_input(args.ref)
    run.add_input(args.test)
    p, s = psnr(a, b), ssim(a, b)
    print(f"psnr={format_psnr(p)} ssim={round(s, 6)}")
    run.results = {"psnr": _json_number(p), "ssim": s}


def _cmd_decompose(args, run: _Run):
    img = read_image(args.input)
    run.add_input(args.input)
    q = encode_rgb(img)
    if args.tensor == "group":
        cfg = DenoiseConfig(sigma=0.0, patch_size=args.patch, group_size=args.group, search_window=args.window)
        group = block_match(q, tuple(args.anchor), cfg)
        tensor = group.tensor
        run.config = {
            "tensor": "group",
            "anchor": list(args.anchor),
            "patch_size": args.patch,
            "group_size": args.group,
            "search_window": args.window,
        }
        run.results["padded"] = group.padded
    else:
        tensor = q.as_tensor()
        run.config = {"tensor": "image"}
    modes = full_modes(tensor.ndim)
    run.config["modes"] = list(modes)
    f = qhosvd(tensor, modes)
    rec = reconstruct(f)
    norm = tensor.norm()
    residual = (rec - tensor).norm() / norm if norm > 0 else (rec - tensor).norm()
    with open(args.csv, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["mode", "index", "sigma"])
        for mode in sorted(modes):
            for i, s in enumerate(f.singular_values(mode), start=1):
                w.writerow([mode, i, repr(float(s))])
    run.add_output(args.csv)
    run.results.update(
        {
            "dims": list(tensor.shape),
            "residual": residual,
            "ranks": {str(m): f.rank(m) for m in sorted(modes)},
        }
    )


COMMANDS = {
    "fuse": _cmd_fuse,
    "denoise": _cmd_denoise,
    "metrics": _cmd_metrics,
    "decompose": _cmd_decompose,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    job = _Run(args.command)
    try:
        COMMANDS[args.command](args, job)
    except (QhosvdError, OSError) as exc:
        print(f"qhosvd {args.command}: error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(job.manifest(), sort_keys=True))
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
