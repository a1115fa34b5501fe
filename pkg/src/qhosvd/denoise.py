"""Nonlocal color image denoising with group-wise QHOSVD hard thresholding.

For every reference patch the ``K`` most similar patches inside a local
search window are stacked into a ``w x w x K`` quaternion tensor.  The
tensor is fully decomposed, core entries with modulus below
``tau = eta * sigma * sqrt(2 ln(w^2 K))`` are zeroed, and the inverse
transform gives denoised copies of all ``K`` patches.  Overlapping
estimates are averaged, and the whole pass is repeated with iterative
regularization ``Y_g = X + delta (Y - X)``.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .decomposition import full_modes, hard_threshold_core, qhosvd, reconstruct
from .errors import ParameterError, ShapeError
from .imaging import PatchAccumulator, as_rgb, decode, encode_rgb, grid_anchors
from .quaternion import QuaternionMatrix, QuaternionTensor

__all__ = [
    "DenoiseConfig",
    "SimilarGroup",
    "schedule_for_sigma",
    "threshold",
    "block_match",
    "denoise_group",
    "denoise_pass",
    "denoise",
]

log = logging.getLogger(__name__)

# sigma -> (patch size, group size, iterations, eta)
SCHEDULE = {
    10.0: (6, 70, 8, 0.70),
    20.0: (6, 70, 8, 0.55),
    30.0: (7, 90, 14, 0.45),
    50.0: (8, 120, 20, 0.35),
}


def schedule_for_sigma(sigma: float) -> dict:
    """Parameters for ``sigma``, linearly interpolated between table rows.

    Integer parameters are rounded to the nearest integer; values outside
    the table are clamped to the end rows.
    """
    keys = sorted(SCHEDULE)
    rows = np.array([SCHEDULE[k] for k in keys], dtype=float)
    s = float(np.clip(sigma, keys[0], keys[-1]))
    vals = [float(np.interp(s, keys, rows[:, i])) for i in range(4)]
    return {
        "patch_size": int(round(vals[0])),
        "group_size": int(round(vals[1])),
        "iterations": int(round(vals[2])),
        "eta": vals[3],
    }


@dataclass(frozen=True)
class DenoiseConfig:
    sigma: float
    patch_size: int = 6
    group_size: int = 70
    iterations: int = 8
    delta: float = 0.1
    search_window: int = 30
    eta: float = 0.55
    ref_stride: int = 4
    tau: float | None = None  # overrides the statistical threshold when set

    def __post_init__(self):
        if not 0.0 <= self.sigma <= 255.0:
            raise ParameterError(f"sigma must lie in [0, 255], got {self.sigma}")
        if self.patch_size < 1 or self.group_size < 1 or self.iterations < 1 or self.ref_stride < 1:
            raise ParameterError("patch_size, group_size, iterations and ref_stride must be positive")
        if self.search_window < self.patch_size:
            raise ParameterError("search_window must be at least patch_size")
        if not 0.0 < self.delta < 1.0:
            raise ParameterError(f"delta must lie in (0, 1), got {self.delta}")
        if not self.eta > 0.0:
            raise ParameterError(f"eta must be positive, got {self.eta}")
        if self.tau is not None and not self.tau >= 0.0:
            raise ParameterError(f"tau must be nonnegative, got {self.tau}")

    @classmethod
    def for_sigma(cls, sigma: float, **overrides) -> "DenoiseConfig":
        params = schedule_for_sigma(sigma)
        params.update({k: v for k, v in overrides.items() if v is not None})
        return cls(sigma=sigma, **params)

    @property
    def threshold(self) -> float:
        if self.tau is not None:
            return float(self.tau)
        return threshold(self.eta, self.sigma, self.patch_size, self.group_size)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["threshold"] = self.threshold
        return d


def threshold(eta: float, sigma: float, patch_size: int, group_size: int) -> float:
    return eta * sigma * math.sqrt(2.0 * math.log(patch_size * patch_size * group_size))


@dataclass
class SimilarGroup:
    tensor: QuaternionTensor
    member_anchors: list[tuple[int, int]]
    distances: np.ndarray
    padded: bool = False


def _search_range(anchor: int, window: int, last: int) -> tuple[int, int]:
    """Inclusive anchor range of ``window`` positions centered on ``anchor``, shifted into [0, last]."""
    lo = anchor - window // 2
    hi = lo + window - 1
    if lo < 0:
        lo, hi = 0, window - 1
    if hi > last:
        hi = last
        lo = max(0, hi - window + 1)
    return lo, min(hi, last)


@dataclass
class _PatchIndex:
    """Sliding-window view of every w x w patch of an image."""

    planes: np.ndarray
    w: int
    view: np.ndarray = field(init=False)

    def __post_init__(self):
        self.view = sliding_window_view(self.planes, (self.w, self.w), axis=(1, 2))

    @property
    def last(self) -> tuple[int, int]:
        return self.view.shape[1] - 1, self.view.shape[2] - 1


def _match(index: _PatchIndex, ref: tuple[int, int], cfg: DenoiseConfig) -> SimilarGroup:
    w, k = cfg.patch_size, cfg.group_size
    r, c = ref
    last_r, last_c = index.last
    if not (0 <= r <= last_r and 0 <= c <= last_c):
        raise ShapeError(f"reference anchor {ref} does not fit a {w}x{w} patch")
    r0, r1 = _search_range(r, cfg.search_window, last_r)
    c0, c1 = _search_range(c, cfg.search_window, last_c)
    cand = index.view[:, r0 : r1 + 1, c0 : c1 + 1]  # (4, nr, nc, w, w)
    ref_patch = index.view[:, r, c]
    diff = cand - ref_patch[:, None, None]
    dist = np.einsum("aijxy,aijxy->ij", diff, diff).ravel()
    nc = c1 - c0 + 1
    ref_flat = (r - r0) * nc + (c - c0)
    order = np.argsort(dist, kind="stable")
    order = np.concatenate(([ref_flat], order[order != ref_flat]))
    padded = len(order) < k
    if padded:
        order = np.resize(order, k)
    else:
        order = order[:k]
    rows = r0 + order // nc
    cols = c0 + order % nc
    members = [(int(a), int(b)) for a, b in zip(rows, cols)]
    stack = np.moveaxis(index.view[:, rows, cols], 1, -1)  # (4, w, w, K)
    d = dist[order].copy()
    d[0] = 0.0
    return SimilarGroup(QuaternionTensor(np.ascontiguousarray(stack)), members, d, padded)


def block_match(q: QuaternionMatrix, ref_anchor: tuple[int, int], cfg: DenoiseConfig) -> SimilarGroup:
    """Gather the ``K`` patches nearest to the reference in squared Frobenius distance.

    Candidates are all patches (pixel step 1) whose anchors fall in the
    ``W x W`` window around the reference anchor, shifted inside the image.
    The reference comes first; ties keep row-major order.  With fewer
    candidates than ``K`` the ranked list is repeated and ``padded`` is set.
    """
    if cfg.patch_size > min(q.shape):
        raise ShapeError(f"patch size {cfg.patch_size} exceeds image {q.shape}")
    return _match(_PatchIndex(q.planes, cfg.patch_size), ref_anchor, cfg)


def denoise_group(group: SimilarGroup, cfg: DenoiseConfig) -> QuaternionTensor:
    """Hard-threshold the group's QHOSVD core and invert; returns the w x w x K estimate."""
    f = qhosvd(group.tensor, full_modes(3))
    core = hard_threshold_core(f.core, cfg.threshold)
    return reconstruct(f.with_core(core))


def _reference_anchors(canvas, cfg: DenoiseConfig) -> list[tuple[int, int]]:
    return grid_anchors(canvas, (cfg.patch_size, cfg.patch_size), cfg.ref_stride)


def denoise_pass(q: QuaternionMatrix, cfg: DenoiseConfig, threads: int = 1, chunk: int = 64) -> QuaternionMatrix:
    """One round of matching, group filtering and overlap averaging."""
    index = _PatchIndex(np.ascontiguousarray(q.planes), cfg.patch_size)
    refs = _reference_anchors(q.shape, cfg)

    def work(ref):
        group = _match(index, ref, cfg)
        return denoise_group(group, cfg).planes, group.member_anchors

    acc = PatchAccumulator(q.shape)
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for start in range(0, len(refs), chunk):
            batch = refs[start : start + chunk]
            results = pool.map(work, batch) if pool else map(work, batch)
            # accumulate in reference order so the sum is independent of scheduling
            for stack, anchors in results:
                acc.add_stack(stack, anchors)
    finally:
        if pool:
            pool.shutdown()
    return acc.result()


def regularize(noisy: QuaternionMatrix, estimate: QuaternionMatrix, delta: float) -> QuaternionMatrix:
    return QuaternionMatrix(estimate.planes + delta * (noisy.planes - estimate.planes))


def denoise_quaternion(y: QuaternionMatrix, cfg: DenoiseConfig, threads: int = 1, progress=None) -> QuaternionMatrix:
    if cfg.patch_size > min(y.shape):
        raise ShapeError(f"image {y.shape} is smaller than a {cfg.patch_size}x{cfg.patch_size} patch")
    x = y
    for it in range(1, cfg.iterations + 1):
        x = denoise_pass(regularize(y, x, cfg.delta), cfg, threads)
        log.debug("iteration %d/%d done", it, cfg.iterations)
        if progress is not None:
            progress(it, cfg.iterations)
    return x


def denoise(noisy, cfg: DenoiseConfig, threads: int = 1, progress=None) -> np.ndarray:
    """Denoise an RGB image (float, [0, 255]); returns a float RGB image."""
    y = encode_rgb(as_rgb(noisy))
    return decode(denoise_quaternion(y, cfg, threads, progress))


def with_overrides(cfg: DenoiseConfig, **kw) -> DenoiseConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
