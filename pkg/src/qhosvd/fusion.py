"""Multi-focus color image fusion.

Each set of co-located source patches is stacked into an ``M1 x M2 x K``
quaternion tensor and decomposed along modes 2 and 1 only, so every source
keeps its own frontal core slice as a feature over a shared basis.  The
slice with the largest L1 norm wins (the mean of all slices when every
norm ties), and the fused patches are overlap-averaged back into an image.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .decomposition import qhosvd
from .errors import ParameterError, ShapeError
from .imaging import PatchAccumulator, as_rgb, decode, encode_rgb, grid_anchors
from .quaternion import QuaternionMatrix, QuaternionTensor, transpose

__all__ = ["FusionConfig", "PatchStack", "fuse", "fuse_group", "select_coefficients", "slice_l1_norms"]

FUSION_MODES = (2, 1)


@dataclass(frozen=True)
class FusionConfig:
    patch_rows: int = 25
    patch_cols: int = 25
    overlap: int = 6
    tie_tolerance: float = 1e-12

    def __post_init__(self):
        if self.patch_rows < 1 or self.patch_cols < 1:
            raise ParameterError("patch extents must be positive")
        if not 0 <= self.overlap < min(self.patch_rows, self.patch_cols):
            raise ParameterError(
                f"overlap must lie in [0, {min(self.patch_rows, self.patch_cols)}), got {self.overlap}"
            )
        if self.tie_tolerance < 0:
            raise ParameterError("tie_tolerance must be nonnegative")

    @property
    def stride(self) -> tuple[int, int]:
        return self.patch_rows - self.overlap, self.patch_cols - self.overlap


@dataclass(frozen=True)
class PatchStack:
    tensor: QuaternionTensor

    @property
    def source_count(self) -> int:
        return self.tensor.shape[2]

    @classmethod
    def from_patches(cls, patches) -> "PatchStack":
        return cls(QuaternionTensor(np.stack([p.planes for p in patches], axis=-1)))


def slice_l1_norms(core: QuaternionTensor) -> np.ndarray:
    return core.modulus().sum(axis=(0, 1))


def _ties_all(norms: np.ndarray, tol: float) -> bool:
    top = float(norms.max())
    return float(norms.max() - norms.min()) <= tol * max(top, np.finfo(float).tiny)


def select_coefficients(core: QuaternionTensor, tie_tolerance: float = 1e-12) -> QuaternionMatrix:
    """Frontal slice with the largest L1 norm, or the slice mean if all norms tie.

    Partial ties resolve to the first slice within ``tie_tolerance`` of the
    maximum.
    """
    if core.ndim != 3:
        raise ShapeError(f"expected an order-3 core, got order {core.ndim}")
    norms = slice_l1_norms(core)
    if _ties_all(norms, tie_tolerance):
        return QuaternionMatrix(core.planes.mean(axis=3))
    top = norms.max()
    xi = int(np.flatnonzero(norms >= top - tie_tolerance * top)[0])
    return QuaternionMatrix(core.planes[:, :, :, xi].copy())


def fuse_group(stack: PatchStack, cfg: FusionConfig = FusionConfig()) -> QuaternionMatrix:
    f = qhosvd(stack.tensor, FUSION_MODES)
    sf = select_coefficients(f.core, cfg.tie_tolerance)
    u1, u2 = f.factor(1), f.factor(2)
    return transpose(u2 @ transpose(u1 @ sf))


def _check_sources(sources, allow_single: bool) -> list[np.ndarray]:
    sources = [as_rgb(s) for s in sources]
    if not sources:
        raise ParameterError("no source images")
    if len(sources) < 2 and not allow_single:
        raise ParameterError("fusion needs at least two sources (pass allow_single for passthrough)")
    shape = sources[0].shape
    for s in sources[1:]:
        if s.shape != shape:
            raise ShapeError(f"source extents differ: {shape} vs {s.shape}")
    return sources


def fuse(sources, cfg: FusionConfig = FusionConfig(), *, allow_single: bool = False, threads: int = 1) -> np.ndarray:
    """Fuse equally sized RGB images; returns a float RGB image."""
    sources = _check_sources(sources, allow_single)
    planes = np.stack([encode_rgb(s).planes for s in sources], axis=-1)  # (4, H, W, K)
    canvas = planes.shape[1:3]
    pr, pc = cfg.patch_rows, cfg.patch_cols
    if pr > canvas[0] or pc > canvas[1]:
        raise ShapeError(f"patch {pr}x{pc} larger than image {canvas[0]}x{canvas[1]}")
    anchors = grid_anchors(canvas, (pr, pc), cfg.stride)

    def work(anchor):
        r, c = anchor
        stack = PatchStack(QuaternionTensor(planes[:, r : r + pr, c : c + pc, :]))
        return fuse_group(stack, cfg).planes

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            fused = list(pool.map(work, anchors))
    else:
        fused = [work(a) for a in anchors]

    acc = PatchAccumulator(canvas)
    for (r, c), p in zip(anchors, fused):
        acc.add(p, r, c)
    return decode(acc.result())
