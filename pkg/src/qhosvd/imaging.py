"""RGB <-> pure quaternion encoding, patch grids and image files.

RGB images are float arrays of shape ``(H, W, 3)`` holding values in
``[0, 255]``.  Quantization to 8 bits happens only in :func:`write_image`.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ImageFormatError, IntegrityError, ShapeError
from .quaternion import QuaternionMatrix

__all__ = [
    "as_rgb",
    "encode_rgb",
    "decode",
    "anchor_positions",
    "grid_anchors",
    "PatchGrid",
    "PatchAccumulator",
    "extract_patches",
    "aggregate_patches",
    "read_image",
    "write_image",
]


def as_rgb(img) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ShapeError(f"expected an RGB image of shape (H, W, 3), got {img.shape}")
    return img


def encode_rgb(img) -> QuaternionMatrix:
    """``R i + G j + B k`` per pixel; the real part is zero."""
    img = as_rgb(img)
    planes = np.zeros((4,) + img.shape[:2])
    planes[1:] = np.moveaxis(img, 2, 0)
    return QuaternionMatrix(planes)


def decode(q: QuaternionMatrix) -> np.ndarray:
    """Read R, G, B from the i, j, k parts, drop the real part and clamp."""
    return np.clip(np.moveaxis(q.planes[1:], 0, 2), 0.0, 255.0)


def anchor_positions(extent: int, size: int, stride: int) -> list[int]:
    """Offsets ``0, stride, 2 stride, ...`` plus a final one flush with the border."""
    if size > extent:
        raise ShapeError(f"patch of {size} does not fit in {extent}")
    if stride < 1:
        raise ShapeError(f"stride must be positive, got {stride}")
    last = extent - size
    out = list(range(0, last + 1, stride))
    if out[-1] != last:
        out.append(last)
    return out


def grid_anchors(canvas: tuple[int, int], size: tuple[int, int], stride) -> list[tuple[int, int]]:
    """Row-major anchors; ``stride`` is an int or a (row, col) pair."""
    sr, sc = (stride, stride) if np.isscalar(stride) else stride
    rows = anchor_positions(canvas[0], size[0], int(sr))
    cols = anchor_positions(canvas[1], size[1], int(sc))
    return [(r, c) for r in rows for c in cols]


@dataclass
class PatchGrid:
    patch_rows: int
    patch_cols: int
    positions: list[tuple[int, int]]
    patches: list[QuaternionMatrix]
    canvas_dims: tuple[int, int]

    def with_patches(self, patches) -> "PatchGrid":
        return PatchGrid(self.patch_rows, self.patch_cols, self.positions, list(patches), self.canvas_dims)

    def coverage(self) -> np.ndarray:
        count = np.zeros(self.canvas_dims, dtype=np.int64)
        for r, c in self.positions:
            count[r : r + self.patch_rows, c : c + self.patch_cols] += 1
        return count


def extract_patches(q: QuaternionMatrix, size: tuple[int, int], stride) -> PatchGrid:
    rows, cols = size
    if rows > q.rows or cols > q.cols:
        raise ShapeError(f"patch {size} larger than canvas {q.shape}")
    positions = grid_anchors(q.shape, size, stride)
    patches = [QuaternionMatrix(q.planes[:, r : r + rows, c : c + cols].copy()) for r, c in positions]
    return PatchGrid(rows, cols, positions, patches, tuple(q.shape))


class PatchAccumulator:
    """Sum and count buffers for overlap-averaged aggregation."""

    def __init__(self, canvas_dims: tuple[int, int]):
        self.canvas_dims = tuple(canvas_dims)
        self.total = np.zeros((4,) + self.canvas_dims)
        self.count = np.zeros(self.canvas_dims, dtype=np.int64)

    def add(self, planes: np.ndarray, top: int, left: int) -> None:
        """Add one patch given as planes of shape (4, r, c)."""
        r, c = planes.shape[1:]
        self.total[:, top : top + r, left : left + c] += planes
        self.count[top : top + r, left : left + c] += 1

    def add_stack(self, stack: np.ndarray, anchors) -> None:
        """Add patches ``stack[:, :, :, k]`` (4, r, c, K) at ``anchors[k]``."""
        r, c = stack.shape[1:3]
        for k, (top, left) in enumerate(anchors):
            self.total[:, top : top + r, left : left + c] += stack[:, :, :, k]
            self.count[top : top + r, left : left + c] += 1

    def merge(self, other: "PatchAccumulator") -> None:
        self.total += other.total
        self.count += other.count

    def result(self) -> QuaternionMatrix:
        if np.any(self.count == 0):
            missing = int(np.count_nonzero(self.count == 0))
            raise IntegrityError(f"{missing} canvas pixels are not covered by any patch")
        return QuaternionMatrix(self.total / self.count)


def aggregate_patches(grid: PatchGrid) -> QuaternionMatrix:
    acc = PatchAccumulator(grid.canvas_dims)
    for (r, c), p in zip(grid.positions, grid.patches):
        if p.shape != (grid.patch_rows, grid.patch_cols):
            raise ShapeError(f"patch of shape {p.shape} in a grid of {grid.patch_rows}x{grid.patch_cols} patches")
        acc.add(p.planes, r, c)
    return acc.result()


# ---------------------------------------------------------------------------
# files


def read_image(path) -> np.ndarray:
    """Load an 8-bit RGB PNG or binary PPM as float64 ``(H, W, 3)``."""
    from PIL import Image

    path = Path(path)
    try:
        im = Image.open(path)
        im.load()
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise ImageFormatError(f"cannot read {path}: {exc}") from exc
    if im.mode in ("RGBA", "LA", "PA", "RGBa", "La") or "transparency" in im.info:
        raise ImageFormatError(f"{path}: alpha channels are not supported")
    if im.mode not in ("RGB", "L", "P", "1"):
        raise ImageFormatError(f"{path}: unsupported pixel mode {im.mode!r}; 8-bit RGB expected")
    return np.asarray(im.convert("RGB"), dtype=np.float64)


def quantize(img) -> np.ndarray:
    return np.clip(np.rint(as_rgb(img)), 0, 255).astype(np.uint8)


def write_image(path, img) -> None:
    """Write PNG, or binary PPM (P6) when the suffix is .ppm/.pnm."""
    from PIL import Image

    path = Path(path)
    data = quantize(img)
    if path.suffix.lower() in (".ppm", ".pnm"):
        h, w = data.shape[:2]
        with open(path, "wb") as fh:
            fh.write(b"P6\n%d %d\n255\n" % (w, h))
            fh.write(data.tobytes())
        return
    Image.fromarray(data, mode="RGB").save(path, format="PNG")
