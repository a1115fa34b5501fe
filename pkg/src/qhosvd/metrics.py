"""PSNR, SSIM and seeded Gaussian noise."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .errors import ParameterError, ShapeError
from .imaging import as_rgb

__all__ = ["MetricReport", "psnr", "ssim", "add_gaussian_noise", "report"]

PEAK = 255.0
SSIM_WINDOW = 11
SSIM_STD = 1.5


@dataclass(frozen=True)
class MetricReport:
    psnr_db: float
    ssim: float

    def format(self) -> str:
        return f"psnr={format_psnr(self.psnr_db)} ssim={self.ssim:.6g}"


def format_psnr(v: float) -> str:
    return "inf" if math.isinf(v) else f"{v:.4f}"


def _pair(a, b):
    a, b = as_rgb(a), as_rgb(b)
    if a.shape != b.shape:
        raise ShapeError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def psnr(a, b) -> float:
    """One MSE over all pixels and channels; ``inf`` for identical images."""
    a, b = _pair(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 20.0 * math.log10(PEAK / math.sqrt(mse))


def _gaussian_window() -> np.ndarray:
    r = SSIM_WINDOW // 2
    x = np.arange(-r, r + 1, dtype=float)
    g = np.exp(-(x**2) / (2 * SSIM_STD**2))
    return g / g.sum()


def _filter_valid(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    y = correlate1d(x, g, axis=0, mode="constant")
    y = correlate1d(y, g, axis=1, mode="constant")
    r = len(g) // 2
    return y[r:-r, r:-r]


def ssim(a, b) -> float:
    """Single-scale SSIM, 11x11 Gaussian window (std 1.5), mean over channels."""
    a, b = _pair(a, b)
    if a.shape[0] < SSIM_WINDOW or a.shape[1] < SSIM_WINDOW:
        raise ShapeError(f"SSIM needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {a.shape[:2]}")
    c1 = (0.01 * PEAK) ** 2
    c2 = (0.03 * PEAK) ** 2
    g = _gaussian_window()
    scores = []
    for ch in range(3):
        x, y = a[:, :, ch], b[:, :, ch]
        mx, my = _filter_valid(x, g), _filter_valid(y, g)
        sxx = _filter_valid(x * x, g) - mx * mx
        syy = _filter_valid(y * y, g) - my * my
        sxy = _filter_valid(x * y, g) - mx * my
        num = (2 * mx * my + c1) * (2 * sxy + c2)
        den = (mx * mx + my * my + c1) * (sxx + syy + c2)
        scores.append(np.mean(num / den))
    return float(np.mean(scores))


def add_gaussian_noise(img, sigma: float, seed: int) -> np.ndarray:
    """i.i.d. N(0, sigma^2) per pixel and channel, clamped to [0, 255]."""
    if not sigma >= 0:
        raise ParameterError(f"sigma must be nonnegative, got {sigma}")
    img = as_rgb(img)
    rng = np.random.Generator(np.random.PCG64(seed))
    noise = rng.standard_normal(img.shape)
    return np.clip(img + sigma * noise, 0.0, PEAK)


def report(ref, test) -> MetricReport:
    return MetricReport(psnr(ref, test), ssim(ref, test))
