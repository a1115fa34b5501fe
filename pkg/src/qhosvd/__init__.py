"""Quaternion higher-order SVD and its color image applications."""

__version__ = "0.1.0"

from .decomposition import QhosvdFactors, hard_threshold_core, qhosvd, reconstruct
from .denoise import DenoiseConfig, denoise
from .errors import (
    ConvergenceError,
    ImageFormatError,
    IntegrityError,
    ModeError,
    ParameterError,
    QhosvdError,
    ShapeError,
)
from .fusion import FusionConfig, fuse
from .imaging import decode, encode_rgb, read_image, write_image
from .metrics import add_gaussian_noise, psnr, ssim
from .qsvd import QsvdResult, complex_adjoint, qsvd
from .quaternion import QuaternionMatrix, QuaternionScalar, QuaternionTensor
from .tensor import fold, kronecker, mode_product, unfold

__all__ = [
    "ConvergenceError",
    "DenoiseConfig",
    "FusionConfig",
    "ImageFormatError",
    "IntegrityError",
    "ModeError",
    "ParameterError",
    "QhosvdError",
    "QhosvdFactors",
    "QsvdResult",
    "QuaternionMatrix",
    "QuaternionScalar",
    "QuaternionTensor",
    "ShapeError",
    "add_gaussian_noise",
    "complex_adjoint",
    "decode",
    "denoise",
    "encode_rgb",
    "fold",
    "fuse",
    "hard_threshold_core",
    "kronecker",
    "mode_product",
    "psnr",
    "qhosvd",
    "qsvd",
    "read_image",
    "reconstruct",
    "ssim",
    "unfold",
    "write_image",
]
