"""Mode-k unfolding, folding, k-mode products and the Kronecker product.

Mode indices are 1-based.  The columns of a mode-k unfolding enumerate the
remaining indices ``(n1, ..., n_{k-1}, n_{k+1}, ..., nL)`` with the smallest
mode index varying fastest.  Under this ordering the mode-L unfolding of
``T x_1 U1 ... x_L UL`` equals ``UL ((U_{L-1} kron ... kron U1) T_[L]^T)^T``.
"""
from __future__ import annotations

import numpy as np

from .errors import ModeError, ShapeError
from .quaternion import QuaternionMatrix, QuaternionTensor, left_matrix

__all__ = ["unfold", "fold", "mode_product", "multi_mode_product", "kronecker", "slice_norms", "mode_slice"]


def _check_mode(t: QuaternionTensor, k: int) -> None:
    if not 1 <= k <= t.ndim:
        raise ModeError(f"mode {k} out of range for an order-{t.ndim} tensor")


def unfold(t: QuaternionTensor, k: int) -> QuaternionMatrix:
    _check_mode(t, k)
    moved = np.moveaxis(t.planes, k, 1)
    return QuaternionMatrix(moved.reshape(4, t.shape[k - 1], -1, order="F"))


def fold(m: QuaternionMatrix, k: int, dims) -> QuaternionTensor:
    dims = tuple(int(d) for d in dims)
    if not 1 <= k <= len(dims):
        raise ModeError(f"mode {k} out of range for dims {dims}")
    rest = int(np.prod(dims)) // dims[k - 1] if dims[k - 1] else 0
    if m.shape != (dims[k - 1], rest):
        raise ShapeError(f"matrix of shape {m.shape} cannot fold along mode {k} into {dims}")
    moved_dims = (dims[k - 1],) + dims[: k - 1] + dims[k:]
    moved = m.planes.reshape((4,) + moved_dims, order="F")
    return QuaternionTensor(np.ascontiguousarray(np.moveaxis(moved, 1, k)))


def mode_product(t: QuaternionTensor, k: int, u: QuaternionMatrix) -> QuaternionTensor:
    """``T x_k U``: every mode-k fiber is multiplied by ``U`` from the left."""
    _check_mode(t, k)
    if u.cols != t.shape[k - 1]:
        raise ShapeError(f"cannot apply a {u.shape} matrix along mode {k} of a {t.shape} tensor")
    y = np.tensordot(left_matrix(u.planes), t.planes, axes=([2, 3], [0, k]))
    return QuaternionTensor(np.ascontiguousarray(np.moveaxis(y, 1, k)))


def multi_mode_product(t: QuaternionTensor, steps) -> QuaternionTensor:
    """Apply ``(mode, matrix)`` pairs left to right."""
    for k, u in steps:
        t = mode_product(t, k, u)
    return t


def kronecker(a: QuaternionMatrix, b: QuaternionMatrix) -> QuaternionMatrix:
    """Block ``(i, j)`` is ``a[i, j] * B`` with ``a[i, j]`` on the left."""
    la = left_matrix(a.planes)  # (4, Ma, 4, Na)
    k = np.einsum("aibj,bmn->aimjn", la, b.planes)
    return QuaternionMatrix(k.reshape(4, a.rows * b.rows, a.cols * b.cols))


def mode_slice(t: QuaternionTensor, k: int, index: int) -> QuaternionTensor:
    """Sub-tensor with mode ``k`` fixed at 0-based ``index``."""
    _check_mode(t, k)
    return QuaternionTensor(np.take(t.planes, [index], axis=k))


def slice_norms(t: QuaternionTensor, k: int) -> np.ndarray:
    """Frobenius norms of the mode-k slices ``T_{n_k = n}``, n = 1..N_k."""
    _check_mode(t, k)
    axes = tuple(a for a in range(t.planes.ndim) if a != k)
    return np.sqrt(np.sum(t.planes * t.planes, axis=axes))
