"""Quaternion scalars, matrices and tensors stored as four real planes.

A quaternion array of shape ``(N1, ..., NL)`` keeps its components in a
single float64 buffer of shape ``(4, N1, ..., NL)`` ordered ``w, x, y, z``
(real, i, j, k).  Products go through the 4x4 real left-multiplication
matrix of each entry, so a quaternion matrix product becomes one real
``tensordot`` over the 16 Hamilton terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError

__all__ = [
    "QuaternionScalar",
    "QuaternionTensor",
    "QuaternionMatrix",
    "quaternion_multiply",
    "conjugate_modulus",
    "hamilton",
    "left_matrix",
    "matrix_multiply",
    "conjugate_transpose",
    "transpose",
    "frobenius_norm",
    "l1_norm",
    "inner",
    "norms_and_inner",
]


@dataclass(frozen=True)
class QuaternionScalar:
    """``w + x i + y j + z k``."""

    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_array(cls, a) -> "QuaternionScalar":
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def conjugate(self) -> "QuaternionScalar":
        return QuaternionScalar(self.w, -self.x, -self.y, -self.z)

    @property
    def modulus(self) -> float:
        return math.hypot(self.w, self.x, self.y, self.z)

    @property
    def is_pure(self) -> bool:
        return self.w == 0.0

    def __mul__(self, other):
        if isinstance(other, QuaternionScalar):
            return quaternion_multiply(self, other)
        if isinstance(other, (int, float, np.floating, np.integer)):
            s = float(other)
            return QuaternionScalar(self.w * s, self.x * s, self.y * s, self.z * s)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return self * other
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = QuaternionScalar(float(other))
        if not isinstance(other, QuaternionScalar):
            return NotImplemented
        return QuaternionScalar(self.w + other.w, self.x + other.x, self.y + other.y, self.z + other.z)

    __radd__ = __add__

    def __neg__(self):
        return QuaternionScalar(-self.w, -self.x, -self.y, -self.z)

    def __sub__(self, other):
        return self + (-other)

    def __repr__(self) -> str:
        return f"QuaternionScalar({self.w!r}, {self.x!r}, {self.y!r}, {self.z!r})"


def quaternion_multiply(a: QuaternionScalar, b: QuaternionScalar) -> QuaternionScalar:
    """Hamilton product ``a * b``."""
    return QuaternionScalar(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )


def conjugate_modulus(q: QuaternionScalar) -> tuple[QuaternionScalar, float]:
    return q.conjugate(), q.modulus


def hamilton(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Entrywise Hamilton product of two plane arrays (broadcasting after axis 0)."""
    pw, px, py, pz = p
    qw, qx, qy, qz = q
    return np.stack(
        [
            pw * qw - px * qx - py * qy - pz * qz,
            pw * qx + px * qw + py * qz - pz * qy,
            pw * qy - px * qz + py * qw + pz * qx,
            pw * qz + px * qy - py * qx + pz * qw,
        ]
    )


def left_matrix(planes: np.ndarray) -> np.ndarray:
    """Real left-multiplication form of a quaternion matrix.

    For planes of shape ``(4, M, N)`` returns ``L`` of shape ``(4, M, 4, N)``
    with ``L[a, m, b, n]`` the ``(a, b)`` entry of the 4x4 matrix that maps
    the components of ``p`` to those of ``u[m, n] * p``.
    """
    w, x, y, z = planes
    return np.stack(
        [
            np.stack([w, -x, -y, -z], axis=1),
            np.stack([x, w, -z, y], axis=1),
            np.stack([y, z, w, -x], axis=1),
            np.stack([z, -y, x, w], axis=1),
        ]
    )


class QuaternionTensor:
    """Dense quaternion array of order ``L >= 1``.

    ``planes`` has shape ``(4, N1, ..., NL)``.  Instances are treated as
    immutable by every function in this package.
    """

    __slots__ = ("planes",)

    def __init__(self, planes):
        planes = np.asarray(planes, dtype=np.float64)
        if planes.ndim < 2 or planes.shape[0] != 4:
            raise ShapeError(f"expected planes of shape (4, N1, ...), got {planes.shape}")
        self.planes = planes

    @classmethod
    def from_components(cls, w=None, x=None, y=None, z=None):
        parts = [w, x, y, z]
        shape = next(np.shape(p) for p in parts if p is not None)
        planes = np.zeros((4,) + tuple(shape))
        for c, p in enumerate(parts):
            if p is not None:
                planes[c] = p
        return cls(planes)

    @classmethod
    def zeros(cls, shape):
        return cls(np.zeros((4,) + tuple(shape)))

    @classmethod
    def from_scalars(cls, rows):
        """Build from a nested list of :class:`QuaternionScalar` (or reals)."""
        arr = np.asarray(
            [[_as_scalar(q).as_array() for q in row] for row in rows], dtype=float
        )
        return cls(np.moveaxis(arr, -1, 0))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.planes.shape[1:]

    @property
    def ndim(self) -> int:
        return self.planes.ndim - 1

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def w(self):
        return self.planes[0]

    @property
    def x(self):
        return self.planes[1]

    @property
    def y(self):
        return self.planes[2]

    @property
    def z(self):
        return self.planes[3]

    def entry(self, *index) -> QuaternionScalar:
        return QuaternionScalar.from_array(self.planes[(slice(None),) + tuple(index)])

    def conj(self):
        p = self.planes.copy()
        p[1:] *= -1.0
        return type(self)(p)

    def modulus(self) -> np.ndarray:
        return np.sqrt(np.einsum("a...,a...->...", self.planes, self.planes))

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.planes * self.planes)))

    def is_pure(self, atol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.planes[0]) <= atol))

    def as_tensor(self) -> "QuaternionTensor":
        return QuaternionTensor(self.planes)

    def as_matrix(self) -> "QuaternionMatrix":
        return QuaternionMatrix(self.planes)

    def copy(self):
        return type(self)(self.planes.copy())

    def __add__(self, other):
        if not isinstance(other, QuaternionTensor):
            return NotImplemented
        _same_shape(self, other)
        return type(self)(self.planes + other.planes)

    def __sub__(self, other):
        if not isinstance(other, QuaternionTensor):
            return NotImplemented
        _same_shape(self, other)
        return type(self)(self.planes - other.planes)

    def __neg__(self):
        return type(self)(-self.planes)

    def __mul__(self, c):
        # real scalars only; they commute with every quaternion
        if isinstance(c, (int, float, np.floating, np.integer)):
            return type(self)(self.planes * float(c))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, c):
        if isinstance(c, (int, float, np.floating, np.integer)):
            return type(self)(self.planes / float(c))
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, QuaternionTensor):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.planes, other.planes))

    __hash__ = None

    def __repr__(self) -> str:
        return f"{type(self).__name__}(shape={self.shape})"


class QuaternionMatrix(QuaternionTensor):
    """Order-2 quaternion array."""

    __slots__ = ()

    def __init__(self, planes):
        super().__init__(planes)
        if self.planes.ndim != 3:
            raise ShapeError(f"a quaternion matrix needs planes of shape (4, M, N), got {self.planes.shape}")

    @classmethod
    def identity(cls, n: int) -> "QuaternionMatrix":
        p = np.zeros((4, n, n))
        p[0] = np.eye(n)
        return cls(p)

    @property
    def rows(self) -> int:
        return self.planes.shape[1]

    @property
    def cols(self) -> int:
        return self.planes.shape[2]

    @property
    def H(self) -> "QuaternionMatrix":
        return conjugate_transpose(self)

    @property
    def T(self) -> "QuaternionMatrix":
        return transpose(self)

    def __matmul__(self, other):
        if not isinstance(other, QuaternionMatrix):
            return NotImplemented
        return matrix_multiply(self, other)


def _as_scalar(q) -> QuaternionScalar:
    if isinstance(q, QuaternionScalar):
        return q
    return QuaternionScalar(float(q))


def _same_shape(a: QuaternionTensor, b: QuaternionTensor) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")


def matrix_multiply(a: QuaternionMatrix, b: QuaternionMatrix) -> QuaternionMatrix:
    """``C[m, n] = sum_p A[m, p] * B[p, n]`` with ``A`` entries on the left."""
    if a.cols != b.rows:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return QuaternionMatrix(np.tensordot(left_matrix(a.planes), b.planes, axes=([2, 3], [0, 1])))


def conjugate_transpose(a: QuaternionMatrix) -> QuaternionMatrix:
    p = np.swapaxes(a.planes, 1, 2).copy()
    p[1:] *= -1.0
    return QuaternionMatrix(p)


def transpose(a: QuaternionMatrix) -> QuaternionMatrix:
    """Plain transpose, entries not conjugated."""
    return QuaternionMatrix(np.swapaxes(a.planes, 1, 2).copy())


def frobenius_norm(a: QuaternionTensor) -> float:
    return a.norm()


def l1_norm(a: QuaternionTensor) -> float:
    return float(np.sum(a.modulus()))


def inner(a: QuaternionTensor, b: QuaternionTensor) -> QuaternionScalar:
    """``<A, B> = sum a * conj(b)`` over all entries."""
    _same_shape(a, b)
    bc = b.planes.copy()
    bc[1:] *= -1.0
    prod = hamilton(a.planes, bc)
    return QuaternionScalar.from_array(prod.reshape(4, -1).sum(axis=1))


def norms_and_inner(a: QuaternionTensor, b: QuaternionTensor) -> tuple[float, float, QuaternionScalar]:
    return frobenius_norm(a), l1_norm(a), inner(a, b)
