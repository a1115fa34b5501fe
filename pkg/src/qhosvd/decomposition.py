"""Quaternion higher-order SVD.

Modes are processed in the order given (descending for the full
decomposition).  The factor of each mode is the left singular basis of the
tensor with every earlier factor already applied as a conjugate transpose
on its own mode, and the core is the tensor with all of those conjugate
transposes applied in the same order.  Reconstruction applies the factors
back in ascending mode order.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ModeError, ParameterError, ShapeError
from .qsvd import left_singular_vectors, qsvd
from .quaternion import QuaternionMatrix, QuaternionTensor
from .tensor import mode_product, slice_norms, unfold

__all__ = ["QhosvdFactors", "qhosvd", "full_modes", "reconstruct", "hard_threshold_core", "stage_left_vectors"]

RANK_RTOL = 1e-10


@dataclass(frozen=True)
class QhosvdFactors:
    core: QuaternionTensor
    factors: list[QuaternionMatrix]
    decomposed_modes: tuple[int, ...]
    mode_singular_values: list[np.ndarray] = field(default_factory=list)

    def factor(self, mode: int) -> QuaternionMatrix:
        return self.factors[self.decomposed_modes.index(mode)]

    def singular_values(self, mode: int) -> np.ndarray:
        return self.mode_singular_values[self.decomposed_modes.index(mode)]

    def rank(self, mode: int) -> int:
        """Number of mode singular values above ``1e-10 * sigma_1``."""
        s = self.singular_values(mode)
        if s.size == 0 or s[0] == 0.0:
            return 0
        return int(np.count_nonzero(s > RANK_RTOL * s[0]))

    def with_core(self, core: QuaternionTensor) -> "QhosvdFactors":
        return QhosvdFactors(core, self.factors, self.decomposed_modes, self.mode_singular_values)


def full_modes(order: int) -> tuple[int, ...]:
    return tuple(range(order, 0, -1))


def stage_left_vectors(m: QuaternionMatrix) -> tuple[QuaternionMatrix, np.ndarray]:
    """Square left singular basis and singular values of a stage unfolding.

    For wide unfoldings the basis is taken from the right factor of the
    conjugate transpose, which avoids building the large right factor.
    """
    if m.rows <= m.cols:
        res = qsvd(m.H, compute_u=False, compute_v=True)
        return res.V, res.singular_values
    return left_singular_vectors(m)


def _validate_modes(t: QuaternionTensor, modes) -> tuple[int, ...]:
    modes = tuple(int(k) for k in modes)
    if not modes:
        raise ModeError("at least one mode is required")
    if len(set(modes)) != len(modes):
        raise ModeError(f"repeated mode in {modes}")
    if any(a < b for a, b in zip(modes, modes[1:])):
        # reconstruction applies factors in ascending order, which only inverts descending processing
        raise ModeError(f"modes must be listed in decreasing order, got {modes}")
    for k in modes:
        if not 1 <= k <= t.ndim:
            raise ModeError(f"mode {k} out of range for an order-{t.ndim} tensor")
    return modes


def qhosvd(t: QuaternionTensor, modes=None) -> QhosvdFactors:
    """Decompose ``t`` along ``modes`` (default: all modes, highest first)."""
    if t.size == 0:
        raise ShapeError("cannot decompose an empty tensor")
    modes = full_modes(t.ndim) if modes is None else _validate_modes(t, modes)

    factors, sigmas = [], []
    work = t
    for k in modes:
        u, s = stage_left_vectors(unfold(work, k))
        n_k = t.shape[k - 1]
        padded = np.zeros(n_k)
        padded[: len(s)] = s
        factors.append(u)
        sigmas.append(padded)
        work = mode_product(work, k, u.H)
    return QhosvdFactors(work, factors, modes, sigmas)


def reconstruct(f: QhosvdFactors) -> QuaternionTensor:
    out = f.core
    for k in sorted(f.decomposed_modes):
        u = f.factor(k)
        if u.shape != (out.shape[k - 1], out.shape[k - 1]):
            raise ShapeError(f"factor {u.shape} does not match mode {k} of core {out.shape}")
        out = mode_product(out, k, u)
    return out


def hard_threshold_core(s: QuaternionTensor, tau: float) -> QuaternionTensor:
    """Zero every entry whose modulus is below ``tau``; survivors are untouched."""
    if not tau >= 0.0:
        raise ParameterError(f"threshold must be nonnegative, got {tau}")
    keep = s.modulus() >= tau
    return QuaternionTensor(np.where(keep, s.planes, 0.0))


def core_slice_norms(f: QhosvdFactors, mode: int) -> np.ndarray:
    return slice_norms(f.core, mode)
