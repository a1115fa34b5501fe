"""Quaternion singular value decomposition ``Q = U diag(s) V^H``.

The matrix is reduced to a real nonnegative upper-bidiagonal form by
quaternion Householder reflectors, each followed by a unit-quaternion
phase scaling of one row or column.  The real bidiagonal matrix is then
diagonalized by Golub-Kahan implicit-shift QR sweeps and the real
rotations are folded back into the quaternion factors.

Wide matrices are handled through their conjugate transpose, so the
kernels only ever see ``M >= N``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConvergenceError, ShapeError
from .quaternion import QuaternionMatrix, conjugate_transpose

__all__ = ["QsvdResult", "qsvd", "singular_values", "left_singular_vectors", "complex_adjoint"]

EPS = np.finfo(np.float64).eps
SWEEPS_PER_VALUE = 30


@dataclass(frozen=True)
class QsvdResult:
    U: QuaternionMatrix | None
    singular_values: np.ndarray
    V: QuaternionMatrix | None

    def sigma_matrix(self) -> QuaternionMatrix:
        m = self.U.rows if self.U is not None else None
        n = self.V.rows if self.V is not None else None
        if m is None or n is None:
            raise ValueError("both factors are needed to build the full Sigma")
        p = np.zeros((4, m, n))
        k = len(self.singular_values)
        p[0, np.arange(k), np.arange(k)] = self.singular_values
        return QuaternionMatrix(p)

    def reconstruct(self) -> QuaternionMatrix:
        return self.U @ self.sigma_matrix() @ self.V.H


# ---------------------------------------------------------------------------
# numba kernels; quaternions are passed as four floats


@njit(cache=True, inline="always")
def _qmul(aw, ax, ay, az, bw, bx, by, bz):
    return (
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    )


@njit(cache=True)
def _householder(x):
    """Reflector for the quaternion vector ``x`` of shape (4, n).

    Returns ``(v, beta, alpha, u)`` with ``(I - beta v v^H) x = -u alpha e1``,
    ``alpha = ||x||`` and ``u`` the unit phase of ``x[0]``.  ``beta == 0``
    flags a zero vector.
    """
    n = x.shape[1]
    v = x.copy()
    alpha = 0.0
    for i in range(n):
        alpha += x[0, i] ** 2 + x[1, i] ** 2 + x[2, i] ** 2 + x[3, i] ** 2
    alpha = np.sqrt(alpha)
    u = np.zeros(4)
    if alpha == 0.0:
        u[0] = 1.0
        return v, 0.0, 0.0, u
    a0 = np.sqrt(x[0, 0] ** 2 + x[1, 0] ** 2 + x[2, 0] ** 2 + x[3, 0] ** 2)
    if a0 == 0.0:
        u[0] = 1.0
    else:
        for c in range(4):
            u[c] = x[c, 0] / a0
    for c in range(4):
        v[c, 0] += u[c] * alpha
    beta = 1.0 / (alpha * alpha + alpha * a0)
    return v, beta, alpha, u


@njit(cache=True)
def _reflect_left(a, v, beta, r0, c0):
    """``A[r0:, c0:] <- (I - beta v v^H) A[r0:, c0:]``."""
    m = v.shape[1]
    for j in range(c0, a.shape[2]):
        sw = 0.0
        sx = 0.0
        sy = 0.0
        sz = 0.0
        for i in range(m):
            tw, tx, ty, tz = _qmul(v[0, i], -v[1, i], -v[2, i], -v[3, i],
                                   a[0, r0 + i, j], a[1, r0 + i, j], a[2, r0 + i, j], a[3, r0 + i, j])
            sw += tw
            sx += tx
            sy += ty
            sz += tz
        if sw == 0.0 and sx == 0.0 and sy == 0.0 and sz == 0.0:
            continue
        for i in range(m):
            tw, tx, ty, tz = _qmul(v[0, i], v[1, i], v[2, i], v[3, i], sw, sx, sy, sz)
            a[0, r0 + i, j] -= beta * tw
            a[1, r0 + i, j] -= beta * tx
            a[2, r0 + i, j] -= beta * ty
            a[3, r0 + i, j] -= beta * tz


@njit(cache=True)
def _reflect_right(a, v, beta, r0, c0):
    """``A[r0:, c0:] <- A[r0:, c0:] (I - beta v v^H)``."""
    m = v.shape[1]
    for r in range(r0, a.shape[1]):
        sw = 0.0
        sx = 0.0
        sy = 0.0
        sz = 0.0
        for i in range(m):
            tw, tx, ty, tz = _qmul(a[0, r, c0 + i], a[1, r, c0 + i], a[2, r, c0 + i], a[3, r, c0 + i],
                                   v[0, i], v[1, i], v[2, i], v[3, i])
            sw += tw
            sx += tx
            sy += ty
            sz += tz
        if sw == 0.0 and sx == 0.0 and sy == 0.0 and sz == 0.0:
            continue
        for i in range(m):
            tw, tx, ty, tz = _qmul(sw, sx, sy, sz, v[0, i], -v[1, i], -v[2, i], -v[3, i])
            a[0, r, c0 + i] -= beta * tw
            a[1, r, c0 + i] -= beta * tx
            a[2, r, c0 + i] -= beta * ty
            a[3, r, c0 + i] -= beta * tz


@njit(cache=True)
def _scale_row_left(a, row, c0, qw, qx, qy, qz):
    for j in range(c0, a.shape[2]):
        w, x, y, z = _qmul(qw, qx, qy, qz, a[0, row, j], a[1, row, j], a[2, row, j], a[3, row, j])
        a[0, row, j] = w
        a[1, row, j] = x
        a[2, row, j] = y
        a[3, row, j] = z


@njit(cache=True)
def _scale_col_right(a, col, r0, qw, qx, qy, qz):
    for r in range(r0, a.shape[1]):
        w, x, y, z = _qmul(a[0, r, col], a[1, r, col], a[2, r, col], a[3, r, col], qw, qx, qy, qz)
        a[0, r, col] = w
        a[1, r, col] = x
        a[2, r, col] = y
        a[3, r, col] = z


@njit(cache=True)
def _bidiagonalize(a, want_u, want_v):
    """Reduce tall ``a`` (4, M, N), M >= N, in place.

    Returns ``(d, e, U, V)`` with ``a_in = U B V^H`` where ``B`` is real upper
    bidiagonal with diagonal ``d >= 0`` and superdiagonal ``e >= 0``.
    """
    m = a.shape[1]
    n = a.shape[2]
    um = m if want_u else 0
    vn = n if want_v else 0
    U = np.zeros((4, um, um))
    V = np.zeros((4, vn, vn))
    for i in range(um):
        U[0, i, i] = 1.0
    for i in range(vn):
        V[0, i, i] = 1.0
    d = np.zeros(n)
    e = np.zeros(max(n - 1, 0))

    for k in range(n):
        # column k, rows k..m-1
        x = a[:, k:, k].copy()
        v, beta, alpha, u = _householder(x)
        if beta != 0.0:
            _reflect_left(a, v, beta, k, k)
            _scale_row_left(a, k, k, -u[0], u[1], u[2], u[3])
            if want_u:
                _reflect_right(U, v, beta, 0, k)
                _scale_col_right(U, k, 0, -u[0], -u[1], -u[2], -u[3])
        d[k] = alpha
        a[:, k:, k] = 0.0
        a[0, k, k] = alpha

        if k < n - 1:
            # row k, columns k+1..n-1, reflected through its conjugate
            z = a[:, k, k + 1:].copy()
            z[1:] *= -1.0
            v, beta, alpha, u = _householder(z)
            if beta != 0.0:
                _reflect_right(a, v, beta, k, k + 1)
                _scale_col_right(a, k + 1, k, -u[0], -u[1], -u[2], -u[3])
                if want_v:
                    _reflect_right(V, v, beta, 0, k + 1)
                    _scale_col_right(V, k + 1, 0, -u[0], -u[1], -u[2], -u[3])
            e[k] = alpha
            a[:, k, k + 1:] = 0.0
            a[0, k, k + 1] = alpha
    return d, e, U, V


@njit(cache=True, inline="always")
def _givens(f, g):
    if g == 0.0:
        return 1.0, 0.0, f
    r = np.hypot(f, g)
    return f / r, g / r, r


@njit(cache=True)
def _rotate_cols(mat, i, j, c, s):
    """cols (i, j) <- (c col_i + s col_j, -s col_i + c col_j)."""
    for r in range(mat.shape[0]):
        a = mat[r, i]
        b = mat[r, j]
        mat[r, i] = c * a + s * b
        mat[r, j] = -s * a + c * b


@njit(cache=True)
def _bidiagonal_svd(d, e, max_sweeps):
    """Golub-Kahan implicit-shift QR on a real upper-bidiagonal matrix.

    Returns ``(P, Q, status, residual)``; on exit ``d`` holds the unsorted,
    possibly negative diagonal of ``P^T B Q``.  ``status`` is 0 on success.
    """
    n = d.shape[0]
    P = np.eye(n)
    Q = np.eye(n)
    eps = np.finfo(np.float64).eps
    bnorm = 0.0
    for i in range(n):
        bnorm = max(bnorm, abs(d[i]))
    for i in range(n - 1):
        bnorm = max(bnorm, abs(e[i]))
    if bnorm == 0.0 or n == 1:
        return P, Q, 0, 0.0
    small = eps * bnorm

    sweeps = 0
    while True:
        for i in range(n - 1):
            if abs(e[i]) <= eps * (abs(d[i]) + abs(d[i + 1])) or abs(e[i]) <= small:
                e[i] = 0.0
        for i in range(n):
            if abs(d[i]) <= small:
                d[i] = 0.0
        # trailing diagonal block
        q = n - 1
        while q > 0 and e[q - 1] == 0.0:
            q -= 1
        if q == 0:
            return P, Q, 0, 0.0
        p = q - 1
        while p > 0 and e[p - 1] != 0.0:
            p -= 1
        # block is d[p..q], every e[p..q-1] nonzero
        if sweeps >= max_sweeps:
            res = 0.0
            for i in range(n - 1):
                res = max(res, abs(e[i]))
            return P, Q, 1, res
        sweeps += 1

        zero_at = -1
        for i in range(p, q + 1):
            if d[i] == 0.0:
                zero_at = i
                break
        if zero_at >= 0 and zero_at < q:
            # chase row zero_at's superdiagonal to the right with left rotations
            i = zero_at
            f = e[i]
            e[i] = 0.0
            for j in range(i + 1, q + 1):
                c, s, r = _givens(d[j], f)
                d[j] = r
                _rotate_cols(P, j, i, c, s)
                if j < q:
                    f = -s * e[j]
                    e[j] = c * e[j]
            continue
        if zero_at == q:
            # chase column q's superdiagonal upwards with right rotations
            f = e[q - 1]
            e[q - 1] = 0.0
            for j in range(q - 1, p - 1, -1):
                c, s, r = _givens(d[j], f)
                d[j] = r
                _rotate_cols(Q, j, q, c, s)
                if j > p:
                    f = -s * e[j - 1]
                    e[j - 1] = c * e[j - 1]
            continue

        # Wilkinson shift from the trailing 2x2 of B^T B
        t11 = d[q - 1] ** 2
        if q - 1 > p:
            t11 += e[q - 2] ** 2
        t12 = d[q - 1] * e[q - 1]
        t22 = d[q] ** 2 + e[q - 1] ** 2
        dd = 0.5 * (t11 - t22)
        sg = 1.0 if dd >= 0.0 else -1.0
        den = dd + sg * np.hypot(dd, t12)
        mu = t22 - (t12 * t12 / den if den != 0.0 else 0.0)

        y = d[p] * d[p] - mu
        z = d[p] * e[p]
        for k in range(p, q):
            c, s, r = _givens(y, z)
            if k > p:
                e[k - 1] = r
            y = c * d[k] + s * e[k]
            e[k] = -s * d[k] + c * e[k]
            z = s * d[k + 1]
            d[k + 1] = c * d[k + 1]
            _rotate_cols(Q, k, k + 1, c, s)

            c, s, r = _givens(y, z)
            d[k] = r
            y = c * e[k] + s * d[k + 1]
            d[k + 1] = -s * e[k] + c * d[k + 1]
            if k < q - 1:
                z = s * e[k + 1]
                e[k + 1] = c * e[k + 1]
            _rotate_cols(P, k, k + 1, c, s)
        e[q - 1] = y


@njit(cache=True)
def _qsvd_tall(a, want_u, want_v):
    n = a.shape[2]
    d, e, U, V = _bidiagonalize(a, want_u, want_v)
    P, Q, status, residual = _bidiagonal_svd(d, e, SWEEPS_PER_VALUE * n)
    if status != 0:
        return d, U, V, status, residual
    for i in range(n):
        if d[i] < 0.0:
            d[i] = -d[i]
            for r in range(n):
                Q[r, i] = -Q[r, i]
    order = np.argsort(-d, kind="mergesort")
    d = d[order]
    P = np.ascontiguousarray(P[:, order])
    Q = np.ascontiguousarray(Q[:, order])
    if want_u:
        for c in range(4):
            U[c, :, :n] = np.ascontiguousarray(U[c, :, :n]) @ P
    if want_v:
        for c in range(4):
            V[c] = np.ascontiguousarray(V[c]) @ Q
    return d, U, V, 0, 0.0


# ---------------------------------------------------------------------------


def _run(planes: np.ndarray, want_u: bool, want_v: bool):
    """Dispatch on orientation; returns (s, U planes, V planes)."""
    m, n = planes.shape[1:]
    if m >= n:
        work = np.ascontiguousarray(planes, dtype=np.float64).copy()
        s, U, V, status, res = _qsvd_tall(work, want_u, want_v)
    else:
        work = np.ascontiguousarray(np.swapaxes(planes, 1, 2), dtype=np.float64).copy()
        work[1:] *= -1.0
        s, V, U, status, res = _qsvd_tall(work, want_v, want_u)
    if status != 0:
        raise ConvergenceError(
            f"QSVD did not converge on a {m}x{n} matrix; off-bidiagonal residual {res:.3e}",
            residual=res,
        )
    return s, U, V


def qsvd(q: QuaternionMatrix, compute_u: bool = True, compute_v: bool = True) -> QsvdResult:
    """Full QSVD with square unitary ``U`` (M x M) and ``V`` (N x N).

    ``singular_values`` has length ``min(M, N)`` and is sorted descending.
    Skipping a factor saves the cost of accumulating it.
    """
    if q.rows == 0 or q.cols == 0:
        raise ShapeError("QSVD of an empty matrix")
    s, U, V = _run(q.planes, compute_u, compute_v)
    return QsvdResult(
        QuaternionMatrix(U) if compute_u else None,
        s,
        QuaternionMatrix(V) if compute_v else None,
    )


def singular_values(q: QuaternionMatrix) -> np.ndarray:
    return qsvd(q, compute_u=False, compute_v=False).singular_values


def left_singular_vectors(q: QuaternionMatrix) -> tuple[QuaternionMatrix, np.ndarray]:
    """``(U, s)`` without forming ``V``."""
    res = qsvd(q, compute_u=True, compute_v=False)
    return res.U, res.singular_values


def complex_adjoint(q: QuaternionMatrix) -> np.ndarray:
    """``[[A, B], [-conj(B), conj(A)]]`` for ``Q = A + B j``, ``A = Q0 + Q1 i``, ``B = Q2 + Q3 i``."""
    a = q.w + 1j * q.x
    b = q.y + 1j * q.z
    return np.block([[a, b], [-b.conj(), a.conj()]])


def from_complex_adjoint(c: np.ndarray) -> QuaternionMatrix:
    m, n = c.shape[0] // 2, c.shape[1] // 2
    a = c[:m, :n]
    b = c[:m, n:]
    return QuaternionMatrix(np.stack([a.real, a.imag, b.real, b.imag]))


def unitarity_residual(u: QuaternionMatrix) -> float:
    g = conjugate_transpose(u) @ u
    g.planes[0] -= np.eye(u.cols)
    return g.norm()
