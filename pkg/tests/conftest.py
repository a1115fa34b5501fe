import itertools

import numpy as np
import pytest

from qhosvd.quaternion import QuaternionMatrix, QuaternionScalar, QuaternionTensor


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def rand_matrix(rng, m, n):
    return QuaternionMatrix(rng.standard_normal((4, m, n)))


def rand_tensor(rng, *dims):
    return QuaternionTensor(rng.standard_normal((4,) + dims))


def rand_unitary(rng, n):
    from qhosvd.qsvd import qsvd

    return qsvd(rand_matrix(rng, n, n)).U


# --- scalar-loop oracles, independent of the plane/tensordot paths ---------


def qmul_ref(a, b):
    """Hamilton product from the multiplication table of the units."""
    table = {
        (0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
        (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
        (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
        (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0),
    }
    out = [0.0, 0.0, 0.0, 0.0]
    for p in range(4):
        for q in range(4):
            sign, unit = table[(p, q)]
            out[unit] += sign * a[p] * b[q]
    return out


def matmul_ref(a: QuaternionMatrix, b: QuaternionMatrix) -> QuaternionMatrix:
    m, p = a.shape
    n = b.shape[1]
    out = np.zeros((4, m, n))
    for i in range(m):
        for j in range(n):
            acc = np.zeros(4)
            for t in range(p):
                acc += qmul_ref(a.planes[:, i, t], b.planes[:, t, j])
            out[:, i, j] = acc
    return QuaternionMatrix(out)


def unfold_ref(t: QuaternionTensor, k: int) -> QuaternionMatrix:
    """Enumeration oracle: column index counts the other modes, lowest fastest."""
    dims = t.shape
    others = [m for m in range(len(dims)) if m != k - 1]
    ncols = int(np.prod([dims[m] for m in others]))
    out = np.zeros((4, dims[k - 1], ncols))
    for idx in itertools.product(*[range(d) for d in dims]):
        col = 0
        stride = 1
        for m in others:
            col += idx[m] * stride
            stride *= dims[m]
        out[(slice(None), idx[k - 1], col)] = t.planes[(slice(None),) + idx]
    return QuaternionMatrix(out)


def mode_product_ref(t: QuaternionTensor, k: int, u: QuaternionMatrix) -> QuaternionTensor:
    """Entrywise sum with the matrix entry on the left of every tensor entry."""
    dims = list(t.shape)
    out_dims = dims.copy()
    out_dims[k - 1] = u.rows
    out = np.zeros([4] + out_dims)
    for idx in itertools.product(*[range(d) for d in out_dims]):
        acc = np.zeros(4)
        for n in range(dims[k - 1]):
            src = list(idx)
            src[k - 1] = n
            acc += qmul_ref(u.planes[:, idx[k - 1], n], t.planes[(slice(None),) + tuple(src)])
        out[(slice(None),) + idx] = acc
    return QuaternionTensor(out)


def q(w=0.0, x=0.0, y=0.0, z=0.0):
    return QuaternionScalar(float(w), float(x), float(y), float(z))


I = q(x=1)
J = q(y=1)
K = q(z=1)


# --- acceptance summary ----------------------------------------------------

ACCEPTANCE_RESULTS: dict[int, tuple[str, bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        title, ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {title} ({detail})")
