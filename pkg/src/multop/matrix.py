"""Dense complex matrix kernel.

All routines work on ``numpy`` complex arrays.  The matrix norm used
everywhere is the one induced by the sup-norm on C^N, i.e. the maximal
absolute row sum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS = np.finfo(float).eps

# pivots below this fraction of the row-sum norm count as zero
SINGULAR_THRESHOLD = 1e-13


class MatrixError(ArithmeticError):
    pass


class SingularMatrixError(MatrixError):
    pass


class EigenConvergenceError(MatrixError):
    def __init__(self, message: str, best_residual: float):
        super().__init__(message)
        self.best_residual = best_residual


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def sup_induced_norm(a) -> np.ndarray | float:
    """Maximal absolute row sum.  Accepts stacks of matrices (..., N, N)."""
    a = np.asarray(a)
    out = np.abs(a).sum(axis=-1).max(axis=-1)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# linear solves

def _solve_batched(a: np.ndarray, b: np.ndarray, check_singular: bool = False) -> np.ndarray:
    """Gaussian elimination with partial pivoting over leading batch axes.

    ``a`` has shape (..., n, n) and ``b`` shape (..., n, k).
    """
    a = np.array(a, dtype=complex, copy=True)
    b = np.array(b, dtype=complex, copy=True)
    n = a.shape[-1]
    scale = np.abs(a).sum(axis=-1).max(axis=-1)
    batch = a.shape[:-2]
    idx = np.indices(batch) if batch else ()
    for k in range(n):
        col = np.abs(a[..., k:, k])
        p = np.argmax(col, axis=-1) + k
        if check_singular:
            piv = np.take_along_axis(col, (p - k)[..., None], axis=-1)[..., 0]
            if np.any(piv <= SINGULAR_THRESHOLD * scale) or np.any(scale == 0):
                raise SingularMatrixError(f"pivot below {SINGULAR_THRESHOLD:g}*||A|| at column {k}")
        if batch:
            sel = tuple(idx)
            rk = a[sel + (k,)].copy()
            a[sel + (k,)] = a[sel + (p,)]
            a[sel + (p,)] = rk
            rk = b[sel + (k,)].copy()
            b[sel + (k,)] = b[sel + (p,)]
            b[sel + (p,)] = rk
        else:
            p = int(p)
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]
        pivot = a[..., k, k]
        if k + 1 < n:
            with np.errstate(divide="ignore", invalid="ignore"):
                factors = a[..., k + 1:, k] / pivot[..., None]
            a[..., k + 1:, k:] -= factors[..., :, None] * a[..., None, k, k:]
            b[..., k + 1:, :] -= factors[..., :, None] * b[..., None, k, :]
    x = np.empty_like(b)
    for k in range(n - 1, -1, -1):
        acc = b[..., k, :] - np.einsum("...j,...jk->...k", a[..., k, k + 1:], x[..., k + 1:, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            x[..., k, :] = acc / a[..., k, k][..., None]
    return x


def solve(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = np.asarray(b, dtype=complex)
    vec = b.ndim == 1
    x = _solve_batched(a, b[:, None] if vec else b, check_singular=True)
    return x[:, 0] if vec else x


def inverse(a) -> np.ndarray:
    """Inverse by partial-pivoting elimination.

    Raises :class:`SingularMatrixError` when a pivot falls below
    ``1e-13 * ||A||``.
    """
    a = as_matrix(a)
    return _solve_batched(a, np.eye(a.shape[0], dtype=complex), check_singular=True)


# ---------------------------------------------------------------------------
# matrix exponential

_PADE_ORDER = 8
_PADE_THETA = 0.5


def _pade_coefficients(q: int) -> np.ndarray:
    c = np.empty(q + 1)
    c[0] = 1.0
    for k in range(1, q + 1):
        c[k] = c[k - 1] * (q - k + 1) / (k * (2 * q - k + 1))
    return c


_PADE_C = _pade_coefficients(_PADE_ORDER)


def expm(a) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a diagonal Pade approximant.

    Works on a single matrix or on a stack of shape (..., N, N).  Every
    matrix in the stack is scaled independently so that its row-sum norm
    is at most 1/2 before the [8/8] Pade step.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {a.shape}")
    shape = a.shape
    n = shape[-1]
    flat = a.reshape(-1, n, n)
    norms = np.abs(flat).sum(axis=-1).max(axis=-1)
    with np.errstate(divide="ignore"):
        s = np.where(norms > _PADE_THETA, np.ceil(np.log2(np.maximum(norms, 1e-300) / _PADE_THETA)), 0)
    s = s.astype(int)
    x = flat / (2.0 ** s)[:, None, None]

    eye = np.broadcast_to(np.eye(n, dtype=complex), x.shape)
    x2 = x @ x
    x4 = x2 @ x2
    x6 = x4 @ x2
    x8 = x4 @ x4
    c = _PADE_C
    even = c[0] * eye + c[2] * x2 + c[4] * x4 + c[6] * x6 + c[8] * x8
    odd = x @ (c[1] * eye + c[3] * x2 + c[5] * x4 + c[7] * x6)
    e = _solve_batched(even - odd, even + odd)

    smax = int(s.max()) if s.size else 0
    for j in range(smax):
        sel = s > j
        if np.all(sel):
            e = e @ e
        else:
            e[sel] = e[sel] @ e[sel]
    return e.reshape(shape)


# ---------------------------------------------------------------------------
# eigenvalues: Hessenberg reduction + shifted QR

@dataclass(frozen=True)
class EigenSet:
    values: np.ndarray
    residual: float
    iterations: int = 0

    def __len__(self):
        return len(self.values)


def hessenberg(a) -> tuple[np.ndarray, np.ndarray]:
    """Householder reduction ``A = Q H Q^*`` with ``H`` upper Hessenberg."""
    h = np.array(a, dtype=complex, copy=True)
    n = h.shape[0]
    q = np.eye(n, dtype=complex)
    for k in range(n - 2):
        x = h[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0 or np.all(x[1:] == 0):
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        h[k + 1:, :] -= 2.0 * np.outer(v, v.conj() @ h[k + 1:, :])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v.conj())
        q[:, k + 1:] -= 2.0 * np.outer(q[:, k + 1:] @ v, v.conj())
        h[k + 2:, k] = 0.0
    return h, q


def _givens(a: complex, b: complex) -> tuple[float, complex, float]:
    """Return (c, s, r) with [[c, s], [-conj(s), c]] @ [a, b] = [r, 0]."""
    if b == 0:
        return 1.0, 0j, abs(a)
    if a == 0:
        return 0.0, np.conj(b) / abs(b), abs(b)
    r = np.hypot(abs(a), abs(b))
    c = abs(a) / r
    s = (a / abs(a)) * np.conj(b) / r
    return c, s, r


def _wilkinson(a, b, c, d) -> complex:
    tr = a + d
    det = a * d - b * c
    disc = np.sqrt(tr * tr / 4 - det)
    l1 = tr / 2 + disc
    l2 = tr / 2 - disc
    return l1 if abs(l1 - d) < abs(l2 - d) else l2


def schur(a, max_iter: int | None = None) -> tuple[np.ndarray, np.ndarray, int]:
    """Complex Schur form ``A = Z T Z^*`` by explicitly shifted QR steps."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    h, z = hessenberg(a)
    anorm = max(float(np.abs(a).sum(axis=1).max()), np.finfo(float).tiny)
    if max_iter is None:
        max_iter = 60 * n
    total = 0
    hi = n - 1
    its = 0
    while hi > 0:
        lo = hi
        while lo > 0:
            sub = abs(h[lo, lo - 1])
            if sub <= EPS * (abs(h[lo, lo]) + abs(h[lo - 1, lo - 1])) or sub <= EPS * anorm:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            its = 0
            continue
        if total >= max_iter:
            t = np.triu(h)
            res = float(np.abs(a @ z - z @ t).max())
            raise EigenConvergenceError(f"QR iteration did not converge after {total} steps", res)
        if its and its % 10 == 0:
            mu = h[hi, hi] + 0.75 * abs(h[hi, hi - 1]) * (1 + 0.5j)
        else:
            mu = _wilkinson(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])
        _qr_step(h, z, lo, hi, mu)
        its += 1
        total += 1
    return np.triu(h), z, total


def _qr_step(h: np.ndarray, z: np.ndarray, lo: int, hi: int, mu: complex) -> None:
    n = h.shape[0]
    for k in range(lo, hi + 1):
        h[k, k] -= mu
    rots = []
    for k in range(lo, hi):
        c, s, _ = _givens(h[k, k], h[k + 1, k])
        rk = h[k, lo:].copy()
        rk1 = h[k + 1, lo:]
        h[k, lo:] = c * rk + s * rk1
        h[k + 1, lo:] = -np.conj(s) * rk + c * rk1
        h[k + 1, k] = 0.0
        rots.append((k, c, s))
    for k, c, s in rots:
        top = min(k + 2, n)
        ck = h[:top, k].copy()
        ck1 = h[:top, k + 1]
        h[:top, k] = c * ck + np.conj(s) * ck1
        h[:top, k + 1] = -s * ck + c * ck1
        zk = z[:, k].copy()
        zk1 = z[:, k + 1]
        z[:, k] = c * zk + np.conj(s) * zk1
        z[:, k + 1] = -s * zk + c * zk1
    for k in range(lo, hi + 1):
        h[k, k] += mu


def _ldexp(a: np.ndarray, e: int) -> np.ndarray:
    return np.ldexp(a.real, e) + 1j * np.ldexp(a.imag, e)


def eigenvalues(a) -> EigenSet:
    """All eigenvalues with multiplicity, with the Schur backward residual.

    The residual is ``max |A Z - Z T|`` for the computed unitary ``Z`` and
    triangular ``T``; it is checked against ``1e-9 (1 + ||A||)``.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n == 1:
        return EigenSet(a[0].copy(), 0.0, 0)
    nrm = sup_induced_norm(a)
    if nrm == 0:
        return EigenSet(np.zeros(n, dtype=complex), 0.0, 0)
    # exact power-of-two rescaling keeps subnormal or huge inputs in range
    e = int(np.frexp(nrm)[1])
    t, z, its = schur(_ldexp(a, -e))
    t = _ldexp(t, e)
    res = float(np.abs(a @ z - z @ t).sum(axis=1).max())
    bound = 1e-9 * (1.0 + sup_induced_norm(a))
    if not res <= bound:
        raise EigenConvergenceError(f"Schur residual {res:.3e} exceeds {bound:.3e}", res)
    return EigenSet(np.diag(t).copy(), res, its)


def spectral_bound(a) -> float:
    return float(np.max(eigenvalues(a).values.real))
