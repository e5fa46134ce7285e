"""Brute-force ground truth for the analyzers.

The discretized operator is assembled as one dense (nN x nN) matrix and
its norm and spectrum are recomputed without using the block structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .function_space import NormSpec, norms
from .matrix import eigenvalues
from .measure import MeasureSpace
from .symbol import SymbolFunction

MAX_DENSE = 512


@dataclass(frozen=True, eq=False)
class DenseOperator:
    matrix: np.ndarray
    space: MeasureSpace
    block: int

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def matvec(self, f: np.ndarray) -> np.ndarray:
        """Apply to functions with values (..., n, N); returns the same shape."""
        f = np.asarray(f, dtype=complex)
        stacked = f.reshape(f.shape[:-2] + (-1,))
        # plain summation loop rather than BLAS so results are reproducible bit for bit
        return np.einsum("ij,...j->...i", self.matrix, stacked).reshape(f.shape)


def assemble_dense(u: SymbolFunction) -> DenseOperator:
    if u.space.mode != "finite":
        raise ValueError("dense assembly needs a finite space")
    v = u.values()
    n, N = v.shape[0], u.dim
    d = np.zeros((n * N, n * N), dtype=complex)
    for i in range(n):
        d[i * N:(i + 1) * N, i * N:(i + 1) * N] = v[i]
    return DenseOperator(d, u.space, N)


def operator_norm_estimate(d: DenseOperator, ns: NormSpec, trials: int = 100,
                           rng: np.random.Generator | None = None) -> float:
    """Lower estimate of ||D||_{X -> X} from random and single-atom probes.

    The single-atom probes put, on each atom, a unimodular vector aligned
    with one row of that atom's diagonal block; one of them attains the
    norm of any lattice norm built on the sup-norm.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    n, N = d.space.n_atoms, d.block
    probes = [rng.normal(size=(trials, n, N)) + 1j * rng.normal(size=(trials, n, N))]
    m = d.matrix
    for i in np.flatnonzero(d.space.positive):
        rows = m[i * N:(i + 1) * N, i * N:(i + 1) * N]
        z = np.exp(-1j * np.angle(rows))
        z[rows == 0] = 1.0
        p = np.zeros((N + 1, n, N), dtype=complex)
        p[:N, i, :] = z
        p[N, i, :] = 1.0
        probes.append(p)
    f = np.concatenate(probes, axis=0)
    nf = norms(f, d.space, ns)
    ndf = norms(d.matvec(f), d.space, ns)
    ok = nf > 0
    return float((ndf[ok] / nf[ok]).max()) if np.any(ok) else 0.0


def dense_eigenvalues(d: DenseOperator) -> np.ndarray:
    if d.size > MAX_DENSE:
        raise ValueError(f"dense oracle limited to {MAX_DENSE} unknowns")
    return eigenvalues(d.matrix).values


# ---------------------------------------------------------------------------
# characteristic polynomial root finding (independent eigenvalue check)

def charpoly(a) -> np.ndarray:
    """Monic characteristic polynomial coefficients (highest degree first), Faddeev-LeVerrier."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[0] = 1.0
    m = np.zeros_like(a)
    eye = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        m = a @ m + coeffs[k - 1] * eye
        coeffs[k] = -np.trace(a @ m) / k
    return coeffs


def durand_kerner(coeffs, tol: float = 1e-15, max_iter: int = 2000) -> np.ndarray:
    """All roots of a monic polynomial by simultaneous Weierstrass iteration."""
    c = np.asarray(coeffs, dtype=complex)
    c = c / c[0]
    n = len(c) - 1
    radius = 1 + np.abs(c[1:]).max()
    z = radius * (0.4 + 0.9j) ** np.arange(n)
    for _ in range(max_iter):
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        step = np.polyval(c, z) / diff.prod(axis=1)
        z = z - step
        if np.abs(step).max() <= tol * max(1.0, np.abs(z).max()):
            break
    # polish each root with a few Newton steps on the polynomial
    dc = np.polyder(c)
    for _ in range(3):
        d = np.polyval(dc, z)
        safe = np.abs(d) > 0
        z[safe] = z[safe] - np.polyval(c, z[safe]) / d[safe]
    return z


def charpoly_eigenvalues(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.shape[0] == 1:
        return a[0].copy()
    return durand_kerner(charpoly(a))
