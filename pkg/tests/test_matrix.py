import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from multop.matrix import (SingularMatrixError, eigenvalues, expm, hessenberg, inverse,
                           schur, solve, spectral_bound, sup_induced_norm)
from multop.oracle import charpoly_eigenvalues
from multop.pointset import hausdorff

# frozen from numpy.roots(numpy.poly(A)) (companion-matrix route)
A4 = (np.array([[1, 2, 0, 1], [0, -1, 3, 0], [1, 0, 2, -2], [0, 1, 1, 0]], dtype=complex)
      + 1j * np.array([[0, 1, 0, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 0, 1, 0]]))
A4_EIG = np.array([
    -1.4665272873191564 + 0.29859827663197797j,
    -0.1056148741808006 + 1.0004341635450047j,
    1.211873416849064 - 2.2724133863977976j,
    2.36026874465089 + 0.9733809462208185j,
])

# frozen from scipy.linalg.expm
B2 = np.array([[0.3, 1.2], [-0.7, -0.4]])
B2_EXP = np.array([[0.9244197054003324, 1.0097880468780818],
                   [-0.5890430273455478, 0.33537667805478466]])

finite = st.floats(-5, 5, allow_nan=False)


def complex_matrices(n_max=6):
    return st.integers(1, n_max).flatmap(
        lambda n: st.tuples(arrays(float, (n, n), elements=finite), arrays(float, (n, n), elements=finite))
    ).map(lambda ri: ri[0] + 1j * ri[1])


def test_row_sum_norm():
    assert sup_induced_norm(np.array([[1, -2], [3, 0.5]])) == 3.5
    batch = np.array([np.eye(2), 2 * np.eye(2)])
    assert np.allclose(sup_induced_norm(batch), [1, 2])


def test_solve_and_inverse():
    a = np.array([[4, 1], [2, 3]], dtype=complex)
    x = solve(a, np.array([1, 2]))
    assert np.allclose(a @ x, [1, 2], atol=1e-14)
    assert np.allclose(inverse(a) @ a, np.eye(2), atol=1e-14)
    with pytest.raises(SingularMatrixError):
        inverse(np.array([[1, 2], [2, 4]]))


def test_expm_frozen():
    assert np.abs(expm(B2) - B2_EXP).max() <= 1e-13


def test_expm_closed_forms():
    assert np.array_equal(expm(np.zeros((3, 3))), np.eye(3))
    nil = np.array([[0, 1], [0, 0]])
    assert np.allclose(expm(2.5 * nil), [[1, 2.5], [0, 1]], atol=1e-15)
    rot = np.array([[0, -np.pi], [np.pi, 0]])
    assert np.allclose(expm(rot), -np.eye(2), atol=1e-13)
    # large norm exercises the squaring phase
    d = np.diag([-30.0, 10.0])
    assert np.allclose(expm(d), np.diag(np.exp([-30.0, 10.0])), rtol=1e-12, atol=0)


def test_expm_batched_matches_single():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(5, 3, 3)) * np.array([0.1, 1, 3, 10, 30])[:, None, None]
    batched = expm(a)
    for k in range(5):
        assert np.allclose(batched[k], expm(a[k]), rtol=1e-14, atol=0)


def test_eigenvalues_frozen():
    ev = eigenvalues(A4)
    assert hausdorff(ev.values, A4_EIG) <= 1e-12
    assert ev.residual <= 1e-12


def test_eigenvalues_special():
    assert np.allclose(np.sort(eigenvalues(np.diag([3, 1, 2])).values.real), [1, 2, 3])
    assert np.abs(eigenvalues(np.array([[0, 1], [0, 0]])).values).max() == 0
    rot = eigenvalues(np.array([[0, -1], [1, 0]])).values
    assert hausdorff(rot, [1j, -1j]) <= 1e-14
    assert spectral_bound(np.diag([-1, 3])) == 3


def test_hessenberg_similarity():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    h, q = hessenberg(a)
    assert np.allclose(np.tril(h, -2), 0)
    assert np.allclose(q @ h @ q.conj().T, a, atol=1e-12)
    t, z, _ = schur(a)
    assert np.allclose(np.tril(t, -1), 0, atol=1e-12)
    assert np.allclose(z @ t @ z.conj().T, a, atol=1e-11)


def test_eigenvalues_vs_charpoly_generic():
    # two routes on matrices with simple spectra: shifted QR versus
    # characteristic polynomial roots
    rng = np.random.default_rng(11)
    for n in range(2, 9):
        for _ in range(5):
            a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            assert hausdorff(eigenvalues(a).values, charpoly_eigenvalues(a)) <= 1e-8


@settings(max_examples=80, deadline=None)
@given(complex_matrices())
def test_eigenvalues_backward_error(a):
    # every computed eigenvalue makes a - lam I numerically singular, and the
    # power sums match traces (this also pins down multiplicities)
    ev = eigenvalues(a).values
    n = len(a)
    scale = 1 + sup_induced_norm(a)
    for lam in ev:
        smin = np.linalg.svd(a - lam * np.eye(n), compute_uv=False)[-1]
        assert smin <= 1e-12 * scale
    for k in (1, 2, 3):
        assert abs((ev ** k).sum() - np.trace(np.linalg.matrix_power(a, k))) <= 1e-10 * n * scale ** k


@settings(max_examples=60, deadline=None)
@given(complex_matrices(4), st.floats(0.1, 2), st.floats(0.1, 2))
def test_expm_semigroup_law(a, s, t):
    lhs = expm((s + t) * a)
    rhs = expm(s * a) @ expm(t * a)
    assert np.abs(lhs - rhs).max() <= 1e-9 * max(1.0, np.abs(lhs).max())
