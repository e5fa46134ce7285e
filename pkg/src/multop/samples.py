"""Seeded random fixtures shared by the verifier and the test-suite."""

from __future__ import annotations

import numpy as np

from .function_space import NormSpec
from .matrix import spectral_bound, sup_induced_norm
from .measure import MeasureSpace
from .symbol import SymbolFunction


def standard_norms() -> list[NormSpec]:
    """L^1, L^2, L^inf, Orlicz t^2 log(1+t) and Lorentz L^{2,1}."""
    return [
        NormSpec.lp(1),
        NormSpec.lp(2),
        NormSpec.lp(np.inf),
        NormSpec.orlicz("tp_log", 2),
        NormSpec.lorentz(2, 1),
    ]


def random_space(rng: np.random.Generator, n: int = 20, nonatomic: bool = False) -> MeasureSpace:
    coords = np.sort(rng.uniform(0, 1, n))
    weights = rng.uniform(0.1, 1.0, n) / n
    return MeasureSpace.finite(coords, weights, nonatomic=nonatomic)


def random_matrices(rng: np.random.Generator, n: int, dim: int, bound: float | None = None) -> np.ndarray:
    """``n`` complex dim x dim matrices; with ``bound`` the largest row-sum norm equals it."""
    v = rng.normal(size=(n, dim, dim)) + 1j * rng.normal(size=(n, dim, dim))
    if bound is not None:
        v *= bound / sup_induced_norm(v).max()
    return v


def random_symbol(rng: np.random.Generator, n: int = 20, dim: int | None = None,
                  bound: float | None = None, space: MeasureSpace | None = None) -> SymbolFunction:
    dim = int(rng.integers(1, 4)) if dim is None else dim
    space = random_space(rng, n) if space is None else space
    return SymbolFunction.table(space, random_matrices(rng, space.n_atoms, dim, bound))


def random_stable_symbol(rng: np.random.Generator, n: int = 20, dim: int = 2,
                         abscissa: float = -0.5) -> SymbolFunction:
    """Symbols whose blocks all have spectral abscissa ``abscissa`` or less."""
    v = random_matrices(rng, n, dim, bound=1.0)
    out = np.empty_like(v)
    for i, m in enumerate(v):
        s = spectral_bound(m)
        out[i] = m + (abscissa - s - rng.uniform(0, 0.5)) * np.eye(dim)
    return SymbolFunction.table(random_space(rng, n), out)


def random_scalar_with_zeros(rng: np.random.Generator, n: int = 20, p_zero: float = 0.3,
                             nonatomic: bool = True) -> SymbolFunction:
    """Scalar symbols on a non-atomic-flagged space, some vanishing on atoms."""
    space = random_space(rng, n, nonatomic=nonatomic)
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    if rng.uniform() < 0.5:
        v[rng.uniform(size=n) < p_zero] = 0
    return SymbolFunction.scalar(space, v)
