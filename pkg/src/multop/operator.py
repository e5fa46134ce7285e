"""Multiplication operators f -> u f and their analyzers.

Everything is decided from the values of the symbol on positive-weight
atoms (a.e. equivalence), plus the tail envelope of sequence-mode symbols.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .function_space import NormSpec, VectorFunction, indicator, norms
from .matrix import SingularMatrixError, eigenvalues, inverse, sup_induced_norm
from .measure import MeasureSpace, refine
from .oracle import assemble_dense
from .pointset import PointSet, unique_points
from .symbol import NonFiniteSymbolError, SymbolFunction

DEFAULT_TOL = 1e-9


class MissingEnvelopeError(ValueError):
    pass


class HypothesisError(ValueError):
    """An analyzer was called outside the hypotheses of its theorem."""


def _require_tail(u: SymbolFunction):
    if u.space.mode == "sequence" and u.tail is None:
        raise MissingEnvelopeError("sequence-mode symbol needs a tail envelope")
    return u.tail


def apply(u: SymbolFunction, f: VectorFunction) -> VectorFunction:
    """(M_u f)(x) = u(x) f(x) at every atom."""
    if f.space.n_atoms != u.space.n_atoms:
        raise ValueError("symbol and function live on different spaces")
    if f.dim != u.dim:
        raise ValueError(f"dimension mismatch: symbol is {u.dim}x{u.dim}, function has {f.dim} components")
    return VectorFunction(f.space, np.einsum("nij,nj->ni", u.values(), f.values))


def atom_norms(u: SymbolFunction) -> np.ndarray:
    return sup_induced_norm(u.values())


def operator_norm(u: SymbolFunction) -> float:
    """Essential sup of ``||u(x)||``, i.e. the norm of M_u on any function norm.

    Returns ``inf`` when the symbol is not finite on a positive-weight atom
    or the tail envelope is unbounded.
    """
    try:
        an = atom_norms(u)
    except NonFiniteSymbolError:
        return math.inf
    pos = u.space.positive
    best = float(an[pos].max()) if np.any(pos) else 0.0
    if u.space.mode == "sequence":
        best = max(best, _require_tail(u).sup_beyond(u.space.truncation))
    return best


def operator_norm_least_m(u: SymbolFunction) -> float:
    """inf{M >= 0 : mu{x : ||u(x)|| > M} = 0}, computed from superlevel-set measures."""
    try:
        an = atom_norms(u)
    except NonFiniteSymbolError:
        return math.inf
    w = u.space.weights
    candidates = np.unique(np.concatenate([[0.0], an]))
    least = math.inf
    for m in candidates:
        if w[an > m].sum() == 0:
            least = float(m)
            break
    if u.space.mode == "sequence":
        least = max(least, _require_tail(u).sup_beyond(u.space.truncation))
    return least


def _tail_limit_points(u: SymbolFunction) -> np.ndarray:
    tail = u.tail
    if u.space.mode != "sequence" or tail is None:
        return np.zeros(0, dtype=complex)
    if tail.limit_matrix is not None:
        return unique_points(eigenvalues(tail.limit_matrix).values)
    if tail.limit == 0:
        return np.zeros(1, dtype=complex)
    return np.zeros(0, dtype=complex)


def _spectrum_bounded(u: SymbolFunction) -> bool | None:
    if u.space.mode != "sequence":
        return True
    tail = _require_tail(u)
    if math.isfinite(tail.sup_beyond(u.space.truncation)):
        return True
    if tail.spectral_radius is not None:
        return math.isfinite(tail.spectral_radius)
    if u.dim == 1:
        return False
    return None


def essential_range(u: SymbolFunction) -> PointSet:
    """Essential range of a scalar symbol: its values on positive-weight atoms."""
    if u.dim != 1:
        raise ValueError("essential range is only defined here for N = 1; use spectrum()")
    vals = u.values()[:, 0, 0][u.space.positive]
    return PointSet(unique_points(vals), _tail_limit_points(u), _spectrum_bounded(u))


def atom_spectra(u: SymbolFunction) -> list[np.ndarray]:
    v = u.values()
    return [eigenvalues(m).values for m in v]


def spectrum(u: SymbolFunction) -> PointSet:
    """Closure of the union of the pointwise spectra over positive-weight atoms."""
    pos = u.space.positive
    v = u.values()
    pts = [eigenvalues(v[i]).values for i in np.flatnonzero(pos)]
    pts = unique_points(np.concatenate(pts)) if pts else np.zeros(0, dtype=complex)
    bounded = _spectrum_bounded(u)
    note = ""
    if u.space.mode == "sequence":
        tail = u.tail
        if not bounded and (tail.spectral_abscissa is None or not math.isfinite(tail.spectral_abscissa)) and u.dim > 1:
            note = "resolvent set undetermined"
    return PointSet(pts, _tail_limit_points(u), bounded, note)


# ---------------------------------------------------------------------------
# invertibility

@dataclass
class Invertibility:
    invertible: bool
    delta: float
    inverse: SymbolFunction | None
    probe_residual: float = math.nan

    @property
    def verified(self) -> bool:
        return not self.invertible or self.probe_residual <= 1e-9


def pointwise_inverse(u: SymbolFunction) -> SymbolFunction:
    """r(x) = u(x)^{-1} where u(x) is invertible, the zero matrix elsewhere."""
    v = u.values()
    out = np.zeros_like(v)
    for i, m in enumerate(v):
        try:
            out[i] = inverse(m)
        except SingularMatrixError:
            pass
    return SymbolFunction.table(u.space, out)


def is_invertible(u: SymbolFunction, tol: float = DEFAULT_TOL, probes: int = 20,
                  rng: np.random.Generator | None = None) -> Invertibility:
    """M_u has a bounded inverse iff it is bounded and 0 is at distance >= tol from its spectrum."""
    nrm = operator_norm(u)
    if not math.isfinite(nrm):
        return Invertibility(False, 0.0, None)
    sp = spectrum(u)
    delta = sp.distance_to(0.0)
    r = pointwise_inverse(u)
    if not delta >= tol:
        return Invertibility(False, delta, r)
    rng = rng if rng is not None else np.random.default_rng(0)
    pos = u.space.positive
    worst = 0.0
    for _ in range(probes):
        f = VectorFunction.random(u.space, u.dim, rng)
        back = apply(r, apply(u, f))
        err = np.abs(back.values - f.values)[pos].max(initial=0.0)
        worst = max(worst, float(err / max(np.abs(f.values).max(), 1e-300)))
    return Invertibility(True, delta, r, worst)


# ---------------------------------------------------------------------------
# closed range (N = 1)

@dataclass
class ClosedRange:
    closed: bool
    delta: float
    witness_atom: int | None = None
    witness_ratio: float | None = None
    witness: VectorFunction | None = None


def _scalar_values(u: SymbolFunction, what: str) -> np.ndarray:
    if u.dim != 1:
        raise HypothesisError(f"{what} is only implemented for scalar symbols (N = 1)")
    return u.values()[:, 0, 0]


def has_closed_range(u: SymbolFunction, tol: float = DEFAULT_TOL) -> ClosedRange:
    """Closed range iff |u| >= delta > 0 almost everywhere on the support of u."""
    vals = _scalar_values(u, "closed-range analysis")
    space = u.space
    support = space.positive & (vals != 0)
    absv = np.abs(vals)
    delta = float(absv[support].min()) if np.any(support) else math.inf
    argmin = int(np.flatnonzero(support)[np.argmin(absv[support])]) if np.any(support) else None

    if space.mode == "sequence":
        tail = _require_tail(u)
        ks, tv = u.tail_values()
        tabs = np.abs(tv[:, 0, 0]) if len(ks) else np.zeros(0)
        nz = tabs > 0
        if np.any(nz):
            tail_inf = min(float(tabs[nz].min()), tail.limit)
            if tail_inf < delta:
                delta = tail_inf
                argmin = None
        if delta < tol:
            k = _first_small_tail_atom(u, tol)
            if k is not None:
                ratio = float(abs(u.eval_coords([float(k)])[0, 0, 0]))
                return ClosedRange(False, delta, k, ratio, None)

    if delta >= tol:
        return ClosedRange(True, delta)
    f = indicator(space.singleton(argmin), [1.0])
    return ClosedRange(False, delta, argmin, _ratio(u, f), f)


def _first_small_tail_atom(u: SymbolFunction, tol: float) -> int | None:
    k = u.space.truncation + 1
    for _ in range(400):
        v = u.eval_coords([float(k)])[0, 0, 0]
        if np.isfinite(v) and 0 < abs(v) < tol:
            return k
        k *= 2
    return None


def _ratio(u: SymbolFunction, f: VectorFunction, ns: NormSpec | None = None) -> float:
    ns = ns or NormSpec.lp(2)
    num = norms(apply(u, f).values, u.space, ns)
    den = norms(f.values, u.space, ns)
    return float(num / den)


# ---------------------------------------------------------------------------
# compactness

@dataclass
class Compactness:
    compact: bool
    levels: dict = field(default_factory=dict)
    note: str = ""


DEFAULT_EPS_GRID = (1.0, 0.5, 0.1, 1e-2, 1e-3, 1e-4, 1e-6)


def _tail_crossing(tail, start: int, eps: float) -> int:
    """First index k >= start with envelope(k) < eps, for a decreasing envelope."""
    if tail.at(start) < eps:
        return start
    hi = start
    while not tail.at(hi) < eps:
        hi *= 2
        if hi > 2**1000:
            raise ArithmeticError("envelope does not drop below eps")
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tail.at(mid) < eps:
            hi = mid
        else:
            lo = mid
    return hi


def is_compact(u: SymbolFunction, eps_grid=DEFAULT_EPS_GRID) -> Compactness:
    """Compact iff {x : ||u(x)|| >= eps} carries a finite-dimensional subspace for all eps > 0.

    ``levels`` maps each eps to ``(finite, count)``: whether the level set
    is finite and an upper bound on its size (``None`` when infinite).
    """
    if u.space.mode == "finite":
        return Compactness(True, {}, "finite-dimensional space: every operator is compact")
    tail = _require_tail(u)
    an = atom_norms(u)
    pos = u.space.positive
    K = u.space.truncation
    levels = {}
    for eps in eps_grid:
        head = int(np.sum(pos & (an >= eps)))
        if tail.limit < eps:
            if tail.monotone == "decreasing":
                k = _tail_crossing(tail, K + 1, eps)
                levels[eps] = (True, head + (k - K - 1))
            else:
                levels[eps] = (True, head)
        else:
            levels[eps] = (False, None)
    compact = all(fin for fin, _ in levels.values()) and tail.limit == 0
    return Compactness(compact, levels)


# ---------------------------------------------------------------------------
# Fredholm (N = 1, non-atomic)

@dataclass
class Fredholm:
    fredholm: bool
    invertible: bool
    bounded_below: bool
    closed_full_support: bool
    min_abs: float
    stable_under_refinement: bool

    @property
    def agree(self) -> bool:
        return self.invertible == self.bounded_below == self.closed_full_support


def _fredholm_checks(u: SymbolFunction, tol: float):
    vals = _scalar_values(u, "Fredholm analysis")
    pos = u.space.positive
    min_abs = float(np.abs(vals[pos]).min()) if np.any(pos) else math.inf
    inv = is_invertible(u, tol).invertible
    lower = min_abs >= tol
    cr = has_closed_range(u, tol).closed
    full = bool(np.all(vals[pos] != 0))
    return inv, lower, cr and full, min_abs


def is_fredholm(u: SymbolFunction, ns: NormSpec, tol: float = DEFAULT_TOL,
                factors=(2, 4)) -> Fredholm:
    """Fredholm verdict on a non-atomic space, with the equivalent conditions cross-checked.

    Checks invertibility, closed range with full support (the
    finite-codimension proxy) and ``|u| >= tol`` on every positive-weight
    atom, then repeats them on refinements of the space.
    """
    if u.dim != 1:
        raise HypothesisError("Fredholm analysis needs a scalar symbol (N = 1)")
    if not u.space.nonatomic:
        raise HypothesisError("Fredholm analysis needs a space flagged as non-atomic")
    if not ns.absolutely_continuous:
        raise HypothesisError(f"{ns.label()} does not have an absolutely continuous norm")
    inv, lower, closed_full, min_abs = _fredholm_checks(u, tol)
    stable = True
    for factor in factors:
        fine = refine(u.space, factor)
        r = _fredholm_checks(u.on_space(fine), tol)
        stable &= r[:3] == (inv, lower, closed_full)
    return Fredholm(inv, inv, lower, closed_full, min_abs, stable)


# ---------------------------------------------------------------------------
# commutant recovery (N = 1)

@dataclass
class Commutant:
    accepted: bool
    symbol: SymbolFunction | None
    witness: int | None
    commutator_norm: float
    residual: float = math.nan
    sup_bound: float = math.nan


def commutant_recover(a, space: MeasureSpace, tol: float = 1e-10) -> Commutant:
    """Recover v with A = M_v if A commutes with every singleton projection.

    The candidate is ``v = A e`` for the unit function ``e``.  Rejection
    reports the first singleton atom whose projection fails to commute.
    """
    a = np.asarray(a, dtype=complex)
    n = space.n_atoms
    if a.shape != (n, n):
        raise ValueError(f"operator must be {n}x{n}")
    worst = 0.0
    for i in range(n):
        # [A, P_i] = A P_i - P_i A, with P_i the projection onto atom i
        c = np.zeros_like(a)
        c[:, i] += a[:, i]
        c[i, :] -= a[i, :]
        cn = sup_induced_norm(c)
        worst = max(worst, cn)
        if cn > tol:
            return Commutant(False, None, i, cn)
    v = a @ np.ones(n)
    # a bounded operator cannot have |v| > n on a set of positive measure for every n
    sup = float(np.abs(v[space.positive]).max(initial=0.0))
    if not math.isfinite(sup):
        return Commutant(False, None, None, worst, math.inf, sup)
    sym = SymbolFunction.scalar(space, v)
    residual = sup_induced_norm(a - assemble_dense(sym).matrix)
    return Commutant(residual <= tol, sym, None, worst, residual, sup)


# ---------------------------------------------------------------------------
# full report

@dataclass
class OperatorReport:
    operator_norm: float
    essential_range: PointSet | None
    spectrum: PointSet
    bounded: bool
    invertible: bool
    closed_range: bool | None
    compact: bool | None
    fredholm: bool | None
    delta_invertibility: float
    delta_closed_range: float | None
    notes: list[str] = field(default_factory=list)


def analyze(u: SymbolFunction, ns: NormSpec, tol: float = DEFAULT_TOL,
            rng: np.random.Generator | None = None) -> OperatorReport:
    notes = []
    nrm = operator_norm(u)
    sp = spectrum(u)
    if sp.note:
        notes.append(sp.note)
    inv = is_invertible(u, tol, rng=rng)
    er = essential_range(u) if u.dim == 1 else None
    cr = has_closed_range(u, tol) if u.dim == 1 else None
    try:
        comp = is_compact(u)
        compact = comp.compact
        if comp.note:
            notes.append(comp.note)
    except MissingEnvelopeError as exc:
        compact = None
        notes.append(str(exc))
    fred = None
    if u.dim == 1 and u.space.nonatomic and ns.absolutely_continuous and u.space.mode == "finite":
        fred = is_fredholm(u, ns, tol).fredholm
    return OperatorReport(
        nrm, er, sp, math.isfinite(nrm), inv.invertible,
        None if cr is None else cr.closed,
        compact, fred, inv.delta,
        None if cr is None else cr.delta,
        notes,
    )
