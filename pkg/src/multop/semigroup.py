"""Multiplication semigroups T(t) = M_{exp(t u)} and the abstract Cauchy problem.

Also: generation tests, spectral mapping, resolvents and m-times
integrated semigroups together with their Laplace-transform identity.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .function_space import NormSpec, VectorFunction, norms
from .matrix import eigenvalues, expm, inverse, sup_induced_norm
from .operator import _require_tail, apply, spectrum
from .pointset import hausdorff
from .quadrature import gauss_legendre
from .symbol import SymbolFunction

C_CAP = 1e6
GENERATION_GRID = tuple([2.0 ** -j for j in range(21)])


class ResolventError(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# generation

@dataclass
class Generation:
    generates: bool
    c: float
    grid: tuple
    sup_values: np.ndarray
    note: str = ""


def _limit_settles(g: np.ndarray, ts, t_small: float = 1e-3) -> bool:
    """Do the sampled values settle as t -> 0?

    Below ``t_small`` the successive differences of g along the dyadic
    grid must shrink geometrically (ratio 3/4), as they do for any symbol
    with ``||exp(t u(x)) - I|| = O(t)`` uniformly.
    """
    small = [v for v, t in zip(g, ts) if t < t_small]
    d = np.abs(np.diff(small))
    floor = 1e-12 * max(1.0, float(np.max(small)))
    return bool(np.all(d[1:] <= 0.75 * d[:-1] + floor))


def generation_check(u: SymbolFunction, cap: float = C_CAP) -> Generation:
    """Sample t -> ess sup_x ||exp(t u(x))|| on t = 2^-j, j = 0..20.

    Generation holds when the sampled sup stays below ``cap`` and settles
    as t -> 0.  Sequence-mode symbols are additionally probed lazily at
    untruncated atoms K+1, 2(K+1), 4(K+1), ...
    """
    v = u.values()[u.space.positive]
    note = ""
    tail_bound = 0.0
    if u.space.mode == "sequence":
        tail = _require_tail(u)
        _, tv = u.tail_values()
        if np.all(np.isfinite(tv)):
            v = np.concatenate([v, tv])
        tail_bound = tail.sup_beyond(u.space.truncation)
    ts = np.array(GENERATION_GRID)
    stack = ts[:, None, None, None] * v[None]
    g = sup_induced_norm(expm(stack)).max(axis=1)
    # T(0) = I belongs to [0, 1] as well
    c = max(float(g.max()), 1.0)
    if not c <= cap:
        return Generation(False, c, GENERATION_GRID, g, "sampled sup exceeds cap")
    settles = _limit_settles(g, ts)
    if not settles:
        return Generation(False, c, GENERATION_GRID, g, "no limit as t -> 0")
    if not math.isfinite(tail_bound):
        note = "undetermined: tail norm envelope is unbounded"
        return Generation(False, c, GENERATION_GRID, g, note)
    return Generation(True, c, GENERATION_GRID, g, note)


# ---------------------------------------------------------------------------
# semigroup and Cauchy problem

def semigroup_at(u: SymbolFunction, t: float) -> SymbolFunction:
    if t < 0:
        raise ValueError("semigroup time must be nonnegative")
    return SymbolFunction.table(u.space, expm(t * u.values()))


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    values: np.ndarray  # (K, n, N)
    space: object

    def at(self, k: int) -> VectorFunction:
        return VectorFunction(self.space, self.values[k])

    def rows(self):
        for t, vt in zip(self.times, self.values):
            for i, row in enumerate(vt):
                for j, z in enumerate(row):
                    yield t, i, j, z

    def to_csv(self, stream=None) -> str:
        """CSV with header ``t,atom_index,component,re,im`` and 17 significant digits."""
        buf = io.StringIO() if stream is None else stream
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "atom_index", "component", "re", "im"])
        for t, i, j, z in self.rows():
            w.writerow([f"{t:.17g}", i, j, f"{z.real:.17g}", f"{z.imag:.17g}"])
        return buf.getvalue() if stream is None else ""


def _check_grid(t_grid) -> np.ndarray:
    ts = np.asarray(t_grid, dtype=float)
    if ts.ndim != 1 or len(ts) == 0:
        raise ValueError("time grid must be a non-empty list")
    if ts[0] != 0:
        raise ValueError("time grid must start at 0")
    if np.any(np.diff(ts) <= 0):
        raise ValueError("time grid must be strictly ascending")
    if not np.all(np.isfinite(ts)):
        raise ValueError("time grid must be finite")
    return ts


def solve_acp(u: SymbolFunction, x: VectorFunction, t_grid) -> Trajectory:
    """v(t) = exp(t u) x on the grid."""
    ts = _check_grid(t_grid)
    if x.dim != u.dim:
        raise ValueError("initial value has the wrong number of components")
    v = u.values()
    out = np.empty((len(ts),) + x.values.shape, dtype=complex)
    for k, t in enumerate(ts):
        if t == 0:
            out[k] = x.values
        else:
            out[k] = np.einsum("nij,nj->ni", expm(t * v), x.values)
    return Trajectory(ts, out, u.space)


def rk4_oracle(u: SymbolFunction, x: VectorFunction, t_end: float, h: float) -> VectorFunction:
    """Classical Runge-Kutta for v' = u(x) v, atom by atom."""
    if not h > 0:
        raise ValueError("step size must be positive")
    a = u.values()
    v = np.array(x.values, dtype=complex)
    steps = int(math.ceil(t_end / h - 1e-9))

    def rhs(y):
        return np.einsum("nij,nj->ni", a, y)

    t = 0.0
    for _ in range(steps):
        dt = min(h, t_end - t)
        k1 = rhs(v)
        k2 = rhs(v + 0.5 * dt * k1)
        k3 = rhs(v + 0.5 * dt * k2)
        k4 = rhs(v + dt * k3)
        v = v + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
    return VectorFunction(x.space, v)


def spectral_mapping_check(u: SymbolFunction, t: float) -> float:
    """Hausdorff distance between sigma(T(t)) and exp(t sigma(M_u))."""
    lhs = spectrum(semigroup_at(u, t)).all_points()
    rhs = np.exp(t * spectrum(u).all_points())
    return hausdorff(lhs, rhs)


# ---------------------------------------------------------------------------
# resolvent

def resolvent(u: SymbolFunction, lam: complex, probes: int = 5,
              rng: np.random.Generator | None = None) -> SymbolFunction:
    """(lam - u(x))^{-1} per atom, checked against (lam - M_u) on probe functions."""
    lam = complex(lam)
    dist = spectrum(u).distance_to(lam)
    if dist < 1e-9:
        raise ResolventError(f"lambda = {lam} lies within 1e-9 of the spectrum")
    v = u.values()
    eye = np.eye(u.dim, dtype=complex)
    r = np.array([inverse(lam * eye - m) for m in v])
    sym = SymbolFunction.table(u.space, r)
    rng = rng if rng is not None else np.random.default_rng(0)
    for _ in range(probes):
        f = VectorFunction.random(u.space, u.dim, rng)
        back = apply(sym, f * lam - apply(u, f))
        err = np.abs(back.values - f.values).max() / np.abs(f.values).max()
        if err > 1e-9:
            raise ResolventError(f"resolvent check failed: residual {err:.3e}")
    return sym


# ---------------------------------------------------------------------------
# integrated semigroups

@dataclass
class IntegratedCheck:
    generator: bool
    w: float
    half_plane: bool
    bound_holds: bool

    @property
    def agree(self) -> bool:
        return self.half_plane == self.bound_holds


def spectral_abscissa(u: SymbolFunction) -> float:
    """w* = ess sup_x s(u(x)), including the tail bound in sequence mode."""
    v = u.values()[u.space.positive]
    w = max((float(eigenvalues(m).values.real.max()) for m in v), default=-math.inf)
    if u.space.mode == "sequence":
        tail = _require_tail(u)
        if tail.spectral_abscissa is not None:
            w = max(w, tail.spectral_abscissa)
        else:
            w = max(w, tail.sup_beyond(u.space.truncation))
    return w


def integrated_semigroup_check(u: SymbolFunction, tol: float = 1e-9) -> IntegratedCheck:
    """Integrated-semigroup generation: sigma(M_u) in a half-plane Re z <= w.

    The half-plane condition is read off the assembled spectrum; the
    bound on ess sup s(u(x)) from per-atom spectral bounds.
    """
    w = spectral_abscissa(u)
    gen = math.isfinite(w)
    sp = spectrum(u)
    half_plane = bool(gen and sp.max_real() <= w + tol)
    if u.space.mode == "sequence" and not gen:
        half_plane = False
    return IntegratedCheck(gen, w, half_plane, gen)


def _integrated_blocks(v: np.ndarray, ts: np.ndarray, m: int, rtol: float = 1e-10) -> np.ndarray:
    """S_m(t) = int_0^t (t-s)^(m-1)/(m-1)! exp(s A) ds for every block A and time t.

    Uses s = t*tau so that all times share one adaptive quadrature on
    [0, 1]; the result has shape (len(ts), n, N, N).
    """
    ts = np.asarray(ts, dtype=float)
    if m == 0:
        return expm(ts[:, None, None, None] * v[None])
    fact = math.factorial(m - 1)

    def integrand(tau):
        weight = (1.0 - tau) ** (m - 1) / fact
        arg = (tau[:, None] * ts[None, :])[:, :, None, None, None] * v[None, None]
        return weight[:, None, None, None, None] * expm(arg)

    inner = gauss_legendre(integrand, 0.0, 1.0, rtol=rtol, order=16)
    return (ts ** m)[:, None, None, None] * inner


def integrated_semigroup_at(u: SymbolFunction, t: float, m: int) -> SymbolFunction:
    if t < 0 or m < 0:
        raise ValueError("need t >= 0 and m >= 0")
    return SymbolFunction.table(u.space, _integrated_blocks(u.values(), np.array([t]), m)[0])


def laplace_horizon(gap: float, m: int, dim: int, target: float = 1e-12) -> float:
    """T with exp(-gap T) (1 + T)^(m + dim) <= target."""
    power = m + dim
    t = math.log(1 / target) / gap
    for _ in range(200):
        t_new = (math.log(1 / target) + power * math.log1p(t)) / gap
        if abs(t_new - t) < 1e-9:
            break
        t = t_new
    return t_new


@dataclass
class LaplaceCheck:
    relative_error: float
    lam: complex
    m: int
    t_max: float
    w_star: float


def laplace_identity_check(u: SymbolFunction, lam: complex, m: int, t_max: float | None = None,
                           probes: int = 3, rng: np.random.Generator | None = None,
                           min_gap: float = 0.5) -> LaplaceCheck:
    """Compare lam^m int_0^T e^{-lam t} S_m(t) y dt with R(lam, M_u) y."""
    lam = complex(lam)
    w_star = spectral_abscissa(u)
    gap = lam.real - w_star
    if not gap >= min_gap:
        raise ValueError(f"insufficient decay margin: Re(lambda) - w* = {gap:.3g} < {min_gap}")
    if t_max is None:
        t_max = laplace_horizon(gap, m, u.dim)
    rng = rng if rng is not None else np.random.default_rng(0)
    v = u.values()
    n, N = v.shape[0], u.dim
    y = rng.normal(size=(probes, n, N)) + 1j * rng.normal(size=(probes, n, N))

    def integrand(ts):
        s = _integrated_blocks(v, ts, m)
        sy = np.einsum("tnij,pnj->tpni", s, y)
        return np.exp(-lam * ts)[:, None, None, None] * sy

    integral = gauss_legendre(integrand, 0.0, t_max, rtol=1e-9)
    lhs = lam ** m * integral
    r = resolvent(u, lam)
    rhs = np.einsum("nij,pnj->pni", r.values(), y)
    err = float(np.abs(lhs - rhs).max() / np.abs(rhs).max())
    return LaplaceCheck(err, lam, m, t_max, w_star)


# ---------------------------------------------------------------------------
# growth and stability

@dataclass
class Stability:
    w_star: float
    fitted_m: float
    eps: float


def stability_bound(u: SymbolFunction, ns: NormSpec | None = None, eps: float = 0.1,
                    t_grid=None, probes: int = 10,
                    rng: np.random.Generator | None = None) -> Stability:
    """w* and the least M with ||v(t)|| <= M e^{(w*+eps)t} ||x|| over probe trajectories."""
    ns = ns or NormSpec.lp(2)
    rng = rng if rng is not None else np.random.default_rng(0)
    w_star = spectral_abscissa(u)
    ts = np.linspace(0.0, 10.0, 41) if t_grid is None else _check_grid(t_grid)
    v = u.values()
    flows = expm(ts[:, None, None, None] * v[None])
    n, N = v.shape[0], u.dim
    x = rng.normal(size=(probes, n, N)) + 1j * rng.normal(size=(probes, n, N))
    traj = np.einsum("tnij,pnj->tpni", flows, x)
    ratio = norms(traj, u.space, ns) / norms(x, u.space, ns)[None, :]
    fitted = float((ratio * np.exp(-(w_star + eps) * ts)[:, None]).max())
    return Stability(w_star, fitted, eps)


@dataclass
class SemigroupReport:
    generates_c0: bool
    c: float
    w_star: float
    integrated_generator: bool
    w: float
    m: int
    growth_m: float
    growth_w: float
    note: str = ""


def semigroup_report(u: SymbolFunction, m: int | None = None, eps: float = 0.1) -> SemigroupReport:
    gen = generation_check(u)
    integ = integrated_semigroup_check(u)
    m = 2 * u.dim + 1 if m is None else m
    growth_m = math.nan
    growth_w = math.nan
    if integ.generator and u.space.mode == "finite":
        growth_w = max(integ.w, 0.0) + eps
        ts = np.array([0.25, 0.5, 1.0, 2.0, 4.0, 8.0])
        s = _integrated_blocks(u.values(), ts, m)
        growth_m = float((sup_induced_norm(s).max(axis=1) * np.exp(-growth_w * ts)).max())
    note = gen.note
    sp = spectrum(u)
    if sp.note:
        note = "; ".join(filter(None, [note, sp.note]))
    return SemigroupReport(gen.generates, gen.c, integ.w, integ.generator, integ.w, m,
                           growth_m, growth_w, note)
