"""C^N-valued Banach function spaces over a weighted-atom measure space.

Every norm here is a lattice norm of the pointwise sup-norm
``|f(x)| = max_j |f_j(x)|``: Lebesgue L^p, Orlicz (Luxemburg norm) and
Lorentz L^{p,q}.  Norm evaluation is vectorized over leading axes, which
the probe-heavy checks rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .measure import MeasurableSet, MeasureSpace, measure_of


# ---------------------------------------------------------------------------
# vector functions

@dataclass(frozen=True, eq=False)
class VectorFunction:
    space: MeasureSpace
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] != self.space.n_atoms:
            raise ValueError(f"expected values of shape ({self.space.n_atoms}, N), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("vector function has non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @classmethod
    def zeros(cls, space: MeasureSpace, dim: int) -> "VectorFunction":
        return cls(space, np.zeros((space.n_atoms, dim), dtype=complex))

    @classmethod
    def constant(cls, space: MeasureSpace, z) -> "VectorFunction":
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return cls(space, np.broadcast_to(z, (space.n_atoms, len(z))))

    @classmethod
    def random(cls, space: MeasureSpace, dim: int, rng: np.random.Generator) -> "VectorFunction":
        shape = (space.n_atoms, dim)
        return cls(space, rng.normal(size=shape) + 1j * rng.normal(size=shape))

    def magnitudes(self) -> np.ndarray:
        return np.abs(self.values).max(axis=1)

    def restrict(self, s: MeasurableSet) -> "VectorFunction":
        return VectorFunction(self.space, self.values * s.mask[:, None])

    def __add__(self, other: "VectorFunction") -> "VectorFunction":
        return VectorFunction(self.space, self.values + other.values)

    def __sub__(self, other: "VectorFunction") -> "VectorFunction":
        return VectorFunction(self.space, self.values - other.values)

    def __mul__(self, alpha) -> "VectorFunction":
        return VectorFunction(self.space, self.values * alpha)

    __rmul__ = __mul__

    def __neg__(self) -> "VectorFunction":
        return VectorFunction(self.space, -self.values)


def indicator(s: MeasurableSet, z) -> VectorFunction:
    """The function equal to ``z`` on ``s`` and zero elsewhere."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    return VectorFunction(s.space, s.mask[:, None] * z[None, :])


# ---------------------------------------------------------------------------
# Young functions

YOUNG_FUNCTIONS: dict[str, Callable[[np.ndarray, float], np.ndarray]] = {
    "tp": lambda t, p: t ** p,
    "tp_log": lambda t, p: t ** p * np.log1p(t),
    "t2_frac": lambda t, p: t * t / (1.0 + t),
}


def _check_young(phi: Callable[[np.ndarray], np.ndarray]) -> None:
    t = np.concatenate([np.linspace(0, 4, 401), np.geomspace(4, 1e3, 200)[1:]])
    v = phi(t)
    if v[0] != 0:
        raise ValueError("Young function must vanish at 0")
    if np.any(np.diff(v) <= 0):
        raise ValueError("Young function must be increasing")
    # second differences on the uniform part of the grid
    d2 = v[:399] - 2 * v[1:400] + v[2:401]
    if np.any(d2 < -1e-12 * np.abs(v[2:401])):
        raise ValueError("Young function must be convex")


# ---------------------------------------------------------------------------
# norm specifications

@dataclass(frozen=True)
class NormSpec:
    """A Banach function norm: ``lp``, ``orlicz`` or ``lorentz``."""

    kind: str
    p: float = 2.0
    q: float = 2.0
    phi: str | None = None
    young: Callable | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind == "lp":
            if not self.p >= 1:
                raise ValueError("L^p needs p in [1, inf]")
        elif self.kind == "orlicz":
            if self.young is None:
                if self.phi not in YOUNG_FUNCTIONS:
                    raise ValueError(f"unknown Young function {self.phi!r}")
                if self.phi != "t2_frac" and not self.p >= 1:
                    raise ValueError("Young function exponent must be >= 1")
                base, p = YOUNG_FUNCTIONS[self.phi], self.p
                young = lambda t: base(t, p)  # noqa: E731
                _check_young(young)
                object.__setattr__(self, "young", young)
        elif self.kind == "lorentz":
            if not (0 < self.p < math.inf) or not self.q > 0:
                raise ValueError("Lorentz needs p in (0, inf) and q in (0, inf]")
        else:
            raise ValueError(f"unknown norm kind {self.kind!r}")

    @classmethod
    def lp(cls, p: float) -> "NormSpec":
        return cls("lp", p=float(p))

    @classmethod
    def orlicz(cls, phi: str = "tp", p: float = 2.0) -> "NormSpec":
        return cls("orlicz", p=float(p), phi=phi)

    @classmethod
    def orlicz_custom(cls, young: Callable, name: str = "custom", check: bool = True) -> "NormSpec":
        """Orlicz norm with an arbitrary Young function.

        ``check=False`` skips the convexity/monotonicity validation, which
        test fixtures use to build deliberately broken norms.
        """
        if check:
            _check_young(young)
        return cls("orlicz", p=math.nan, phi=name, young=young)

    @classmethod
    def lorentz(cls, p: float, q: float) -> "NormSpec":
        return cls("lorentz", p=float(p), q=float(q))

    @property
    def absolutely_continuous(self) -> bool:
        if self.kind == "lp":
            return self.p < math.inf
        if self.kind == "lorentz":
            return self.q < math.inf
        return True

    def label(self) -> str:
        if self.kind == "lp":
            return f"L^{self.p:g}"
        if self.kind == "orlicz":
            return f"Orlicz[{self.phi},{self.p:g}]"
        return f"L^({self.p:g},{self.q:g})"

    def to_json(self) -> dict:
        if self.kind == "lp":
            return {"type": "lp", "p": self.p if self.p < math.inf else "inf"}
        if self.kind == "orlicz":
            return {"type": "orlicz", "phi": self.phi, "p": self.p}
        return {"type": "lorentz", "p": self.p, "q": self.q if self.q < math.inf else "inf"}

    def of_magnitudes(self, a, weights) -> np.ndarray:
        """Norm of functions given by pointwise magnitudes ``a`` (..., n)."""
        a = np.asarray(a, dtype=float)
        w = np.asarray(weights, dtype=float)
        if self.kind == "lp":
            return _lp(a, w, self.p)
        if self.kind == "orlicz":
            return luxemburg(a, w, self.young)
        return _lorentz(a, w, self.p, self.q)


def _lp(a, w, p):
    pos = w > 0
    if p == math.inf:
        return np.where(pos, a, 0.0).max(axis=-1)
    m = np.where(pos, a, 0.0).max(axis=-1)
    safe = np.where(m > 0, m, 1.0)
    s = (w * (a / safe[..., None]) ** p).sum(axis=-1)
    return np.where(m > 0, safe * s ** (1.0 / p), 0.0)


def luxemburg(a, w, young, rtol: float = 1e-13, max_iter: int = 400) -> np.ndarray:
    """Luxemburg norm inf{k > 0 : sum_i w_i Phi(a_i / k) <= 1}.

    Bracketing by factors of two around ``max a``, then bisection until
    the bracket's relative width is below ``rtol``.  Returns the upper end
    of the bracket, where the modular is <= 1.
    """
    a = np.asarray(a, dtype=float)
    w = np.asarray(w, dtype=float)
    pos = w > 0
    a = np.where(pos, a, 0.0)
    batch = a.shape[:-1]
    m = a.max(axis=-1)
    nz = m > 0
    if not np.any(nz):
        return np.zeros(batch)
    af = a[nz]

    def modular(k):
        with np.errstate(over="ignore", invalid="ignore"):
            return (w * young(af / k[:, None])).sum(axis=-1)

    lo = m[nz].copy()
    hi = m[nz].copy()
    for _ in range(2000):
        small = modular(lo) < 1
        if not np.any(small):
            break
        lo[small] *= 0.5
    for _ in range(2000):
        big = ~(modular(hi) <= 1)
        if not np.any(big):
            break
        hi[big] *= 2.0
    for _ in range(max_iter):
        active = hi - lo > rtol * hi
        if not np.any(active):
            break
        mid = 0.5 * (lo + hi)
        ok = modular(mid) <= 1
        hi = np.where(active & ok, mid, hi)
        lo = np.where(active & ~ok, mid, lo)
    out = np.zeros(batch)
    out[nz] = hi
    return out


def _lorentz(a, w, p, q):
    order = np.argsort(-a, axis=-1, kind="stable")
    v = np.take_along_axis(a, order, axis=-1)
    ww = np.broadcast_to(w, a.shape)
    ws = np.take_along_axis(ww, order, axis=-1)
    t = np.cumsum(ws, axis=-1)
    t_prev = t - ws
    if q == math.inf:
        return (v * t ** (1.0 / p)).max(axis=-1)
    r = q / p
    steps = v ** q * (p / q) * (t ** r - t_prev ** r)
    return steps.sum(axis=-1) ** (1.0 / q)


def norm(f: VectorFunction, ns: NormSpec) -> float:
    if ns.kind == "lorentz" and f.space.mode != "finite":
        raise ValueError("Lorentz norms need a finite space (rearrangement)")
    return float(ns.of_magnitudes(f.magnitudes(), f.space.weights))


def norms(values: np.ndarray, space: MeasureSpace, ns: NormSpec) -> np.ndarray:
    """Norms of a batch of vector functions with values (..., n, N)."""
    return ns.of_magnitudes(np.abs(values).max(axis=-1), space.weights)


def decreasing_rearrangement(f: VectorFunction) -> list[tuple[float, float]]:
    """Decreasing step function equimeasurable with ``|f|``: (value, width) pairs.

    Equal values are merged; zero-weight atoms are dropped.
    """
    if f.space.mode != "finite":
        raise ValueError("decreasing rearrangement needs a finite space")
    a = f.magnitudes()
    w = f.space.weights
    keep = w > 0
    a, w = a[keep], w[keep]
    order = np.argsort(-a, kind="stable")
    steps: list[tuple[float, float]] = []
    for v, width in zip(a[order], w[order]):
        if steps and steps[-1][0] == v:
            steps[-1] = (v, steps[-1][1] + width)
        else:
            steps.append((float(v), float(width)))
    return steps


def lp_of_steps(steps: Sequence[tuple[float, float]], p: float) -> float:
    v = np.array([s[0] for s in steps])
    w = np.array([s[1] for s in steps])
    return float(_lp(v, w, p))


# ---------------------------------------------------------------------------
# associate norms (estimators only)

def lp_associate_norm(g: VectorFunction, p: float) -> float:
    """Exact associate norm of L^p with the sup-norm on C^N: the L^{p'} norm of |g|_1."""
    a = np.abs(g.values).sum(axis=1)
    if p == 1:
        q = math.inf
    elif p == math.inf:
        q = 1.0
    else:
        q = p / (p - 1)
    return float(_lp(a, g.space.weights, q))


def associate_norm_estimate(g: VectorFunction, ns: NormSpec, samples: int, rng: np.random.Generator) -> float:
    """Sampled lower bound for ``||g||_{X'}``.

    The probes include the aligned functions ``conj(sign g) |g|_1^s`` for a
    few exponents ``s``, which attain the L^p value.
    """
    space = g.space
    n, dim = g.values.shape
    w = space.weights
    probes = rng.normal(size=(samples, n, dim)) + 1j * rng.normal(size=(samples, n, dim))
    phase = np.exp(-1j * np.angle(g.values))
    g1 = np.abs(g.values).sum(axis=1)
    aligned = [phase * (g1 ** s)[:, None] for s in np.linspace(0, 4, 17)]
    probes = np.concatenate([probes, np.array(aligned)], axis=0)
    pairing = np.abs((w[:, None] * probes * g.values).sum(axis=(1, 2)))
    nf = norms(probes, space, ns)
    ok = nf > 0
    return float((pairing[ok] / nf[ok]).max()) if np.any(ok) else 0.0


# ---------------------------------------------------------------------------
# axiom checks

@dataclass
class LocalBound:
    measure: float
    sampled: float
    closed_form: float | None

    @property
    def violated(self) -> bool:
        if not np.isfinite(self.sampled):
            return True
        return self.closed_form is not None and self.sampled > self.closed_form + 1e-9


@dataclass
class AxiomReport:
    monotonicity_violations: int
    fatou_violations: int
    fatou_gap: float
    local: list[LocalBound]

    @property
    def local_violations(self) -> int:
        return sum(b.violated for b in self.local)

    @property
    def passed(self) -> bool:
        return self.monotonicity_violations == 0 and self.fatou_violations == 0 and self.local_violations == 0


def _holder_constant(ns: NormSpec, mu: float) -> float | None:
    if ns.kind != "lp":
        return None
    if ns.p == math.inf:
        return mu
    return mu ** (1.0 - 1.0 / ns.p)


def verify_axioms(ns: NormSpec, space: MeasureSpace, sample_count: int = 200,
                  rng: np.random.Generator | None = None, dim: int = 1) -> AxiomReport:
    """Sample the three function-norm axioms for ``ns`` on ``space``.

    Monotonicity over dominated pairs, the Fatou property along
    increasing truncations, and the local integrability constant C_E on
    random sets (compared with the Holder constant for L^p).
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    n = space.n_atoms
    w = space.weights

    # monotone: |f(x)| <= |g(x)| everywhere  =>  ||f|| <= ||g||
    scale = 10.0 ** rng.uniform(-2, 2, size=(sample_count, 1))
    g = rng.uniform(0, 1, size=(sample_count, n)) * scale
    f = g * rng.uniform(0, 1, size=(sample_count, n)) * (rng.uniform(size=(sample_count, n)) < 0.8)
    # plus pairs that differ by raising a single atom
    bump = g.copy()
    rows = np.arange(sample_count)
    bump[rows, rng.integers(0, n, sample_count)] *= rng.uniform(1, 3, sample_count)
    f = np.concatenate([f, g])
    g = np.concatenate([g, bump])
    nf = ns.of_magnitudes(f, w)
    ng = ns.of_magnitudes(g, w)
    mono = int(np.sum(nf > ng + 1e-12 * np.maximum(1.0, np.abs(ng))))

    # Fatou: 0 <= f_n increasing to f  =>  ||f_n|| increasing to ||f||
    fatou_viol = 0
    gap = 0.0
    base = rng.uniform(0, 1, size=(max(sample_count // 10, 1), n, dim)) * scale[: max(sample_count // 10, 1), :, None]
    for fb in base:
        a = fb.max(axis=1)
        target = float(ns.of_magnitudes(a, w))
        levels = np.linspace(0, fb.max(), 21)[1:]
        trunc = np.minimum(fb[None, :, :], levels[:, None, None]).max(axis=2)
        shrink = (1.0 - 2.0 ** -np.arange(1, 41))[:, None] * a[None, :]
        seqs = [ns.of_magnitudes(trunc, w), ns.of_magnitudes(shrink, w)]
        for s in seqs:
            tol = 1e-12 * max(1.0, target)
            if np.any(np.diff(s) < -tol) or np.any(s > target + tol):
                fatou_viol += 1
            last_gap = abs(s[-1] - target) / max(1.0, target)
            gap = max(gap, last_gap)
            if last_gap > 1e-10:
                fatou_viol += 1

    # local: int_E |f| dmu <= C_E ||f||
    local = []
    for _ in range(8):
        mask = rng.uniform(size=n) < rng.uniform(0.2, 1.0)
        if not np.any(mask & (w > 0)):
            mask[int(np.argmax(w))] = True
        s = space.subset(mask)
        mu = measure_of(s)
        probes = rng.uniform(0, 1, size=(sample_count, n)) ** rng.uniform(0.2, 5, size=(sample_count, 1))
        probes = np.concatenate([probes, mask[None, :].astype(float)], axis=0)
        integrals = (probes * (w * mask)).sum(axis=1)
        nx = ns.of_magnitudes(probes, w)
        ratio = np.where(nx > 0, integrals / np.where(nx > 0, nx, 1.0), 0.0)
        ind_norm = float(ns.of_magnitudes(mask.astype(float), w))
        sampled = float(ratio.max()) if np.isfinite(ind_norm) else math.inf
        local.append(LocalBound(mu, sampled, _holder_constant(ns, mu)))
    return AxiomReport(mono, fatou_viol, gap, local)


# ---------------------------------------------------------------------------
# absolute continuity

@dataclass
class AbsoluteContinuity:
    converges: bool
    norms: list[float]
    measures: list[float]


def _geometric_decay(seq: Sequence[float], ratio: float = 0.99, count: int = 3) -> bool:
    if len(seq) < count + 1:
        return False
    tail = seq[-(count + 1):]
    return all(b <= ratio * a for a, b in zip(tail, tail[1:]))


def absolute_continuity_check(f: VectorFunction, sets: Sequence[MeasurableSet], ns: NormSpec,
                              threshold: float = 1e-10) -> AbsoluteContinuity:
    """Track ``||f 1_{E_n}||`` along a shrinking sequence of sets.

    The sequence must be nested and shrink to a null set: either the last
    set is null or the measures decay geometrically.  The norm sequence
    is declared convergent to zero when it falls below ``threshold`` or
    decays geometrically over its last steps.
    """
    for a, b in zip(sets, sets[1:]):
        if not b <= a:
            raise ValueError("sets are not nested")
    measures = [measure_of(s) for s in sets]
    if sets and measures[-1] > 0 and not _geometric_decay(measures):
        raise ValueError("sets do not shrink to a null set")
    seq = [norm(f.restrict(s), ns) for s in sets]
    converges = bool(seq) and (seq[-1] < threshold or _geometric_decay(seq))
    return AbsoluteContinuity(converges, seq, measures)


def halving_sets(space: MeasureSpace, steps: int) -> list[MeasurableSet]:
    """E_0 = full space, E_{k+1} = first half of the atoms of E_k."""
    idx = np.arange(space.n_atoms)
    out = []
    count = space.n_atoms
    for _ in range(steps + 1):
        out.append(space.subset(idx[:count]))
        count //= 2
    return out
