"""Weighted-atom measure spaces and measurable sets."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class MeasureSpace:
    """A sigma-finite measure space discretized into weighted atoms.

    In ``finite`` mode the atoms are the whole space.  In ``sequence`` mode
    the space is the countable set {1, 2, ...} with weights given by a rule;
    only the first ``truncation`` atoms are materialized and ``tail_mass``
    bounds the measure of everything beyond.  Atom ``k`` (1-based) of a
    sequence space has coordinate ``x = k``.

    Zero-weight atoms are allowed; they are null sets and ignored by every
    analyzer.
    """

    coords: np.ndarray
    weights: np.ndarray
    mode: str = "finite"
    nonatomic: bool = False
    weight_rule: dict | None = None
    tail_mass: float = 0.0

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float).copy()
        weights = np.asarray(self.weights, dtype=float).copy()
        if coords.ndim != 1 or coords.shape != weights.shape:
            raise ValueError("coords and weights must be 1-d arrays of equal length")
        if len(coords) == 0:
            raise ValueError("a measure space needs at least one atom")
        if not np.all(np.isfinite(coords)):
            raise ValueError("atom coordinates must be finite")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise ValueError("weights must be finite and nonnegative")
        if self.mode not in ("finite", "sequence"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not (np.isfinite(self.tail_mass) and self.tail_mass >= 0):
            raise ValueError("tail mass bound must be finite and nonnegative")
        coords.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def finite(cls, coords, weights=None, nonatomic: bool = False) -> "MeasureSpace":
        coords = np.asarray(coords, dtype=float)
        if weights is None:
            weights = np.full(len(coords), 1.0 / max(len(coords), 1))
        return cls(coords, np.asarray(weights, dtype=float), "finite", nonatomic)

    @classmethod
    def uniform(cls, n: int, lo: float = 0.0, hi: float = 1.0, nonatomic: bool = False) -> "MeasureSpace":
        """``n`` equal-weight atoms at cell midpoints of [lo, hi]."""
        h = (hi - lo) / n
        coords = lo + h * (np.arange(n) + 0.5)
        return cls(coords, np.full(n, h), "finite", nonatomic)

    @classmethod
    def sequence(cls, truncation: int, rule: str = "geometric", **params) -> "MeasureSpace":
        """Countable space {1, 2, ...} truncated after ``truncation`` atoms.

        Rules: ``geometric`` (w_k = ratio**k, exact tail) and ``power``
        (w_k = k**-exponent, exponent > 1, integral tail bound).
        """
        if truncation < 1:
            raise ValueError("truncation index must be >= 1")
        k = np.arange(1, truncation + 1, dtype=float)
        if rule == "geometric":
            r = float(params.get("ratio", 0.5))
            if not 0 < r < 1:
                raise ValueError("geometric ratio must lie in (0, 1)")
            weights = r ** k
            tail = r ** (truncation + 1) / (1 - r)
            wr = {"type": "geometric", "ratio": r}
        elif rule == "power":
            p = float(params.get("exponent", 2.0))
            if p <= 1:
                raise ValueError("power exponent must exceed 1")
            weights = k ** -p
            tail = truncation ** (1 - p) / (p - 1)
            wr = {"type": "power", "exponent": p}
        else:
            raise ValueError(f"unknown weight rule {rule!r}")
        return cls(k, weights, "sequence", False, wr, float(tail))

    @property
    def n_atoms(self) -> int:
        return len(self.weights)

    @property
    def truncation(self) -> int:
        return self.n_atoms

    @property
    def positive(self) -> np.ndarray:
        return self.weights > 0

    def total_measure(self) -> float:
        return float(self.weights.sum()) + self.tail_mass

    def weight_of_index(self, k: int) -> float:
        """Weight of the k-th atom (1-based) of a sequence space, beyond truncation too."""
        if self.mode != "sequence":
            return float(self.weights[k - 1])
        if self.weight_rule["type"] == "geometric":
            return self.weight_rule["ratio"] ** k
        return float(k) ** -self.weight_rule["exponent"]

    def full(self) -> "MeasurableSet":
        return MeasurableSet(self, np.ones(self.n_atoms, dtype=bool), tail=self.mode == "sequence")

    def empty(self) -> "MeasurableSet":
        return MeasurableSet(self, np.zeros(self.n_atoms, dtype=bool))

    def singleton(self, i: int) -> "MeasurableSet":
        mask = np.zeros(self.n_atoms, dtype=bool)
        mask[i] = True
        return MeasurableSet(self, mask)

    def subset(self, indices_or_mask) -> "MeasurableSet":
        arr = np.asarray(indices_or_mask)
        if arr.dtype == bool:
            return MeasurableSet(self, arr)
        mask = np.zeros(self.n_atoms, dtype=bool)
        mask[arr.astype(int)] = True
        return MeasurableSet(self, mask)


@dataclass(frozen=True, eq=False)
class MeasurableSet:
    space: MeasureSpace
    mask: np.ndarray
    tail: bool = field(default=False)

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool).copy()
        if mask.shape != (self.space.n_atoms,):
            raise ValueError(f"mask must have length {self.space.n_atoms}")
        if self.tail and self.space.mode != "sequence":
            raise ValueError("only sequence spaces have a tail")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    def __le__(self, other: "MeasurableSet") -> bool:
        return bool(np.all(~self.mask | other.mask)) and (other.tail or not self.tail)

    def __and__(self, other):
        return MeasurableSet(self.space, self.mask & other.mask, self.tail and other.tail)

    def __or__(self, other):
        return MeasurableSet(self.space, self.mask | other.mask, self.tail or other.tail)

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask)


def measure_of(s: MeasurableSet) -> float:
    """Sum of member weights.

    A sequence-mode set that includes the tail adds the certified tail
    mass (exact for geometric weights, an upper bound for power weights).
    """
    m = float(s.space.weights[s.mask].sum())
    if s.tail:
        m += s.space.tail_mass
    return m


def refine(space: MeasureSpace, factor: int) -> MeasureSpace:
    """Split every atom into ``factor`` children of equal weight.

    Children keep their parent's coordinate, so any symbol defined on the
    coarse space transports unchanged.
    """
    if space.mode != "finite":
        raise ValueError("refine is only defined for finite spaces")
    if int(factor) != factor or factor < 1:
        raise ValueError("refinement factor must be a positive integer")
    if factor == 1:
        return space
    coords = np.repeat(space.coords, factor)
    weights = np.repeat(space.weights / factor, factor)
    return MeasureSpace(coords, weights, "finite", space.nonatomic)
