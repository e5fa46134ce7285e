"""Matrix-valued symbols u: Omega -> M_N(C)."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .dsl import Expression, Num, parse
from .matrix import as_matrix, eigenvalues, sup_induced_norm
from .measure import MeasureSpace

MAX_DIM = 8

# lazy tail probes stop at this index
TAIL_PROBE_LIMIT = 2**40


class NonFiniteSymbolError(ArithmeticError):
    def __init__(self, atom_index: int, coord: float | None = None):
        where = f"atom {atom_index}" if coord is None else f"atom {atom_index} (x={coord!r})"
        super().__init__(f"symbol is not finite at {where}")
        self.atom_index = atom_index
        self.coord = coord


@dataclass(frozen=True, eq=False)
class TailEnvelope:
    """What is known about a sequence-mode symbol beyond the truncation index.

    ``norm`` is an expression in ``x`` (the atom index k) bounding
    ``||u(a_k)||`` for every k past the truncation; it is monotone in the
    direction ``monotone`` and tends to ``limit`` (possibly ``inf``).  The
    envelope is assumed tight, i.e. ``||u(a_k)|| -> limit`` as well.

    The optional spectral fields bound the untruncated atoms' spectral
    abscissa and spectral radius; without them the norm bound is used
    (``s(A) <= rho(A) <= ||A||``).  ``limit_matrix`` is ``lim u(a_k)`` when
    it exists; its eigenvalues are the tail's limit points of the spectrum.
    """

    norm: Expression
    monotone: str = "decreasing"
    limit: float = 0.0
    spectral_abscissa: float | None = None
    spectral_radius: float | None = None
    limit_matrix: np.ndarray | None = None

    def __post_init__(self):
        if isinstance(self.norm, str):
            object.__setattr__(self, "norm", parse(self.norm))
        elif isinstance(self.norm, (int, float)):
            object.__setattr__(self, "norm", Num(complex(self.norm)))
        if self.monotone not in ("decreasing", "increasing"):
            raise ValueError("envelope must be 'decreasing' or 'increasing'")
        if not self.limit >= 0:
            raise ValueError("envelope limit must be >= 0")
        if self.limit_matrix is not None:
            object.__setattr__(self, "limit_matrix", as_matrix(self.limit_matrix))

    def at(self, k) -> np.ndarray:
        return self.norm(np.asarray(k, dtype=float)).real

    def sup_beyond(self, truncation: int) -> float:
        if self.monotone == "decreasing":
            return float(self.at(truncation + 1))
        return float(self.limit)


@dataclass(frozen=True, eq=False)
class SymbolFunction:
    """A measurable matrix symbol on a measure space.

    ``kind`` is ``constant`` (one matrix), ``table`` (one matrix per
    materialized atom) or ``expr`` (an N x N matrix of expressions in the
    atom coordinate ``x``).
    """

    space: MeasureSpace
    dim: int
    kind: str
    data: object
    tail: TailEnvelope | None = None

    def __post_init__(self):
        if not 1 <= self.dim <= MAX_DIM:
            raise ValueError(f"symbol dimension must be between 1 and {MAX_DIM}")
        if self.kind == "table":
            arr = np.asarray(self.data)
            if arr.shape != (self.space.n_atoms, self.dim, self.dim):
                raise ValueError(
                    f"table must have shape {(self.space.n_atoms, self.dim, self.dim)}, got {arr.shape}"
                )
        if self.tail is None and self.space.mode == "sequence" and self.kind == "constant":
            c = np.asarray(self.data)
            ev = eigenvalues(c).values
            object.__setattr__(
                self,
                "tail",
                TailEnvelope(
                    Num(complex(sup_induced_norm(c))),
                    "decreasing",
                    sup_induced_norm(c),
                    float(ev.real.max()),
                    float(np.abs(ev).max()),
                    c,
                ),
            )

    # -- construction -------------------------------------------------------

    @classmethod
    def constant(cls, space: MeasureSpace, matrix) -> "SymbolFunction":
        m = as_matrix(matrix)
        return cls(space, m.shape[0], "constant", m)

    @classmethod
    def table(cls, space: MeasureSpace, matrices, tail: TailEnvelope | None = None) -> "SymbolFunction":
        arr = np.asarray(matrices, dtype=complex)
        if arr.ndim == 1:
            arr = arr[:, None, None]
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise ValueError("table entries must be square matrices")
        return cls(space, arr.shape[1], "table", arr.copy(), tail)

    @classmethod
    def scalar(cls, space: MeasureSpace, values) -> "SymbolFunction":
        return cls.table(space, np.asarray(values, dtype=complex).reshape(-1, 1, 1))

    @classmethod
    def expr(cls, space: MeasureSpace, entries, tail: TailEnvelope | None = None) -> "SymbolFunction":
        rows = [[e if isinstance(e, Expression) else parse(str(e)) for e in row] for row in entries]
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ValueError("expression matrix must be square")
        return cls(space, n, "expr", tuple(tuple(r) for r in rows), tail)

    # -- evaluation ---------------------------------------------------------

    def eval_coords(self, x) -> np.ndarray:
        """Raw values at arbitrary coordinates (no finiteness check)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.kind == "constant":
            return np.broadcast_to(self.data, (len(x), self.dim, self.dim)).copy()
        if self.kind == "table":
            raise TypeError("a tabulated symbol has no values off its atoms")
        out = np.empty((len(x), self.dim, self.dim), dtype=complex)
        for i, row in enumerate(self.data):
            for j, e in enumerate(row):
                out[:, i, j] = e(x)
        return out

    @cached_property
    def _raw(self) -> np.ndarray:
        if self.kind == "table":
            v = np.asarray(self.data, dtype=complex)
        else:
            v = self.eval_coords(self.space.coords)
        v = np.array(v)
        v.setflags(write=False)
        return v

    def eval_at(self, index: int) -> np.ndarray:
        """The matrix u(x_index); raises on non-finite entries."""
        if not 0 <= index < self.space.n_atoms:
            raise IndexError(f"atom index {index} out of range")
        m = self._raw[index]
        if not np.all(np.isfinite(m)):
            raise NonFiniteSymbolError(index, float(self.space.coords[index]))
        return m.copy()

    def values(self) -> np.ndarray:
        """All atom values, shape (n, N, N).

        Zero-weight atoms are null sets: their values are replaced by the
        zero matrix when non-finite.  A non-finite value on a positive-weight
        atom raises :class:`NonFiniteSymbolError`.
        """
        raw = self._raw
        bad = ~np.all(np.isfinite(raw), axis=(1, 2))
        if np.any(bad & self.space.positive):
            i = int(np.flatnonzero(bad & self.space.positive)[0])
            raise NonFiniteSymbolError(i, float(self.space.coords[i]))
        if np.any(bad):
            out = raw.copy()
            out[bad] = 0
            return out
        return raw

    def tail_probe_indices(self) -> list[int]:
        """Untruncated atom indices sampled lazily: K+1, 2(K+1), 4(K+1), ..."""
        if self.space.mode != "sequence" or self.kind == "table":
            return []
        out = []
        k = self.space.truncation + 1
        while k <= TAIL_PROBE_LIMIT:
            out.append(k)
            k *= 2
        return out

    def tail_values(self) -> tuple[np.ndarray, np.ndarray]:
        ks = np.asarray(self.tail_probe_indices(), dtype=float)
        if len(ks) == 0:
            return ks, np.zeros((0, self.dim, self.dim), dtype=complex)
        return ks, self.eval_coords(ks)

    # -- algebra ------------------------------------------------------------

    def as_table(self) -> "SymbolFunction":
        return SymbolFunction.table(self.space, self.values(), self.tail)

    def compose(self, other: "SymbolFunction") -> "SymbolFunction":
        """Pointwise matrix product u(x) v(x)."""
        _check_compatible(self, other)
        return SymbolFunction.table(self.space, self.values() @ other.values())

    def power(self, k: int) -> "SymbolFunction":
        v = self.values()
        out = np.broadcast_to(np.eye(self.dim, dtype=complex), v.shape).copy()
        for _ in range(k):
            out = out @ v
        return SymbolFunction.table(self.space, out)

    def on_space(self, space: MeasureSpace, parent=None) -> "SymbolFunction":
        """Transport to a refined space; ``parent[i]`` is the coarse atom of child ``i``."""
        if self.kind == "table":
            if parent is None:
                factor = space.n_atoms // self.space.n_atoms
                parent = np.repeat(np.arange(self.space.n_atoms), factor)
            return SymbolFunction.table(space, np.asarray(self.data)[parent], self.tail)
        return SymbolFunction(space, self.dim, self.kind, self.data, self.tail)


def _check_compatible(u: SymbolFunction, v: SymbolFunction) -> None:
    if u.space is not v.space and u.space.n_atoms != v.space.n_atoms:
        raise ValueError("symbols live on different spaces")
    if u.dim != v.dim:
        raise ValueError(f"dimension mismatch: {u.dim} vs {v.dim}")
