from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def unique_points(z, rtol: float = 1e-12) -> np.ndarray:
    """Sorted complex points with near-duplicates merged (first representative kept)."""
    z = np.asarray(z, dtype=complex).ravel()
    if z.size == 0:
        return z
    z = z[np.lexsort((z.imag, z.real))]
    keep = [z[0]]
    for p in z[1:]:
        k = np.asarray(keep)
        if not np.any(np.abs(p - k) <= rtol * (1 + np.abs(k))):
            keep.append(p)
    return np.array(keep, dtype=complex)


def hausdorff(a, b) -> float:
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size == 0 and b.size == 0:
        return 0.0
    if a.size == 0 or b.size == 0:
        return float("inf")
    d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


@dataclass(frozen=True, eq=False)
class PointSet:
    """A closed subset of C represented by finitely many points.

    ``points`` come from materialized atoms, ``limit_points`` from the tail
    of a sequence space.  ``bounded`` is ``None`` when boundedness cannot be
    decided from the available envelopes.
    """

    points: np.ndarray
    limit_points: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    bounded: bool | None = True
    note: str = ""

    def all_points(self) -> np.ndarray:
        return unique_points(np.concatenate([self.points, self.limit_points]))

    def distance_to(self, z: complex) -> float:
        pts = np.concatenate([self.points, self.limit_points])
        if pts.size == 0:
            return float("inf")
        return float(np.abs(pts - z).min())

    def max_real(self) -> float:
        pts = np.concatenate([self.points, self.limit_points])
        return float(pts.real.max()) if pts.size else float("-inf")

    def __len__(self):
        return len(self.all_points())
