import math

import numpy as np
import pytest

from multop.measure import MeasureSpace, measure_of, refine
from multop.symbol import NonFiniteSymbolError, SymbolFunction, TailEnvelope


def test_finite_space_and_sets():
    s = MeasureSpace.finite([0.0, 1.0, 2.0], [0.5, 0.0, 1.5])
    assert s.n_atoms == 3
    assert s.total_measure() == 2.0
    assert list(s.positive) == [True, False, True]
    a = s.subset([0, 1])
    b = s.subset(np.array([True, True, True]))
    assert a <= b and not b <= a
    assert measure_of(a) == 0.5
    assert list((a & s.subset([1, 2])).indices) == [1]
    assert measure_of(a | s.singleton(2)) == 2.0
    assert measure_of(s.empty()) == 0


def test_space_validation():
    with pytest.raises(ValueError):
        MeasureSpace.finite([0.0], [-1.0])
    with pytest.raises(ValueError):
        MeasureSpace.finite([], [])
    with pytest.raises(ValueError):
        MeasureSpace.sequence(5, "geometric", ratio=1.5)
    with pytest.raises(ValueError):
        MeasureSpace.sequence(5, "power", exponent=1.0)


def test_sequence_tail_mass():
    g = MeasureSpace.sequence(10, "geometric", ratio=0.5)
    assert g.coords[0] == 1 and g.coords[-1] == 10
    assert math.isclose(g.total_measure(), 1.0, rel_tol=1e-15)
    assert g.weight_of_index(12) == 0.5 ** 12
    assert math.isclose(measure_of(g.full()), 1.0, rel_tol=1e-15)
    p = MeasureSpace.sequence(100, "power", exponent=2.0)
    # integral bound dominates the exact tail zeta(2) - partial sum
    exact = math.pi ** 2 / 6 - float(p.weights.sum())
    assert exact <= p.tail_mass <= exact + 1 / 100 ** 2


def test_refine_preserves_measure():
    s = MeasureSpace.uniform(5, 0, 2, nonatomic=True)
    r = refine(s, 4)
    assert r.n_atoms == 20 and r.nonatomic
    assert math.isclose(r.total_measure(), s.total_measure())
    assert np.array_equal(r.coords[:4], [s.coords[0]] * 4)
    assert refine(s, 1) is s
    with pytest.raises(ValueError):
        refine(MeasureSpace.sequence(4), 2)


def test_constant_and_expr_symbols():
    s = MeasureSpace.uniform(4)
    c = SymbolFunction.constant(s, [[1, 2], [3, 4]])
    assert c.dim == 2 and c.values().shape == (4, 2, 2)
    e = SymbolFunction.expr(s, [["x", "0"], ["1", "x^2"]])
    v = e.values()
    assert np.allclose(v[:, 0, 0], s.coords)
    assert np.allclose(v[:, 1, 1], s.coords ** 2)
    assert np.allclose(e.eval_at(2), [[s.coords[2], 0], [1, s.coords[2] ** 2]])


def test_nonfinite_symbol():
    s = MeasureSpace.finite([0.0, 1.0], [0.5, 0.5])
    u = SymbolFunction.expr(s, [["1/x"]])
    with pytest.raises(NonFiniteSymbolError) as info:
        u.values()
    assert info.value.atom_index == 0
    # on a null atom the singularity is harmless
    z = SymbolFunction.expr(MeasureSpace.finite([0.0, 1.0], [0.0, 1.0]), [["1/x"]])
    assert np.array_equal(z.values()[:, 0, 0], [0, 1])


def test_dimension_cap():
    with pytest.raises(ValueError):
        SymbolFunction.constant(MeasureSpace.uniform(1), np.eye(9))


def test_table_shape_checked():
    with pytest.raises(ValueError):
        SymbolFunction.table(MeasureSpace.uniform(3), np.zeros((2, 2, 2)))


def test_algebra():
    s = MeasureSpace.uniform(3)
    rng = np.random.default_rng(0)
    a = SymbolFunction.table(s, rng.normal(size=(3, 2, 2)))
    b = SymbolFunction.table(s, rng.normal(size=(3, 2, 2)))
    assert np.allclose(a.compose(b).values(), a.values() @ b.values())
    assert np.allclose(a.power(3).values(), a.values() @ a.values() @ a.values())
    assert np.array_equal(a.power(0).values(), np.broadcast_to(np.eye(2), (3, 2, 2)))
    fine = refine(s, 2)
    t = a.on_space(fine)
    assert np.array_equal(t.values()[::2], a.values())


def test_tail_envelope():
    t = TailEnvelope("1/x")
    assert t.sup_beyond(9) == pytest.approx(0.1)
    inc = TailEnvelope("x", "increasing", math.inf)
    assert inc.sup_beyond(9) == math.inf
    seq = MeasureSpace.sequence(8)
    u = SymbolFunction.expr(seq, [["1/x"]], t)
    ks, tv = u.tail_values()
    assert ks[0] == 9 and ks[1] == 18
    assert np.allclose(tv[:, 0, 0], 1 / ks)
    # constant symbols carry their own envelope
    c = SymbolFunction.constant(seq, [[2, 0], [0, -1]])
    assert c.tail.limit == 2 and c.tail.spectral_abscissa == 2
