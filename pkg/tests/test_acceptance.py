"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also repeated in the terminal summary (see conftest.py), and
``python3 tests/test_acceptance.py`` runs the suite as a plain script.
"""

import math
import shutil
import subprocess
import sys

import numpy as np
import pytest

from multop import operator as op
from multop import semigroup as sg
from multop.function_space import (NormSpec, VectorFunction, absolute_continuity_check,
                                   halving_sets, norms, verify_axioms)
from multop.measure import MeasureSpace, refine
from multop.oracle import assemble_dense, dense_eigenvalues, operator_norm_estimate
from multop.pointset import hausdorff
from multop.samples import (random_scalar_with_zeros, random_space, random_symbol,
                            standard_norms)
from multop.symbol import SymbolFunction, TailEnvelope

RESULTS: list[str] = []


def record(number: int, title: str, passed: bool, detail: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d} {title}: {detail}"
    RESULTS.append(line)
    print(line)
    assert passed, line


def rng_for(number: int) -> np.random.Generator:
    return np.random.default_rng(1000 + number)


def test_c01_norm_theorem():
    rng = rng_for(1)
    worst_est = 0.0
    worst_excess = -math.inf
    for k in range(50):
        u = random_symbol(rng, 20, dim=k % 3 + 1)
        analytic = op.operator_norm(u)
        d = assemble_dense(u)
        f = rng.normal(size=(10_000, 20, u.dim)) + 1j * rng.normal(size=(10_000, 20, u.dim))
        mf = d.matvec(f)
        for ns in standard_norms():
            est = operator_norm_estimate(d, ns, trials=100, rng=rng)
            worst_est = max(worst_est, abs(est - analytic))
            ratio = norms(mf, u.space, ns) / norms(f, u.space, ns)
            worst_excess = max(worst_excess, float(ratio.max() / analytic - 1))
    passed = worst_est <= 1e-9 and worst_excess <= 1e-12
    record(1, "norm theorem", passed,
           f"max |oracle - ess sup| = {worst_est:.2e} (tol 1e-9); "
           f"max probe ratio / ess sup - 1 = {worst_excess:.2e} over 50x5x10^4 probes")


def test_c02_spectrum():
    rng = rng_for(2)
    worst = 0.0
    scalar_equal = 0
    scalar_total = 0
    for k in range(50):
        u = random_symbol(rng, 20, dim=k % 3 + 1)
        sp = op.spectrum(u).all_points()
        worst = max(worst, hausdorff(sp, dense_eigenvalues(assemble_dense(u))))
        if u.dim == 1:
            scalar_total += 1
            scalar_equal += np.array_equal(sp, op.essential_range(u).all_points())
    passed = worst <= 1e-8 and scalar_equal == scalar_total
    record(2, "spectrum vs dense oracle", passed,
           f"max Hausdorff = {worst:.2e} (tol 1e-8); essential range equal {scalar_equal}/{scalar_total}")


def test_c03_inverse():
    rng = rng_for(3)
    worst = 0.0
    invertible = 0
    for k in range(50):
        u = random_symbol(rng, 20, dim=k % 3 + 1)
        inv = op.is_invertible(u, probes=100, rng=rng)
        if inv.invertible:
            invertible += 1
            worst = max(worst, inv.probe_residual)
    nil = SymbolFunction.constant(MeasureSpace.uniform(5), [[0, 1], [0, 0]])
    nil_rejected = not op.is_invertible(nil).invertible
    passed = worst <= 1e-9 and nil_rejected and invertible > 0
    record(3, "inverse", passed,
           f"{invertible}/50 invertible, max probe residual {worst:.2e} (tol 1e-9); "
           f"nilpotent rejected {nil_rejected}")


def test_c04_closed_range():
    rng = rng_for(4)
    tol = 1e-9
    closed = opened = 0
    worst_gap = -math.inf
    bad_witness = 0
    for k in range(60):
        u = random_scalar_with_zeros(rng, 20, nonatomic=False)
        if k % 3 == 0:
            v = u.values()[:, 0, 0].copy()
            v[int(rng.integers(20))] = 10.0 ** rng.uniform(-14, -10)
            u = SymbolFunction.scalar(u.space, v)
        ns = standard_norms()[k % 5]
        cr = op.has_closed_range(u, tol)
        vals = u.values()[:, 0, 0]
        if cr.closed:
            closed += 1
            support = vals != 0
            f = (rng.normal(size=(200, 20, 1)) + 1j * rng.normal(size=(200, 20, 1))) * support[None, :, None]
            lhs = norms(f * vals[None, :, None], u.space, ns)
            rhs = (cr.delta - tol) * norms(f, u.space, ns)
            worst_gap = max(worst_gap, float(np.max(rhs - lhs)))
        else:
            opened += 1
            f = cr.witness
            ratio = norms(op.apply(u, f).values, u.space, ns) / norms(f.values, u.space, ns)
            bad_witness += not (ratio < tol and cr.witness_ratio < tol)
    seq = MeasureSpace.sequence(20)
    tail = op.has_closed_range(SymbolFunction.expr(seq, [["1/x"]], TailEnvelope("1/x")), 1e-6)
    tail_ok = not tail.closed and tail.witness_ratio < 1e-6
    passed = worst_gap <= 0 and bad_witness == 0 and tail_ok and closed and opened
    record(4, "closed range", passed,
           f"{closed} closed (max (delta-tol)||f|| - ||uf|| = {worst_gap:.2e} <= 0), "
           f"{opened} not closed with {opened - bad_witness} valid witnesses; sequence 1/k witness {tail_ok}")


def test_c05_compactness():
    seq = MeasureSpace.sequence(50)
    inv_k = SymbolFunction.expr(seq, [["1/x", "0"], ["0", "1/x"]], TailEnvelope("1/x"))
    ident = SymbolFunction.constant(seq, np.eye(2))
    rng = rng_for(5)
    finite_all = all(op.is_compact(random_symbol(rng, 20)).compact for _ in range(10))
    a, b = op.is_compact(inv_k).compact, op.is_compact(ident).compact
    record(5, "compactness", a and not b and finite_all,
           f"I/k compact {a}; I compact {b}; finite mode compact {finite_all}")


def test_c06_fredholm():
    rng = rng_for(6)
    ac_norms = [ns for ns in standard_norms() if ns.absolutely_continuous]
    agree = stable = 0
    fredholm = 0
    for k in range(100):
        u = random_scalar_with_zeros(rng, 20)
        fr = op.is_fredholm(u, ac_norms[k % len(ac_norms)])
        agree += fr.invertible == fr.bounded_below == fr.closed_full_support
        fredholm += fr.fredholm
        verdicts = {fr.fredholm}
        for factor in (2, 4):
            fine = refine(u.space, factor)
            verdicts.add(op.is_fredholm(u.on_space(fine), ac_norms[k % len(ac_norms)], factors=()).fredholm)
        stable += len(verdicts) == 1 and fr.stable_under_refinement
    record(6, "Fredholm equivalences", agree == 100 and stable == 100,
           f"equivalent conditions agree {agree}/100; refine(2,4) invariant {stable}/100; {fredholm} Fredholm")


def test_c07_commutant():
    rng = rng_for(7)
    worst = 0.0
    accepted = rejected = 0
    for _ in range(50):
        space = random_space(rng, 20)
        v = rng.normal(size=20) + 1j * rng.normal(size=20)
        res = op.commutant_recover(np.diag(v), space)
        accepted += res.accepted
        worst = max(worst, res.residual)
        a = rng.normal(size=(20, 20)) + 1j * rng.normal(size=(20, 20))
        rej = op.commutant_recover(a, space)
        rejected += (not rej.accepted) and rej.witness is not None and rej.commutator_norm > 1e-10
    record(7, "maximal abelian subalgebra", accepted == 50 and worst <= 1e-10 and rejected == 50,
           f"diagonal recovered {accepted}/50 (max ||A - M_v|| {worst:.2e}); dense rejected with witness {rejected}/50")


def test_c08_semigroup():
    rng = rng_for(8)
    u = random_symbol(rng, 20, dim=3, bound=2.0)
    t0 = sg.semigroup_at(u, 0.0).values()
    identity = bool(np.all(t0 == np.eye(3)))
    worst = 0.0
    for s, t in rng.uniform(0, 2, size=(100, 2)):
        lhs = sg.semigroup_at(u, s + t).values()
        rhs = sg.semigroup_at(u, s).compose(sg.semigroup_at(u, t)).values()
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    gens = [sg.generation_check(random_symbol(rng, 20, bound=float(rng.uniform(0.1, 10)))).generates
            for _ in range(50)]
    passed = identity and worst <= 1e-9 and all(gens)
    record(8, "semigroup law and generation", passed,
           f"T(0) = I exactly {identity}; max |T(s+t) - T(s)T(t)| = {worst:.2e} (tol 1e-9); "
           f"generation true {sum(gens)}/50")


def test_c09_acp_vs_rk4():
    rng = rng_for(9)
    worst = 0.0
    ratios = []
    for _ in range(20):
        u = random_symbol(rng, 20, bound=2.0)
        x = VectorFunction.random(u.space, u.dim, rng)
        exact = sg.solve_acp(u, x, [0.0, 1.0]).values[-1]
        worst = max(worst, float(np.abs(sg.rk4_oracle(u, x, 1.0, 1e-3).values - exact).max()))
        # the order study needs errors well above round-off, hence coarser steps
        e1 = np.abs(sg.rk4_oracle(u, x, 1.0, 0.1).values - exact).max()
        e2 = np.abs(sg.rk4_oracle(u, x, 1.0, 0.05).values - exact).max()
        ratios.append(e1 / e2)
    passed = worst <= 1e-6 and all(12 <= r <= 20 for r in ratios)
    record(9, "ACP vs RK4", passed,
           f"max sup error {worst:.2e} (tol 1e-6); h-halving ratios in [{min(ratios):.2f}, {max(ratios):.2f}]")


def test_c10_spectral_mapping():
    rng = rng_for(10)
    worst = 0.0
    for _ in range(20):
        u = random_symbol(rng, 20)
        for t in (0.5, 1.0, 2.0):
            worst = max(worst, sg.spectral_mapping_check(u, t))
    record(10, "spectral mapping", worst <= 1e-8, f"max Hausdorff {worst:.2e} (tol 1e-8)")


def test_c11_integrated_semigroups():
    rng = rng_for(11)
    worst = 0.0
    for _ in range(10):
        u = random_symbol(rng, 20, bound=1.0)
        w = sg.spectral_abscissa(u)
        for m in sorted({1, 2, 2 * u.dim + 1}):
            worst = max(worst, sg.laplace_identity_check(u, w + 3, m, rng=rng).relative_error)
    agree = total = 0
    for _ in range(50):
        u = random_symbol(rng, 20)
        total += 1
        agree += sg.integrated_semigroup_check(u).agree
    passed = worst <= 1e-4 and agree == total
    record(11, "integrated semigroups", passed,
           f"max Laplace relative error {worst:.2e} (tol 1e-4); "
           f"half-plane vs spectral-bound verdicts agree {agree}/{total}")


def test_c12_function_space_axioms():
    rng = rng_for(12)
    violations = {}
    for ns in standard_norms():
        count = 0
        for n in (5, 12, 20):
            rep = verify_axioms(ns, random_space(rng, n), 200, rng)
            count += rep.monotonicity_violations + rep.fatou_violations + rep.local_violations
        violations[ns.label()] = count
    fine = refine(MeasureSpace.finite([0.0], [1.0]), 1024)
    f = VectorFunction.constant(fine, [1.0])
    sets = halving_sets(fine, 10)
    lp = {p: absolute_continuity_check(f, sets, NormSpec.lp(p)).converges for p in (1, 2, 5)}
    linf = absolute_continuity_check(f, sets, NormSpec.lp(math.inf)).converges
    passed = sum(violations.values()) == 0 and all(lp.values()) and not linf
    record(12, "function-norm axioms", passed,
           f"violations {violations}; absolutely continuous L^1,L^2,L^5 {list(lp.values())}, L^inf {linf}")


def test_c13_determinism():
    exe = shutil.which("multop")
    cmd = [exe] if exe else [sys.executable, "-m", "multop"]
    cmd += ["verify", "--suite", "builtin", "--seed", "42"]
    runs = [subprocess.run(cmd, capture_output=True, check=False) for _ in range(2)]
    same = runs[0].stdout == runs[1].stdout and runs[0].stderr == runs[1].stderr
    ok = all(r.returncode == 0 for r in runs)
    record(13, "determinism", same and ok and len(runs[0].stdout) > 0,
           f"byte-identical {same} ({len(runs[0].stdout)} bytes); exit codes {[r.returncode for r in runs]}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
