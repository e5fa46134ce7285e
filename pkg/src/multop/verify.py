"""Invariant suite run by ``multop verify``.

Each check pits an analyzer against an independent route (dense oracle,
RK4, closed forms, sampled probes) and records the measured discrepancy
next to its tolerance.  All randomness derives from one seed, so the
report is reproducible byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import operator as op
from . import semigroup as sg
from .function_space import (NormSpec, VectorFunction, absolute_continuity_check,
                             halving_sets, norms, verify_axioms)
from .measure import MeasureSpace, refine
from .oracle import assemble_dense, dense_eigenvalues, operator_norm_estimate
from .pointset import hausdorff
from .samples import (random_scalar_with_zeros, random_space,
                      random_symbol, standard_norms)
from .symbol import SymbolFunction, TailEnvelope

FAULTS = ("norm",)


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "measured": _num(self.measured),
            "tolerance": _num(self.tolerance),
            "detail": self.detail,
        }


def _num(x: float):
    if math.isnan(x):
        return "undetermined"
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    return float(x)


def _analytic_norm(u: SymbolFunction, fault: str | None) -> float:
    if fault == "norm":
        # deliberately wrong: column sums instead of row sums
        return float(np.abs(u.values()).sum(axis=1).max())
    return op.operator_norm(u)


# ---------------------------------------------------------------------------
# individual checks; each takes its own generator

def check_norm_theorem(rng, symbols: int = 10, probes: int = 200, fault: str | None = None) -> CheckResult:
    worst = 0.0
    excess = 0.0
    for _ in range(symbols):
        u = random_symbol(rng, 20, dim=int(rng.integers(1, 4)))
        analytic = _analytic_norm(u, fault)
        d = assemble_dense(u)
        for ns in standard_norms():
            est = operator_norm_estimate(d, ns, trials=20, rng=rng)
            worst = max(worst, abs(est - analytic))
            f = rng.normal(size=(probes, 20, u.dim)) + 1j * rng.normal(size=(probes, 20, u.dim))
            ratio = norms(d.matvec(f), u.space, ns) / norms(f, u.space, ns)
            excess = max(excess, float(ratio.max() - analytic))
    passed = worst <= 1e-9 and excess <= 1e-9
    return CheckResult("norm-theorem", passed, worst, 1e-9, f"max probe excess {excess:.3e}")


def check_spectrum(rng, symbols: int = 10) -> CheckResult:
    worst = 0.0
    er_ok = True
    for _ in range(symbols):
        u = random_symbol(rng, 20)
        sp = op.spectrum(u)
        worst = max(worst, hausdorff(sp.all_points(), dense_eigenvalues(assemble_dense(u))))
        if u.dim == 1:
            er = op.essential_range(u).all_points()
            er_ok &= np.array_equal(er, sp.all_points())
    return CheckResult("spectrum-vs-dense", worst <= 1e-8 and er_ok, worst, 1e-8,
                       "essential range equal" if er_ok else "essential range differs")


def check_inverse(rng, symbols: int = 10) -> CheckResult:
    worst = 0.0
    for _ in range(symbols):
        u = random_symbol(rng, 20)
        inv = op.is_invertible(u, rng=rng)
        if inv.invertible:
            worst = max(worst, inv.probe_residual)
    nil = SymbolFunction.constant(MeasureSpace.uniform(4), [[0, 1], [0, 0]])
    nil_ok = not op.is_invertible(nil).invertible
    return CheckResult("inverse", worst <= 1e-9 and nil_ok, worst, 1e-9,
                       "nilpotent rejected" if nil_ok else "nilpotent accepted")


def check_closed_range(rng, symbols: int = 10, tol: float = 1e-9) -> CheckResult:
    worst = 0.0
    ok = True
    ns = NormSpec.lp(2)
    for _ in range(symbols):
        u = random_scalar_with_zeros(rng, 20)
        if rng.uniform() < 0.3:
            v = u.values()[:, 0, 0].copy()
            v[int(rng.integers(20))] = 1e-12
            u = SymbolFunction.scalar(u.space, v)
        cr = op.has_closed_range(u, tol)
        vals = u.values()[:, 0, 0]
        support = vals != 0
        if cr.closed:
            f = rng.normal(size=(50, 20, 1)) * support[None, :, None]
            num = norms(f * vals[None, :, None], u.space, ns)
            den = norms(f, u.space, ns)
            worst = max(worst, float(np.max((cr.delta - tol) * den - num)))
        else:
            ok &= cr.witness_ratio is not None and cr.witness_ratio < tol
    return CheckResult("closed-range", ok and worst <= 0, max(worst, 0.0), 0.0,
                       "witnesses valid" if ok else "missing witness")


def check_compactness() -> CheckResult:
    seq = MeasureSpace.sequence(40)
    inv_k = SymbolFunction.expr(seq, [["1/x", "0"], ["0", "1/x"]], TailEnvelope("1/x"))
    ident = SymbolFunction.constant(seq, np.eye(2))
    fin = SymbolFunction.constant(MeasureSpace.uniform(10), np.eye(2))
    verdicts = (op.is_compact(inv_k).compact, op.is_compact(ident).compact, op.is_compact(fin).compact)
    ok = verdicts == (True, False, True)
    return CheckResult("compactness", ok, float(not ok), 0.0, f"I/k, I, finite -> {verdicts}")


def check_fredholm(rng, symbols: int = 20) -> CheckResult:
    disagree = 0
    unstable = 0
    for i in range(symbols):
        u = random_scalar_with_zeros(rng, 16)
        ns = (NormSpec.lp(2), NormSpec.orlicz("tp_log", 2), NormSpec.lorentz(2, 1))[i % 3]
        fr = op.is_fredholm(u, ns)
        disagree += not fr.agree
        unstable += not fr.stable_under_refinement
    return CheckResult("fredholm-equivalence", disagree == 0 and unstable == 0, float(disagree + unstable), 0.0,
                       f"{disagree} disagreements, {unstable} refinement changes")


def check_commutant(rng, count: int = 10) -> CheckResult:
    worst = 0.0
    rejected = 0
    for _ in range(count):
        space = random_space(rng, 12)
        v = rng.normal(size=12) + 1j * rng.normal(size=12)
        res = op.commutant_recover(np.diag(v), space)
        worst = max(worst, res.residual if res.accepted else math.inf)
        a = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
        rej = op.commutant_recover(a, space)
        rejected += (not rej.accepted) and rej.witness is not None
    ok = worst <= 1e-10 and rejected == count
    return CheckResult("commutant", ok, worst, 1e-10, f"{rejected}/{count} dense operators rejected")


def check_semigroup_law(rng, pairs: int = 20) -> CheckResult:
    u = random_symbol(rng, 20, bound=2.0)
    t0 = sg.semigroup_at(u, 0.0).values()
    identity = bool(np.all(t0 == np.eye(u.dim)))
    worst = 0.0
    for _ in range(pairs):
        s, t = rng.uniform(0, 2, 2)
        lhs = sg.semigroup_at(u, s + t).values()
        rhs = sg.semigroup_at(u, s).compose(sg.semigroup_at(u, t)).values()
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    gen = all(sg.generation_check(random_symbol(rng, 20, bound=10.0)).generates for _ in range(5))
    return CheckResult("semigroup-law", identity and gen and worst <= 1e-9, worst, 1e-9,
                       f"T(0)=I {identity}, generation {gen}")


def check_acp(rng, symbols: int = 3) -> CheckResult:
    worst = 0.0
    for _ in range(symbols):
        u = random_symbol(rng, 20, bound=2.0)
        x = VectorFunction.random(u.space, u.dim, rng)
        v1 = sg.solve_acp(u, x, [0.0, 1.0]).values[-1]
        worst = max(worst, float(np.abs(sg.rk4_oracle(u, x, 1.0, 1e-3).values - v1).max()))
    return CheckResult("acp-vs-rk4", worst <= 1e-6, worst, 1e-6)


def check_spectral_mapping(rng, symbols: int = 5) -> CheckResult:
    worst = max(sg.spectral_mapping_check(random_symbol(rng, 20), t)
                for _ in range(symbols) for t in (0.5, 1.0, 2.0))
    return CheckResult("spectral-mapping", worst <= 1e-8, worst, 1e-8)


def check_laplace(rng, symbols: int = 2) -> CheckResult:
    worst = 0.0
    agree = True
    for _ in range(symbols):
        u = random_symbol(rng, 8, bound=1.0)
        w = sg.spectral_abscissa(u)
        for m in (1, 2, 2 * u.dim + 1):
            worst = max(worst, sg.laplace_identity_check(u, w + 3, m, rng=rng).relative_error)
        agree &= sg.integrated_semigroup_check(u).agree
    return CheckResult("laplace-identity", worst <= 1e-4 and agree, worst, 1e-4,
                       "half-plane and spectral-bound verdicts agree" if agree else "verdicts disagree")


def check_axioms(rng) -> CheckResult:
    space = random_space(rng, 12)
    bad = [ns.label() for ns in standard_norms() if not verify_axioms(ns, space, 100, rng).passed]
    fine = refine(MeasureSpace.finite([0.0], [1.0]), 256)
    f = VectorFunction.constant(fine, [1.0])
    sets = halving_sets(fine, 8)
    lp_ok = absolute_continuity_check(f, sets, NormSpec.lp(2)).converges
    linf_ok = not absolute_continuity_check(f, sets, NormSpec.lp(math.inf)).converges
    ok = not bad and lp_ok and linf_ok
    detail = "all axioms hold" if not bad else "violations: " + ", ".join(bad)
    return CheckResult("function-norm-axioms", ok, float(len(bad)), 0.0,
                       f"{detail}; abs. continuity L^2 {lp_ok}, L^inf rejected {linf_ok}")


def run_builtin(seed: int = 0, fault: str | None = None) -> list[CheckResult]:
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}")
    rngs = iter(np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(16))
    return [
        check_norm_theorem(next(rngs), fault=fault),
        check_spectrum(next(rngs)),
        check_inverse(next(rngs)),
        check_closed_range(next(rngs)),
        check_compactness(),
        check_fredholm(next(rngs)),
        check_commutant(next(rngs)),
        check_semigroup_law(next(rngs)),
        check_acp(next(rngs)),
        check_spectral_mapping(next(rngs)),
        check_laplace(next(rngs)),
        check_axioms(next(rngs)),
    ]


def run_for_symbol(u: SymbolFunction, ns: NormSpec, seed: int = 0, trials: int = 100,
                   fault: str | None = None) -> list[CheckResult]:
    """Checks that apply to one configured symbol."""
    rng = np.random.default_rng(seed)
    out = []
    finite = u.space.mode == "finite"
    if finite:
        d = assemble_dense(u)
        analytic = _analytic_norm(u, fault)
        est = operator_norm_estimate(d, ns, trials, rng)
        out.append(CheckResult("norm-theorem", abs(est - analytic) <= 1e-9, abs(est - analytic), 1e-9))
        if d.size <= 512:
            dist = hausdorff(op.spectrum(u).all_points(), dense_eigenvalues(d))
            out.append(CheckResult("spectrum-vs-dense", dist <= 1e-8, dist, 1e-8))
    inv = op.is_invertible(u, rng=rng)
    if inv.invertible:
        out.append(CheckResult("inverse", inv.probe_residual <= 1e-9, inv.probe_residual, 1e-9))
    if finite and math.isfinite(op.operator_norm(u)):
        dist = max(sg.spectral_mapping_check(u, t) for t in (0.5, 1.0, 2.0))
        out.append(CheckResult("spectral-mapping", dist <= 1e-8, dist, 1e-8))
        ic = sg.integrated_semigroup_check(u)
        out.append(CheckResult("integrated-generator", ic.agree, float(not ic.agree), 0.0))
        if d.size <= 64:
            w = sg.spectral_abscissa(u)
            err = sg.laplace_identity_check(u, w + 3, 2 * u.dim + 1, rng=rng).relative_error
            out.append(CheckResult("laplace-identity", err <= 1e-4, err, 1e-4))
    if u.dim == 1 and u.space.nonatomic and ns.absolutely_continuous and finite:
        fr = op.is_fredholm(u, ns)
        ok = fr.agree and fr.stable_under_refinement
        out.append(CheckResult("fredholm-equivalence", ok, float(not ok), 0.0))
    return out


def report(results: list[CheckResult]) -> dict:
    return {
        "passed": all(r.passed for r in results),
        "checks": [r.to_json() for r in results],
    }
