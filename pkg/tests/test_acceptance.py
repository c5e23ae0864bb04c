"""End-to-end acceptance criteria.  Each test prints one PASS/FAIL line in the terminal summary."""

from __future__ import annotations

import os
import shutil

import numpy as np
import pytest

from pmfix.contraction import Halving, TableMap, comparison_identities, fixed_point_identities, verify_contractive
from pmfix.dynamics import (
    diagnose_d_convergence,
    diagnose_e_cauchy,
    diagnose_e_convergence,
    enumerate_fixed_structure,
    extract_violation_ranks,
    solve_theorem1,
    solve_theorem2,
)
from pmfix.gauges import CLASSES, DEFAULT_GRID, classify, expsat, limsup_right, linear, psi_inf_profile, rational
from pmfix.search import TrialSpec, run_campaign
from pmfix.spaces import FiniteSpace, MaxOnRPlus, WeightedMetric, check_e_is_metric, generate_random_space

from conftest import GOLDEN, load_golden
from test_dynamics import scan_ranks

MAX = MaxOnRPlus()
STANDARD = WeightedMetric(knots=(0.0,), values=(0.0,))


def _detail(request, text: str) -> None:
    request.node.user_properties.append(("detail", text))


def _contractive_maps(count, seed, g, alpha=0.9, w_max=1.0):
    """Random spaces paired with maps that pass the exhaustive contraction check."""
    rng = np.random.default_rng(seed)
    gauge = linear(alpha)
    found = tried = 0
    while found < count:
        tried += 1
        n = int(rng.integers(1, 9))
        sites = int(rng.integers(1, n + 1)) if w_max > 0 else n
        sp = generate_random_space(n, int(rng.integers(2**32)), w_max=w_max, sites=sites)
        target = int(rng.choice(np.flatnonzero(sp.diag == sp.diag.min())))
        table = [target if rng.random() < 0.6 else int(rng.integers(n)) for _ in range(n)]
        T = TableMap(table)
        if verify_contractive(sp, T, gauge, g=g).passed:
            found += 1
            yield sp, T
    assert tried < 100 * count


@pytest.mark.acceptance("1 e is a metric on 1000 random spaces (n <= 8, tol 1e-9)")
def test_e_is_metric(request):
    rng = np.random.default_rng(1)
    failures = 0
    for i in range(1000):
        n = int(rng.integers(1, 9))
        sp = generate_random_space(n, i, sites=int(rng.integers(1, n + 1)))
        rep = check_e_is_metric(sp, tol=1e-9)
        failures += not (rep.passed and rep["self_distance_bound"].passed)
    _detail(request, f"{1000 - failures}/1000 spaces")
    assert failures == 0


def _prefixes():
    """Convergent, Cauchy but not convergent to the candidate, semi-Cauchy but not Cauchy, and constant prefixes."""
    rng = np.random.default_rng(2)
    out = []
    n = np.arange(1, 3001)
    for seq, x in [(1 + 1 / n, 1.0), (1 + 1 / n, 2.0), (1 / n, 0.0), (1 / n, 0.5), ([0.7] * 50, 0.7),
                   (2 + (-1.0) ** n / n, 2.0), ([0.0, 1.0] * 100, 0.0), (np.sqrt(n), 3.0), (0.5**n[:60], 0.0)]:
        out.append((MAX, list(seq), x))
    for seq, x in [(list(np.cumsum(1 / n)), 1.0), (list(np.cos(n) / n**2), 0.0), (list(1 / n), 0.0)]:
        out.append((STANDARD, seq, x))
    for i in range(45):
        size = int(rng.integers(2, 7))
        sp = generate_random_space(size, 500 + i, sites=int(rng.integers(1, size + 1)))
        head = rng.integers(0, size, int(rng.integers(0, 10))).tolist()
        tail = rng.integers(0, size, int(rng.integers(1, 3))).tolist()
        out.append((sp, head + tail * 20, int(rng.integers(size))))
    return out


@pytest.mark.acceptance("2 e-convergence and e-Cauchy agree with their d-side characterisations")
def test_dual_characterisations(request):
    prefixes = _prefixes()
    disagreements = 0
    for sp, seq, x in prefixes:
        tol = 1e-3 if not isinstance(sp, FiniteSpace) else 1e-9
        conv = diagnose_e_convergence(sp, seq, x, tol=tol)
        cauchy = diagnose_e_cauchy(sp, seq, tol=tol)
        disagreements += not (conv.agree and conv.verdict == conv.values["d_side_verdict"])
        disagreements += not (cauchy.agree and cauchy.verdict == cauchy.values["e_side_verdict"])
    seq = [1 + 1 / k for k in range(1, 3001)]
    witness = (
        diagnose_d_convergence(MAX, seq, 1.0, tol=1e-3).verdict
        and diagnose_d_convergence(MAX, seq, 2.0, tol=1e-3).verdict
        and diagnose_e_convergence(MAX, seq, 1.0, tol=1e-3).verdict
        and not diagnose_e_convergence(MAX, seq, 2.0, tol=1e-3).verdict
    )
    _detail(request, f"{len(prefixes)} prefixes, {disagreements} disagreements, 1+1/n witness {'ok' if witness else 'bad'}")
    assert len(prefixes) >= 50 and disagreements == 0 and witness


@pytest.mark.acceptance("3 harmonic violation ranks match the brute-force scan (eps 0.1, 0.5)")
def test_harmonic_ranks(request):
    harmonic = list(np.cumsum(1.0 / np.arange(1, 2001)))
    notes = []
    for eps in (0.1, 0.5):
        res = extract_violation_ranks(STANDARD, harmonic, 0.0, eps, k=1, n0=1)
        ok_pairs = [tuple(p) for p in res.pairs] == scan_ranks(harmonic, eps, 1)
        tail = np.asarray(res.tail_values)
        ok_tail = bool(tail.size and np.all((tail >= eps) & (tail <= eps + 0.05)))
        notes.append(f"eps {eps}: {len(res.pairs)} pairs")
        assert res.found and ok_pairs and res.gap_bound_ok and ok_tail
    _detail(request, ", ".join(notes))


@pytest.mark.acceptance("4 comparison and d-fixed identities on 200 contractive tables (tol 1e-12)")
def test_identities(request):
    worst = 0.0
    dfixed = 0
    for sp, T in _contractive_maps(200, 4, "c"):
        worst = max(worst, *comparison_identities(sp, T))
        structure = enumerate_fixed_structure(sp, T)
        for z in structure.fix_d:
            for w in structure.fix_d:
                dfixed += 1
                assert fixed_point_identities(sp, T, z, w, tol=1e-12).passed
    _detail(request, f"max identity deviation {worst:g}, {dfixed} d-fixed pairs")
    assert worst <= 1e-12


@pytest.mark.acceptance("5 halving orbit converges in <= 50 steps with residuals <= 1e-10")
def test_halving(request):
    res = solve_theorem1(MAX, Halving(), linear(0.5), 1.0)
    cert = res.certificate
    worst = max(cert.self_distance, cert.displacement, cert.e_residual, abs(cert.point))
    _detail(request, f"{res.trace.steps} steps, worst residual {worst:.3g}")
    assert res.trace.steps <= 50 and worst <= 1e-10


@pytest.mark.acceptance("6 1000-trial campaign (n <= 6, g = b, linear alpha <= 0.9) finds no violation")
def test_campaign(request):
    rep = run_campaign(TrialSpec(seed=2024, n=6, g="b", alpha_range=(0.0, 0.9)), 1000,
                       parallelism=min(4, os.cpu_count() or 1))
    _detail(request, f"{rep.passing} passing, fix sizes {dict(rep.fix_sizes)}, {len(rep.violations)} violations")
    assert rep.trials == 1000 and rep.passing > 0
    assert not rep.violations
    assert set(rep.fix_sizes) == {1} and rep.fix_sizes[1] == rep.passing


@pytest.mark.acceptance("7 gauge classification of linear, rational and saturating exponential")
def test_gauge_classes(request):
    for g in (linear(0.5), rational()):
        cls = classify(g)
        assert all(cls.passes(c) for c in CLASSES)
    cls = classify(expsat())
    assert [c for c in CLASSES if not cls.passes(c)] == ["psi_semi_coercive"]
    profile = psi_inf_profile(expsat())
    at100 = float(profile.trace[list(DEFAULT_GRID.alphas).index(100.0)])
    assert at100 < 1e-6
    worst = max(abs(limsup_right(linear(0.5), s).value - 0.5 * s) for s in DEFAULT_GRID.s_grid())
    _detail(request, f"psi(100) {at100:.3g}, linear closed-form gap {worst:.3g}")
    assert worst <= 1e-6


@pytest.mark.acceptance("8 unique fixed point on 100 zero-diagonal tables equals the enumeration oracle")
def test_unique_fixed_point(request):
    checked = 0
    for sp, T in _contractive_maps(100, 8, "b", w_max=0.0):
        oracle = [x for x in sp.points() if T.table[x] == x]
        res = solve_theorem2(sp, T, linear(0.9))
        assert oracle == [res.certificate.point] == res.structure.fix
        checked += 1
    _detail(request, f"{checked} tables")


@pytest.mark.acceptance("9 golden CLI invocations reproduce byte-for-byte")
def test_golden(request, tmp_path):
    cases, run_case = load_golden()
    for f in (GOLDEN / "inputs").iterdir():
        shutil.copy(f, tmp_path / f.name)
    for case in cases:
        code, out, err = run_case(case, tmp_path)
        assert code == case["exit"], case["name"]
        assert out == (GOLDEN / "expected" / f"{case['name']}.stdout").read_text(), case["name"]
        assert err == (GOLDEN / "expected" / f"{case['name']}.stderr").read_text(), case["name"]
    _detail(request, f"{len(cases)} cases")
    assert len(cases) == 12
