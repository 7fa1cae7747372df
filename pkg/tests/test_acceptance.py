"""Acceptance suite: one test per criterion, each at its stated tolerance.

Run with  pytest -s tests/test_acceptance.py  to see one line per criterion.
"""

import math
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from kdvmkdv import elliptic, sim, waves
from kdvmkdv.ansatz import PdeParams, derive_system
from kdvmkdv.cli import main
from kdvmkdv.solver import SIGN_PAIRS, back_substitute_exact, solve_closed_form
from kdvmkdv.symexpr import ParamPoly

GOLDEN = Path(__file__).parent / "golden"


def _report(n: int, text: str):
    print("[acceptance] criterion %d: PASS — %s" % (n, text))


def test_criterion_1_symbolic_reproduction(capsys):
    start = time.perf_counter()
    system = derive_system(1)
    assert len(system) == 7

    P = ParamPoly.symbol
    a, b, d, m, A, B, D, v = (P(s) for s in "a b d m A B D v".split())
    block = [
        a + 2 * b * D + a * m + 2 * b * D * m,
        a + 2 * b * D,
        2 * A**2 * b * B + A**2 * b * B * m + b * B**3 * m - 4 * B * d * m
        + a * B * D * m + b * B * D**2 * m - B * d * m**2 - B * m * v,
        3 * A**2 * b + b * B**2 * m - 6 * d * m,
        A**2 * b + b * B**2 - d + a * D + b * D**2 + 2 * b * B**2 * m - 4 * d * m - v,
        A**2 * b + 3 * b * B**2 * m - 6 * d * m,
        a * A**2 + 2 * A**2 * b * D + a * B**2 * m + 2 * b * B**2 * D * m,
    ]
    want = sorted((p.normalized(("A", "B", "m")) for p in block), key=lambda q: q.text())
    got = sorted(system.equations, key=lambda q: q.text())
    assert got == want

    code = main(["derive", "--order", "1"])
    out = capsys.readouterr().out
    assert code == 0
    assert out == (GOLDEN / "derive_order1.txt").read_text()
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    with capsys.disabled():
        _report(1, "7 equations match the published block; golden file; %.3fs" % elapsed)


def test_criterion_2_exact_zero_verification(capsys):
    start = time.perf_counter()
    system = derive_system(1)
    for sa, sb in SIGN_PAIRS:
        residuals = back_substitute_exact(system, params=None, sign_A=sa, sign_B=sb)
        assert all(r.is_zero for r in residuals)
    # and at an exact rational parameter point
    params = {"a": Fraction(2), "b": Fraction(3), "d": Fraction(6), "m": Fraction(3, 4)}
    residuals = back_substitute_exact(system, params=params)
    assert all(r.is_zero for r in residuals)
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    with capsys.disabled():
        _report(2, "closed forms give the zero polynomial in the extended ring; %.3fs" % elapsed)


def test_criterion_3_numeric_residual(capsys):
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(20):
        b = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
        p = PdeParams(
            a=rng.uniform(-2.0, 2.0),
            b=b,
            d=b * rng.uniform(0.5, 2.0),
            m=rng.uniform(0.05, 0.98),
        )
        fam = solve_closed_form(p)[int(rng.integers(0, 4))]
        worst = max(worst, sim.spectral_residual(fam, N=256))
    assert worst < 1e-8
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    with capsys.disabled():
        _report(3, "20 random parameter sets, max L-inf residual %.2e; %.2fs" % (worst, elapsed))


def test_criterion_4_hyperbolic_limit(capsys):
    fam = solve_closed_form(PdeParams(0, 1, 1, 1))[0]
    xs = np.linspace(-10.0, 10.0, 801)
    worst = 0.0
    for t in (0.0, 0.37, 1.0, 2.5):
        exact = math.sqrt(6.0) / np.cosh(xs - t)
        worst = max(worst, float(np.max(np.abs(waves.evaluate(fam, xs, t) - exact))))
    assert worst < 1e-12
    with capsys.disabled():
        _report(4, "sqrt(6)*sech(x-t) reproduced to %.2e" % worst)


def test_criterion_5_velocity_by_simulation(capsys):
    p = PdeParams(0.0, 1.0, 1.0, 0.5)
    fam = solve_closed_form(p)[0]
    cfg = sim.SimConfig(p=p, N=256, dt=1e-4, T=1.0)
    states = sim.run(cfg, sim.init_from_family(cfg, fam))
    v, _ = sim.measure_velocity(states, cfg)
    dm, dq = sim.conservation_drift(states)
    assert v == pytest.approx(0.75, abs=1e-3)
    assert dm < 1e-9
    assert dq < 1e-8
    with capsys.disabled():
        _report(
            5,
            "measured v=%.6f (formula 0.75), mass drift %.1e, quadratic drift %.1e" % (v, dm, dq),
        )


def test_criterion_6_four_class_taxonomy(capsys):
    same = solve_closed_form(PdeParams(2, 1, 1, 0.5))  # a/b > 0
    labels_same = sorted(f.class_label for f in same)
    assert len(same) == 4
    assert labels_same == ["AB<0,D<0", "AB<0,D<0", "AB>0,D<0", "AB>0,D<0"]
    diff = solve_closed_form(PdeParams(2, -1, -1, 0.5))  # a/b < 0
    labels_diff = sorted(f.class_label for f in diff)
    assert len(diff) == 4
    assert labels_diff == ["AB<0,D>0", "AB<0,D>0", "AB>0,D>0", "AB>0,D>0"]
    with capsys.disabled():
        _report(6, "four families per regime with the published (sign(AB), sign(D)) labels")


def test_criterion_7_time_dependent_law(capsys):
    C = solve_closed_form(PdeParams(0, 1, 1, 0.5))[0].v
    # f = 1, v0 = C: the constraint law is the constant of the autonomous case
    law_unit = waves.VelocityLaw.time_dependent(C, waves.UnitCoefficient(), v0=C, t_ref=1.0)
    ts = np.linspace(1.0, 8.0, 50)
    assert np.max(np.abs(waves.velocity_at(law_unit, ts) - C)) < 1e-14
    # f = e^t: quadrature law satisfies the defining constraint
    law_exp = waves.VelocityLaw.time_dependent(
        C, waves.ExponentialCoefficient(1.0), v0=C, t_ref=1.0
    )
    ts = np.linspace(1.0, 5.0, 50)
    rc = float(np.max(np.abs(waves.constraint_residual(law_exp, ts, form="constraint"))))
    assert rc < 1e-7
    # published printed form: evaluated, residual reported (not asserted)
    vp = np.array([waves.velocity_paper_form(law_exp, float(t)) for t in ts])
    assert np.all(np.isfinite(vp))
    rp = float(np.max(np.abs(waves.constraint_residual(law_exp, ts, form="paper"))))
    with capsys.disabled():
        _report(
            7,
            "constraint law residual %.1e; published-form residual %.3e (reported, documented "
            "open question)" % (rc, rp),
        )


def test_criterion_8_property_suites(capsys):
    # elliptic identities at 1e-12
    rng = np.random.default_rng(99)
    for _ in range(200):
        xi, m = rng.uniform(-10, 10), rng.uniform(0.0, 0.99)
        sn, cn, dn = elliptic.jacobi(xi, m)
        assert abs(sn * sn + cn * cn - 1.0) < 1e-12
        assert abs(dn * dn + m * sn * sn - 1.0) < 1e-12

    # product rule, structural
    from kdvmkdv.symexpr import EllipticExpr, EllipticMonomial

    x = EllipticExpr(
        {
            EllipticMonomial(1, 1, 0): ParamPoly.symbol("A"),
            EllipticMonomial(0, 0, 1): ParamPoly.symbol("b") * ParamPoly.symbol("m"),
        }
    )
    y = EllipticExpr(
        {
            EllipticMonomial(2, 0, 1): ParamPoly.symbol("v") + ParamPoly.const(2),
            EllipticMonomial(0, 0, 0): ParamPoly.symbol("d"),
        }
    )
    assert (x * y).differentiate() == x.differentiate() * y + x * y.differentiate()

    # sign symmetry: v even in a, D odd
    for aa in (0.7, 1.9):
        plus = solve_closed_form(PdeParams(aa, 1, 1, 0.5))
        minus = solve_closed_form(PdeParams(-aa, 1, 1, 0.5))
        for fp, fm in zip(plus, minus):
            assert fp.v == fm.v and fp.D == -fm.D and fp.A == fm.A and fp.B == fm.B

    # fourth-order temporal convergence
    p = PdeParams(1.0, 1.0, 1.0, 0.5)
    fam = solve_closed_form(p)[0]

    def final_error(dt):
        cfg = sim.SimConfig(p=p, N=128, dt=dt, T=0.5)
        states = sim.run(cfg, sim.init_from_family(cfg, fam), snapshots=2)
        return np.max(
            np.abs(states[-1].field() - waves.evaluate(fam, cfg.grid(), states[-1].t))
        )

    factor = float(final_error(2e-3) / final_error(1e-3))
    assert 12.0 <= factor <= 20.0
    with capsys.disabled():
        _report(8, "identities, product rule, sign symmetry, dt-halving factor %.1f" % factor)
