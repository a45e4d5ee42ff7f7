"""End-to-end acceptance checks for the operator-norm laboratory.

Each test pins one headline behavior at a fixed tolerance and prints a
one-line summary (visible under ``pytest -s``) so the suite doubles as a
report.  Tolerances here are contractual: do not loosen them.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from hardylab.bellman import (
    build_special_fn,
    check_burkholder_conditions,
    check_majorization,
    with_constant,
)
from hardylab.constants import (
    C_p,
    Params,
    alpha_star,
    c_ratio,
    conjectured_value,
    generic_constant,
    sharp_constant,
)
from hardylab.hardy import (
    PiecewisePowerFn,
    PowerPiece,
    SampledFn,
    apply_Hm_closed,
    apply_Hm_sampled,
    extremal_family,
    hardy_norm_witness,
    lp_norm_sampled,
    noninvertibility_witness,
    ratio_extremal,
    sample,
)
from hardylab.martingale import ExtremalMartingale, extremal_ratio_exact, fuzz_rows, limit_ratio
from hardylab.numerics import integrate_adaptive


def test_01_interior_optimum_benchmark_point():
    pr = Params(1.5, 1.0, 2.0)
    t0 = time.perf_counter()
    res = sharp_constant(pr)
    dt = time.perf_counter() - t0

    assert 1.805 <= res.c_pow_p <= 1.820
    ax, bx = res.argmax
    assert abs(ax - 0.4) <= 0.5
    assert abs(bx - 5.7) <= 0.5
    conj_pow = conjectured_value(pr) ** pr.p
    assert abs(conj_pow - 1.6565) <= 5e-3
    assert dt < 1.0
    print(
        f"\nACCEPTANCE 01 interior benchmark: PASS "
        f"(C^p={res.c_pow_p:.9f}, argmax=({ax:.4f},{bx:.4f}), "
        f"conjectured^p={conj_pow:.6f}, {dt * 1e3:.0f} ms)"
    )


def test_02_small_p_unit_lambda_closed_form():
    t0 = time.perf_counter()
    worst = 0.0
    for p in (1.1, 1.25, 1.5, 1.75, 2.0):
        res = generic_constant(Params(p, 0.0, 1.0))
        expect = (p - 1.0) ** (-p)
        rel = abs(res.c_pow_p - expect) / expect
        worst = max(worst, rel)
        assert rel <= 1e-6, f"p={p}: got {res.c_pow_p}, expected {expect}"
    dt = time.perf_counter() - t0
    assert dt < 5.0
    print(f"\nACCEPTANCE 02 small-p closed form: PASS (worst rel {worst:.2e}, {dt:.2f} s)")


def test_03_anchor_root_and_fourth_power_constant():
    a4 = alpha_star(4.0)
    a3 = alpha_star(3.0)
    assert abs(a4 - (-2.0)) <= 1e-10
    assert abs(a3 - (-1.0 - math.sqrt(2.0))) <= 1e-10
    assert abs(C_p(4.0) - 3.0) <= 1e-10
    res = generic_constant(Params(4.0, 0.0, 1.0))
    assert abs(res.c_pow_p - 3.0) / 3.0 <= 1e-6
    print(
        f"\nACCEPTANCE 03 anchors/p=4 constant: PASS "
        f"(alpha*(4)={a4:.12f}, alpha*(3)={a3:.12f}, optimizer C^p={res.c_pow_p:.9f})"
    )


def _feasible_tuples(n: int, seed: int):
    """Seeded feasible (params, alpha, beta) with exponent margins so the
    power-family ratio survives truncation to [0, 20]: alpha at least 3/p
    below gamma (integrable tail) and beta at least 1/p + 1/2 above
    (vanishing at zero)."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        p = rng.uniform(1.1, 4.0)
        floor = -2.0 * (p - 1.0) / p
        m = rng.uniform(max(floor, -0.4) + 0.05, 2.0)
        lam = rng.uniform(-2.0, 3.0)
        pr = Params(p, m, lam)
        g = pr.gamma
        alpha = g - (3.0 / p + math.exp(rng.uniform(-2.0, 1.0)))
        beta = g + (0.5 + 1.0 / p + math.exp(rng.uniform(-2.0, 1.0)))
        out.append((pr, float(alpha), float(beta)))
    return out


def _clustered_grid(n_total: int = 20000) -> np.ndarray:
    """Uniform grid on [0, 20] refined geometrically around the jump of
    the two-power family at t = 1."""
    base = np.linspace(0.0, 20.0, n_total - 80)
    k = np.arange(1, 41)
    cluster = np.concatenate([1.0 - 2.0 ** (-k), 1.0 + 2.0 ** (-k)])
    return np.unique(np.concatenate([base, cluster]))


def test_04_extremal_ratio_identity_and_quadrature():
    grid = _clustered_grid()
    worst_closed = 0.0
    worst_sampled = 0.0
    for pr, a, b in _feasible_tuples(100, seed=4):
        ref = c_ratio(pr, a, b)
        closed = ratio_extremal(pr, a, b)
        worst_closed = max(worst_closed, abs(closed - ref) / abs(ref))

        f = extremal_family(pr, a, b)
        fs = sample(f, grid)
        hs = apply_Hm_sampled(fs, pr)
        res = SampledFn(grid, fs.values - pr.lam * hs.values)
        sampled = lp_norm_sampled(res, pr.p) ** pr.p / lp_norm_sampled(fs, pr.p) ** pr.p
        worst_sampled = max(worst_sampled, abs(sampled - ref) / abs(ref))

    assert worst_closed <= 1e-12
    assert worst_sampled <= 1e-3
    print(
        f"\nACCEPTANCE 04 ratio identity: PASS "
        f"(closed rel {worst_closed:.2e}, sampled rel {worst_sampled:.2e})"
    )


def test_05_operator_norm_witnesses():
    eps_grid = (1e-2, 1e-3, 1e-4)
    for p, m in ((2.0, 0.0), (1.5, 1.0), (3.0, -0.5)):
        pr = Params(p, m, 1.0)
        vals = [hardy_norm_witness(pr, eps) for eps in eps_grid]
        assert vals[0] < vals[1] < vals[2], f"({p},{m}): not increasing {vals}"
        assert abs(vals[-1] - 1.0 / pr.gamma) <= 1e-3
    print("\nACCEPTANCE 05 norm witnesses: PASS (all three pairs within 1e-3 of 1/gamma)")


MAJORIZE_SETS = [(1.5, 0.0, 1.0), (4.0, 0.0, 1.0), (1.5, 1.0, 2.0), (3.0, 1.0, 2.0), (2.5, 0.0, 10.0)]


def test_06_majorization_certificates():
    worst = -math.inf
    for p, m, lam in MAJORIZE_SETS:
        spec = build_special_fn(Params(p, m, lam))
        rep = check_majorization(spec, x_range=(-100.0, 100.0), n_points=10**6, tol=1e-9)
        assert rep.passed, f"({p},{m},{lam}): violation {rep.max_violation} at {rep.witness}"
        worst = max(worst, rep.max_violation)

    spec4 = build_special_fn(Params(4.0, 0.0, 1.0))
    undersized = with_constant(spec4, 2.0 ** 0.25)  # C^p = 2 < 3
    rep_bad = check_majorization(undersized)
    assert not rep_bad.passed
    assert rep_bad.witness is not None

    for p in (1.5, 4.0):
        spec = build_special_fn(Params(p, 0.0, 1.0))
        reports = check_burkholder_conditions(spec)
        for name, rep in reports.items():
            assert rep.passed, f"p={p} condition {name}: {rep.max_violation}"

    print(
        f"\nACCEPTANCE 06 majorization: PASS "
        f"(worst margin {worst:.2e}; undersized constant rejected at x={rep_bad.witness[0]:.3f})"
    )


def _random_poly(rng: np.random.Generator) -> PiecewisePowerFn:
    coeffs = rng.uniform(-1.0, 1.0, size=6)
    pieces = [PowerPiece(float(c), float(k), 0.0, 1.0) for k, c in enumerate(coeffs) if c != 0.0]
    return PiecewisePowerFn.from_pieces(pieces)


def test_07_boundary_term_inequality():
    rng = np.random.default_rng(7)
    pairs = [(p, m) for p in (1.5, 2.5, 4.0) for m in (0.0, 1.0, -0.4)]
    worst = math.inf
    for _ in range(200):
        f = _random_poly(rng)
        for p, m in pairs:
            pr = Params(p, m, 1.0)
            q0 = 1.0 + m / 2.0
            g = apply_Hm_closed(f, pr)
            lhs = (p * q0 - 1.0) * integrate_adaptive(lambda t: abs(g(t)) ** p, 0.0, 1.0, tol=1e-10)
            rhs = p * integrate_adaptive(
                lambda t: abs(g(t)) ** (p - 2.0) * g(t) * f(t), 0.0, 1.0, tol=1e-10
            )
            slack = rhs - lhs
            worst = min(worst, slack)
            assert slack >= -1e-8, f"poly at (p={p}, m={m}): slack {slack}"
    print(f"\nACCEPTANCE 07 boundary-term inequality: PASS (min slack {worst:.3e} >= -1e-8)")


def test_08_martingale_ratio_and_fuzz():
    em = ExtremalMartingale(-2.0, 1e-4, 10**4)
    r = extremal_ratio_exact(em, 4.0)
    assert abs(r - 3.0) <= 1e-2
    assert abs(limit_ratio(-2.0, 4.0) - 3.0) <= 1e-10

    t0 = time.perf_counter()
    for p in (1.5, 3.0):
        rows = list(fuzz_rows(10**4, p, seed0=0))
        assert len(rows) == 10**4
        bad = [row for row in rows if not row[2]]
        assert not bad, f"p={p}: {len(bad)} violations, first {bad[:1]}"
    dt = time.perf_counter() - t0
    assert dt < 30.0
    print(
        f"\nACCEPTANCE 08 martingale fuzz: PASS "
        f"(exact ratio {r:.6f}, 2x10^4 trees clean in {dt:.1f} s)"
    )


def test_09_noninvertibility_decay():
    for p, m in ((2.0, 0.0), (3.0, 1.0)):
        pr = Params(p, m, 1.0)
        witnesses = [noninvertibility_witness(pr, n) for n in range(1, 101)]
        norms = [w.norm for w in witnesses]
        assert all(a > b for a, b in zip(norms, norms[1:])), f"({p},{m}): not strictly decreasing"
        last = witnesses[-1]
        assert last.norm_pow_p <= last.bound_pow_p
    print("\nACCEPTANCE 09 noninvertibility decay: PASS (strictly decreasing, n=100 under bound)")


def test_10_p_two_exact_constants():
    for m in (0.0, 1.0):
        for lam in (0.0, 0.3 * (1.0 + m), 1.0 + m):
            res = sharp_constant(Params(2.0, m, lam))
            assert abs(res.c - 1.0) <= 1e-9, f"m={m} lam={lam}: C={res.c}"
        lam = 2.0 * (1.0 + m)
        res = sharp_constant(Params(2.0, m, lam))
        expect = 2.0 * lam / (1.0 + m) - 1.0
        assert abs(res.c - expect) <= 1e-9, f"m={m} lam={lam}: C={res.c} vs {expect}"
    print("\nACCEPTANCE 10 p=2 exact constants: PASS (identity and linear regimes)")
