"""Root finding, adaptive quadrature, and the multistart 2-D maximizer."""

from __future__ import annotations

import math

import numpy as np
import pytest

from hardylab.errors import BracketError, NonConvergenceError
from hardylab.numerics import (
    Bracket,
    OptConfig,
    SplitRegion,
    brent_root,
    find_root_bracketed,
    integrate_adaptive,
    maximize_2d,
    maximize_scalar,
    multistart_points,
    quad_result,
)


def _bracket(f, lo, hi):
    return Bracket(lo, hi, f(lo), f(hi))


class TestBrentRoot:
    def test_cubic_root(self):
        f = lambda x: x**3 - 2.0 * x - 5.0
        res = brent_root(f, _bracket(f, 2.0, 3.0), tol=1e-13)
        assert res.converged
        assert abs(f(res.root)) < 1e-10
        lo, hi = res.bracket
        assert lo <= res.root <= hi

    def test_final_bracket_width_and_signs(self):
        f = lambda x: math.cos(x) - x
        res = brent_root(f, _bracket(f, 0.0, 1.0), tol=1e-12)
        lo, hi = res.bracket
        assert hi - lo <= 1e-12 + 4.0 * abs(res.root) * np.finfo(float).eps
        assert f(lo) * f(hi) <= 0.0

    def test_exact_zero_collapses_bracket(self):
        f = lambda x: x - 0.5
        res = brent_root(f, _bracket(f, 0.0, 1.0))
        assert res.root == 0.5
        assert res.bracket == (0.5, 0.5)

    def test_endpoint_zero(self):
        f = lambda x: x * (x - 1.0)
        res = brent_root(f, Bracket(0.0, 0.5, f(0.0), f(0.5)))
        assert res.root == 0.0

    def test_rejects_non_straddling_bracket(self):
        f = lambda x: x * x + 1.0
        with pytest.raises(BracketError):
            brent_root(f, _bracket(f, -1.0, 1.0))

    def test_iteration_budget_error_carries_best(self):
        f = lambda x: math.tanh(50.0 * (x - 0.3))
        with pytest.raises(NonConvergenceError) as ei:
            brent_root(f, _bracket(f, -1.0, 1.0), tol=1e-15, max_iter=3)
        err = ei.value
        assert err.best is not None
        assert err.error_bound > 0.0
        assert abs(err.best - 0.3) < 1.0

    def test_find_root_bracketed_shortcut(self):
        f = lambda x: x**5 - 0.25
        root = find_root_bracketed(f, _bracket(f, 0.0, 1.0), tol=1e-13)
        assert abs(root - 0.25**0.2) < 1e-12


class TestQuadrature:
    @pytest.mark.parametrize("a", [-0.99, -0.5, -0.25, 0.0, 1.0, 3.7])
    def test_power_integrals_on_unit_interval(self, a):
        tol = 1e-10
        res = quad_result(lambda t: t**a, 0.0, 1.0, tol=tol)
        exact = 1.0 / (a + 1.0)
        assert res.converged
        assert abs(res.value - exact) <= 10.0 * tol * max(1.0, exact)

    def test_smooth_oracle_sin(self):
        res = quad_result(math.sin, 0.0, math.pi, tol=1e-12)
        assert abs(res.value - 2.0) < 1e-11
        assert res.error_bound < 1e-10

    def test_reported_bound_is_honest_for_powers(self):
        for a in (-0.9, -0.6, -0.3):
            res = quad_result(lambda t: t**a, 0.0, 1.0, tol=1e-9)
            exact = 1.0 / (a + 1.0)
            assert abs(res.value - exact) <= 10.0 * res.error_bound + 1e-14

    def test_float_convenience_wrapper(self):
        got = integrate_adaptive(lambda t: math.exp(-t), 0.0, 1.0, tol=1e-12)
        assert abs(got - (1.0 - math.exp(-1.0))) < 1e-12

    def test_interval_validation(self):
        with pytest.raises(ValueError):
            quad_result(lambda t: t, 1.0, 0.0)

    def test_nonintegrable_singularity_raises(self):
        with pytest.raises(NonConvergenceError):
            quad_result(lambda t: t ** (-1.2), 0.0, 1.0, tol=1e-10, max_panels=256)


class TestScalarMaximize:
    def test_parabola(self):
        x, fx = maximize_scalar(lambda u: -(u - 1.3) ** 2, x0=0.0)
        assert abs(x - 1.3) < 1e-7
        assert fx <= 0.0

    def test_never_below_start_value(self):
        g = lambda u: -abs(u) - 0.1 * math.sin(20.0 * u)
        x, fx = maximize_scalar(g, x0=2.0)
        assert fx >= g(2.0)


class TestMaximize2D:
    def _cfg(self, seed=0):
        return OptConfig(starts=12, max_iter=60, x_tol=1e-9, f_tol=1e-12, seed=seed)

    def test_smooth_bump_located(self):
        f = lambda a, b: -((a - 0.2) ** 2) - (b - 1.3) ** 2
        res = maximize_2d(f, SplitRegion(0.75), self._cfg())
        assert res.converged
        a, b = res.argmax
        assert abs(a - 0.2) < 1e-6
        assert abs(b - 1.3) < 1e-6
        assert a < 0.75 < b

    def test_seed_determinism(self):
        f = lambda a, b: -((a + 1.0) ** 2) - (b - 2.0) ** 2 + 0.05 * math.sin(3.0 * a * b)
        r1 = maximize_2d(f, SplitRegion(0.5), self._cfg(seed=3))
        r2 = maximize_2d(f, SplitRegion(0.5), self._cfg(seed=3))
        assert r1.argmax == r2.argmax
        assert r1.value == r2.value

    def test_value_dominates_every_start_probe(self):
        split = 0.5
        f = lambda a, b: -((a - 0.1) ** 2) - (b - 1.0) ** 2 - 0.2 * math.cos(5.0 * (a + b))
        cfg = self._cfg(seed=11)
        res = maximize_2d(f, SplitRegion(split), cfg)
        for u, v in multistart_points(cfg):
            alpha = split - math.exp(u)
            beta = split + math.exp(v)
            assert res.value >= f(alpha, beta) - 1e-12

    def test_multistart_points_layout(self):
        cfg = self._cfg(seed=5)
        pts = multistart_points(cfg)
        assert len(pts) == cfg.starts
        base = {-4.0, -2.0, 0.0, 2.0, 4.0}
        for u, v in pts:
            assert any(abs(u - g) <= 0.5 for g in base)
            assert any(abs(v - g) <= 0.5 for g in base)
        assert pts == multistart_points(cfg)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            OptConfig(starts=0)
        with pytest.raises(ValueError):
            OptConfig(x_tol=-1.0)
