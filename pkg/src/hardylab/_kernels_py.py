"""Pure-Python twin of the compiled kernels in ``_kernels.pyx``.

Both backends expose the same functions with the same semantics; the
compiled one is preferred at import time when available.
"""

from __future__ import annotations

import math

import numpy as np

from .numerics import coordinate_descent

BACKEND_NAME = "python"


def _ratio_cap(p: float) -> float:
    # exp(cap)**p must stay finite in double precision.
    return min(30.0, 690.0 / p)


def c_ratio_pow_p(p: float, gamma: float, lam: float, alpha: float, beta: float) -> float:
    """Raw two-point ratio in p-th power scale; no feasibility policing."""
    w_hi = beta - gamma
    w_lo = gamma - alpha
    num = w_hi * abs(alpha - lam) ** p + w_lo * abs(beta - lam) ** p
    den = w_hi * abs(alpha) ** p + w_lo * abs(beta) ** p
    return num / den


def _ratio_uv(p: float, gamma: float, lam: float, u: float, v: float) -> float:
    # exp(u), exp(v) are the exact feasibility margins; using them directly
    # avoids cancellation in gamma - alpha and beta - gamma.
    eu = math.exp(u)
    ev = math.exp(v)
    alpha = gamma - eu
    beta = gamma + ev
    num = ev * abs(alpha - lam) ** p + eu * abs(beta - lam) ** p
    den = ev * abs(alpha) ** p + eu * abs(beta) ** p
    return num / den


def ratio_descent(
    p: float,
    gamma: float,
    lam: float,
    u0: float,
    v0: float,
    x_tol: float,
    f_tol: float,
    max_sweeps: int,
) -> tuple[float, float, float, int, bool]:
    """Coordinate golden-section ascent of the ratio objective in the
    (u, v) chart.  Returns (u, v, value, evaluations, converged)."""
    cap = _ratio_cap(p)

    def g(u: float, v: float) -> float:
        return _ratio_uv(p, gamma, lam, u, v)

    return coordinate_descent(g, u0, v0, x_tol, f_tol, max_sweeps, cap)


def majorization_max(
    xs: np.ndarray,
    p: float,
    lam: float,
    gamma: float,
    c_pow_p: float,
    slope: float,
    y: float,
) -> tuple[float, int]:
    """Scan of the normalized certificate gap on a grid of x at fixed y.

    Computes (V - U) / (1 + |V| + |U|) with
    V(x, y) = |x - lam*y|^p - C^p |x|^p and
    U(x, y) = slope * sign(y)|y|^(p-1) * (x - gamma*y),
    returning the maximum and the index of its first occurrence.
    """
    xs = np.asarray(xs, dtype=float)
    v = np.abs(xs - lam * y) ** p - c_pow_p * np.abs(xs) ** p
    u = slope * math.copysign(abs(y) ** (p - 1.0), y) * (xs - gamma * y)
    diff = (v - u) / (1.0 + np.abs(v) + np.abs(u))
    idx = int(np.argmax(diff))
    return float(diff[idx]), idx
