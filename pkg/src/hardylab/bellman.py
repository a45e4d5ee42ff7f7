"""Certificate functions for the residual bound and their verification.

V(x, y) = |x - lam*y|^p - C^p |x|^p is the obstacle; the certificate
U(x, y) = slope * |y|^(p-2) y (x - gamma*y) majorizes V and is linear
in x.  Three constructions are supported: the martingale-backed one at
(m, lam) = (0, 1), a closed-form one when lam is large enough that a
one-sided tangent at gamma works, and an anchored one built from the
interior optimizer otherwise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from ._backend import kernels
from .constants import (
    Branch,
    C_p,
    ConstantResult,
    Params,
    alpha_star,
    generic_constant,
)
from .errors import BracketError, BranchError, NonConvergenceError, TangencyError
from .numerics import Bracket, OptConfig, _line_max, brent_root

__all__ = [
    "CertBranch",
    "SpecialFnSpec",
    "ViolationReport",
    "V_eval",
    "U_eval",
    "build_special_fn",
    "with_constant",
    "check_majorization",
    "check_burkholder_conditions",
    "inflection_interval",
    "find_tangencies",
    "check_double_tangent",
]


class CertBranch(str, Enum):
    MART_M0_L1 = "mart_m0_l1"
    GENERAL_FIRST_CASE = "general_first_case"
    GENERAL_SECOND_CASE = "general_second_case"


@dataclass(frozen=True)
class SpecialFnSpec:
    """A concrete certificate: constant, branch, slope, and anchors.

    ``slope`` is strictly negative for every branch; reports elsewhere
    quote D = -slope.  ``anchors`` are the tangency abscissas on the
    y = 1 slice when the construction has them.
    """

    params: Params
    c_pow_p: float
    branch: CertBranch
    slope: float
    anchors: tuple[float, float] | None = None


@dataclass(frozen=True)
class ViolationReport:
    """Outcome of a pointwise inequality scan."""

    max_violation: float
    witness: tuple[float, float] | None
    points_checked: int
    passed: bool

    def to_json(self) -> dict:
        wx, wy = (self.witness if self.witness is not None else (None, None))
        return {
            "passed": self.passed,
            "max_violation": self.max_violation,
            "witness_x": wx,
            "witness_y": wy,
            "points_checked": self.points_checked,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ViolationReport":
        wx = doc.get("witness_x")
        wy = doc.get("witness_y")
        witness = None if wx is None else (float(wx), float(wy))
        return cls(
            max_violation=float(doc["max_violation"]),
            witness=witness,
            points_checked=int(doc["points_checked"]),
            passed=bool(doc["passed"]),
        )


def _spow(y: float, q: float) -> float:
    """sign(y) * |y|^q, continuous at 0 for q > 0."""
    if y == 0.0:
        return 0.0
    return math.copysign(abs(y) ** q, y)


def V_eval(spec: SpecialFnSpec, x: float, y: float) -> float:
    """Obstacle V(x, y) = |x - lam*y|^p - C^p |x|^p."""
    p, lam = spec.params.p, spec.params.lam
    return abs(x - lam * y) ** p - spec.c_pow_p * abs(x) ** p


def U_eval(spec: SpecialFnSpec, x: float, y: float) -> float:
    """Certificate U(x, y) = slope * sign(y)|y|^(p-1) (x - gamma*y)."""
    p = spec.params.p
    g = spec.params.gamma
    return spec.slope * _spow(y, p - 1.0) * (x - g * y)


def with_constant(spec: SpecialFnSpec, c: float) -> SpecialFnSpec:
    """Same certificate with the constant replaced by ``c`` (norm scale)."""
    return replace(spec, c_pow_p=c**spec.params.p)


# First-case feasibility grid: x spans 1e3 * max(1, lam) on each side.
_FIRST_CASE_POINTS = 10**5


def _first_case_holds(params: Params, warn: bool = True) -> bool:
    """Grid test of the one-sided tangent inequality
    |x - lam|^p - (lam/g - 1)^p |x|^p <= -p (lam-g)^(p-1) (lam/g) (x - g)."""
    p, lam = params.p, params.lam
    g = params.gamma
    c_pow = (lam / g - 1.0) ** p
    slope = -p * (lam - g) ** (p - 1.0) * lam / g
    r = 1e3 * max(1.0, lam)
    xs = np.linspace(-r, r, _FIRST_CASE_POINTS)
    diff, idx = kernels.majorization_max(xs, p, lam, g, c_pow, slope, 1.0)
    holds = diff <= 1e-11
    if warn:
        # Equality at x = gamma is structural; a near-zero extremum away
        # from it (either sign) means the branch decision is borderline.
        mask = np.abs(xs - g) > 1e-3 * r
        d2, _ = kernels.majorization_max(
            np.ascontiguousarray(xs[mask]), p, lam, g, c_pow, slope, 1.0
        )
        borderline = (holds and d2 > -1e-9) or (not holds and diff < 1e-9)
        if borderline:
            warnings.warn(
                "one-sided tangent inequality is within tolerance of equality; "
                "branch selection is borderline",
                RuntimeWarning,
                stacklevel=3,
            )
    return holds


def build_special_fn(params: Params, cfg: OptConfig | None = None) -> SpecialFnSpec:
    """Construct the certificate for the given parameters.

    Requires lam > 0, and p != 2 outside (m, lam) = (0, 1).  Raises
    :class:`BranchError` when no construction applies.
    """
    p, lam = params.p, params.lam
    g = params.gamma
    if lam <= 0.0:
        raise BranchError(f"certificate construction requires lam > 0 (got {lam})")
    if params.m == 0.0 and lam == 1.0:
        a_p = alpha_star(p)
        slope = -p * abs(1.0 - a_p) ** (p - 2.0) / (p - 1.0)
        return SpecialFnSpec(
            params=params,
            c_pow_p=C_p(p),
            branch=CertBranch.MART_M0_L1,
            slope=slope,
            anchors=(a_p, 1.0),
        )
    if p == 2.0:
        raise BranchError("general certificate branches require p != 2")
    if lam > 2.0 * g and _first_case_holds(params):
        c_pow = (lam / g - 1.0) ** p
        slope = -p * (lam - g) ** (p - 1.0) * lam / g
        return SpecialFnSpec(
            params=params,
            c_pow_p=c_pow,
            branch=CertBranch.GENERAL_FIRST_CASE,
            slope=slope,
            anchors=None,
        )
    result: ConstantResult = generic_constant(params, cfg)
    if result.branch is not Branch.INTERIOR_OPTIMUM or result.argmax is None:
        raise BranchError(
            f"no interior ratio optimum found for {params}; cannot anchor the certificate"
        )
    a_s, b_s = result.argmax
    spec = SpecialFnSpec(
        params=params,
        c_pow_p=result.c_pow_p,
        branch=CertBranch.GENERAL_SECOND_CASE,
        slope=0.0,
        anchors=(a_s, b_s),
    )
    slope = (V_eval(spec, b_s, 1.0) - V_eval(spec, a_s, 1.0)) / (b_s - a_s)
    if not slope < 0.0:
        raise BranchError(f"anchored certificate slope must be negative (got {slope})")
    return replace(spec, slope=slope)


# ---------------------------------------------------------------------------
# Pointwise checks
# ---------------------------------------------------------------------------


def check_majorization(
    spec: SpecialFnSpec,
    x_range: tuple[float, float] = (-100.0, 100.0),
    n_points: int = 10**6,
    tol: float = 1e-9,
) -> ViolationReport:
    """Scan V(x, y) <= U(x, y) on the slices y = 1 and y = -1.

    By p-homogeneity of both sides these slices decide the inequality
    for every y != 0; y = 0 reduces to C >= 1, which is checked
    directly.  Violations are normalized by 1 + |V| + |U| so the
    tolerance is meaningful at |x| where |V| is large.
    """
    if spec.c_pow_p < 1.0 - 1e-15:
        return ViolationReport(
            max_violation=math.inf,
            witness=(x_range[1], 0.0),
            points_checked=0,
            passed=False,
        )
    xs = np.linspace(x_range[0], x_range[1], n_points)
    p, lam = spec.params.p, spec.params.lam
    g = spec.params.gamma
    best_diff = -math.inf
    witness: tuple[float, float] | None = None
    for y in (1.0, -1.0):
        diff, idx = kernels.majorization_max(xs, p, lam, g, spec.c_pow_p, spec.slope, y)
        if diff > best_diff:
            best_diff = diff
            witness = (float(xs[idx]), y)
    return ViolationReport(
        max_violation=best_diff,
        witness=witness,
        points_checked=2 * n_points,
        passed=best_diff <= tol,
    )


def _report_from_grid(diff: np.ndarray, xs, ys, tol: float) -> ViolationReport:
    idx = int(np.argmax(diff))
    return ViolationReport(
        max_violation=float(diff[idx]),
        witness=(float(xs[idx]), float(ys[idx])),
        points_checked=int(diff.size),
        passed=float(diff[idx]) <= tol,
    )


def check_burkholder_conditions(
    spec: SpecialFnSpec,
    x_range: tuple[float, float] = (-4.0, 4.0),
    n_points: int = 201,
    tol: float = 1e-9,
    seed: int = 0,
) -> dict[str, ViolationReport]:
    """The four conditions backing the martingale transference argument:

    1. V <= U on the half-plane x <= y;
    2. U(x, x) <= 0;
    3. U(x + h, max(x + h, y)) <= U(x + h, y) for x <= y and any h;
    4. x -> U(x, y) is affine, so second differences vanish exactly.

    Only the mart_m0_l1 certificate satisfies all four; other branches
    are rejected.  Condition 4 runs on a dyadic subgrid of [-2, 2] where
    the affine cancellation is exact to rounding.
    """
    if spec.branch is not CertBranch.MART_M0_L1:
        raise BranchError("the four-condition check applies to the mart_m0_l1 certificate")
    lo, hi = x_range
    xs = np.linspace(lo, hi, n_points)
    gx, gy = np.meshgrid(xs, xs)
    mask = gx <= gy
    px, py = gx[mask], gy[mask]
    p = spec.params.p
    g = spec.params.gamma
    lam = spec.params.lam
    spow = np.sign(py) * np.abs(py) ** (p - 1.0)
    v_vals = np.abs(px - lam * py) ** p - spec.c_pow_p * np.abs(px) ** p
    u_vals = spec.slope * spow * (px - g * py)
    rep1 = _report_from_grid(v_vals - u_vals, px, py, tol)

    u_diag = spec.slope * np.sign(xs) * np.abs(xs) ** (p - 1.0) * (xs - g * xs)
    rep2 = _report_from_grid(u_diag, xs, xs, tol)

    rng = np.random.default_rng(seed)
    n_trip = 20000
    tx = rng.uniform(lo, hi, n_trip)
    ty = rng.uniform(lo, hi, n_trip)
    tx, ty = np.minimum(tx, ty), np.maximum(tx, ty)
    th = rng.uniform(2.0 * lo, 2.0 * hi, n_trip)
    z = tx + th
    zy = np.maximum(z, ty)
    u_kept = spec.slope * np.sign(ty) * np.abs(ty) ** (p - 1.0) * (z - g * ty)
    u_maxed = spec.slope * np.sign(zy) * np.abs(zy) ** (p - 1.0) * (z - g * zy)
    rep3 = _report_from_grid(u_maxed - u_kept, z, ty, tol)

    # Dyadic nodes and offset make x - h, x + h exact, so affinity of U
    # in x cancels to a few ulps.
    step = 2.0**-5
    dx = np.arange(-2.0, 2.0 + step / 2, step)
    dy = np.arange(-2.0, 2.0 + step / 2, 2.0 * step)
    h = 2.0**-8
    mx, my = np.meshgrid(dx, dy)
    mx, my = mx.ravel(), my.ravel()

    def u_at(xv):
        return spec.slope * np.sign(my) * np.abs(my) ** (p - 1.0) * (xv - g * my)

    second = np.abs(u_at(mx - h) - 2.0 * u_at(mx) + u_at(mx + h))
    rep4 = _report_from_grid(second, mx, my, 1e-12)

    return {
        "majorization": rep1,
        "initial": rep2,
        "maximal": rep3,
        "concavity": rep4,
    }


# ---------------------------------------------------------------------------
# Double tangency
# ---------------------------------------------------------------------------


def inflection_interval(p: float, lam: float, c_pow_p: float) -> tuple[float, float]:
    """Interval on which x -> V(x, 1) is convex (concave outside).

    The convexity of |x - lam|^p - C^p |x|^p changes where
    |x - lam| / |x| = C^(p/(p-2)); for lam > 0 this yields two cuts."""
    if p == 2.0:
        raise BranchError("inflection interval requires p != 2")
    if lam <= 0.0:
        raise BranchError("inflection interval requires lam > 0")
    r = c_pow_p ** (1.0 / (p - 2.0))
    if p > 2.0:
        return lam / (1.0 - r), lam / (1.0 + r)
    return lam / (1.0 + r), lam / (1.0 - r)


def find_tangencies(
    v,
    u,
    a: float,
    b: float,
    x_tol: float = 1e-9,
) -> tuple[float, float]:
    """Locate the contact points of v with its affine majorant u on the
    two concavity regions (-inf, a] and [b, inf).

    On each region v - u is concave with maximum 0 at the contact
    point, so the contact is found as an interior maximum.  Raises
    :class:`TangencyError` when either regional maximum stays clearly
    below zero (single-contact configurations are rejected)."""
    if not a < b:
        raise TangencyError(f"inflection interval must satisfy a < b (got {a}, {b})")

    def d(x: float) -> float:
        return v(x) - u(x)

    span = max(1.0, b - a)
    results = []
    for side, lo_s, hi_s, x0 in (
        ("left", a - 1e6 * span, a, a - span),
        ("right", b, b + 1e6 * span, b + span),
    ):
        x, fx, _ = _line_max(d, x0, d(x0), x_tol, lo_s, hi_s)
        scale = 1.0 + abs(v(x)) + abs(u(x))
        if fx < -1e-7 * scale:
            raise TangencyError(
                f"no {side} tangency: max(v - u) = {fx:.3g} on the {side} concavity region"
            )
        results.append(_polish_root_of_slope(d, x, lo_s, hi_s))
    return results[0], results[1]


def _polish_root_of_slope(d, x: float, lo: float, hi: float) -> float:
    """Refine an interior maximum of ``d`` by root-finding its central
    difference derivative; falls back to ``x`` when no sign change is
    bracketed (flat maxima)."""
    delta = 1e-3 * (1.0 + abs(x))
    lo_b, hi_b = max(lo, x - delta), min(hi, x + delta)
    if not lo_b < hi_b:
        return x
    fd = 1e-7 * (1.0 + abs(x))

    def dprime(t: float) -> float:
        return (d(t + fd) - d(t - fd)) / (2.0 * fd)

    try:
        bracket = Bracket(lo_b, hi_b, dprime(lo_b), dprime(hi_b))
    except BracketError:
        return x
    try:
        return brent_root(dprime, bracket, tol=1e-13).root
    except NonConvergenceError:
        return x


def check_double_tangent(
    v,
    u,
    a: float,
    b: float,
    tol: float = 1e-9,
    n_points: int = 20001,
) -> ViolationReport:
    """Verify that the affine function u touches v at two points, one on
    each side of the convexity interval (a, b), and majorizes v.

    The slope of u must match v' at both contacts (tangency, not mere
    contact), and v <= u holds on a wide scan around the contacts."""
    t1, t2 = find_tangencies(v, u, a, b)
    c_slope = u(1.0) - u(0.0)
    fd = 1e-6 * max(1.0, abs(t1), abs(t2))
    for t in (t1, t2):
        dv = (v(t + fd) - v(t - fd)) / (2.0 * fd)
        if abs(dv - c_slope) > 1e-4 * (1.0 + abs(c_slope)):
            raise TangencyError(
                f"contact at {t:.6g} is not tangent: v' = {dv:.6g}, slope = {c_slope:.6g}"
            )
    span = (t2 - t1) + 1.0
    xs = np.linspace(t1 - 2.0 * span, t2 + 2.0 * span, n_points)
    vv = np.array([v(x) for x in xs])
    uu = np.array([u(x) for x in xs])
    diff = (vv - uu) / (1.0 + np.abs(vv) + np.abs(uu))
    idx = int(np.argmax(diff))
    return ViolationReport(
        max_violation=float(diff[idx]),
        witness=(float(xs[idx]), 1.0),
        points_checked=n_points,
        passed=float(diff[idx]) <= tol,
    )
