"""Sharp operator-norm constants for the residual I - lambda*H_m of the
weighted averaging operator H_m on L^p(0, inf).

The constant in p-th power scale is the supremum of the two-point ratio

    c(alpha, beta)^p = [(beta-g)|alpha-lam|^p + (g-alpha)|beta-lam|^p]
                       / [(beta-g)|alpha|^p + (g-alpha)|beta|^p]

over the open region {alpha < g < beta}, where g = m/2 + (p-1)/p.
Closed forms cover lam <= 0, p = 2, and (m, lam) = (0, 1); the general
case runs a seeded multistart maximization and compares the interior
optimum against the boundary limit max{1, |1 - lam/g|^p}.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from ._backend import kernels
from .errors import FeasibilityError, NonConvergenceError, ParameterDomainError
from .numerics import Bracket, OptConfig, OptResult, brent_root, multistart_points

__all__ = [
    "Branch",
    "Params",
    "ConstantResult",
    "gamma",
    "alpha_star",
    "C_p",
    "c_ratio",
    "conjectured_value",
    "optimize_ratio",
    "generic_constant",
    "sharp_constant",
]


class Branch(str, enum.Enum):
    """Which computation produced a sharp constant."""

    CLOSED_FORM_M0_L1 = "closed_form_m0_l1"
    LAMBDA_NONPOSITIVE = "lambda_nonpositive"
    P_EQUALS_TWO = "p_equals_two"
    INTERIOR_OPTIMUM = "interior_optimum"
    BOUNDARY_LIMIT = "boundary_limit"


@dataclass(frozen=True)
class Params:
    """Parameter triple (p, m, lam) for the operator I - lam*H_m on L^p.

    Requires p > 1 and m > -2(p-1)/p, which makes the split point
    gamma = m/2 + (p-1)/p positive and H_m bounded with norm 1/gamma.
    """

    p: float
    m: float
    lam: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.p) and self.p > 1.0):
            raise ParameterDomainError(f"p must exceed 1 (got {self.p})")
        floor = -2.0 * (self.p - 1.0) / self.p
        if not (math.isfinite(self.m) and self.m > floor):
            raise ParameterDomainError(
                f"m must exceed -2(p-1)/p = {floor:.6g} (got {self.m})"
            )
        if not math.isfinite(self.lam):
            raise ParameterDomainError(f"lam must be finite (got {self.lam})")

    @property
    def gamma(self) -> float:
        return self.m / 2.0 + (self.p - 1.0) / self.p


def gamma(params: Params) -> float:
    """Split point gamma = m/2 + (p-1)/p; the norm of H_m is 1/gamma."""
    return params.gamma


def alpha_star(p: float, tol: float = 1e-12) -> float:
    """Distinguished tangency abscissa alpha_p.

    Equals (p-1)/p for 1 < p <= 2.  For p > 2 it is the unique negative
    solution of (p-1)*alpha + 2 - p = |alpha|^(p-2) * alpha, located by
    a bracketed root search on x = |alpha| in (x0, inf) with
    x0 = (p-1)^(1/(p-2)).
    """
    if not (math.isfinite(p) and p > 1.0):
        raise ParameterDomainError(f"p must exceed 1 (got {p})")
    if p <= 2.0:
        return (p - 1.0) / p

    def h(x: float) -> float:
        # x^(p-1) - (p-1)x - (p-2) for x = |alpha| > 0.
        return x ** (p - 1.0) - (p - 1.0) * x - (p - 2.0)

    x0 = (p - 1.0) ** (1.0 / (p - 2.0))
    f0 = h(x0)
    hi = x0 + 1.0
    fhi = h(hi)
    grow = 0
    while fhi <= 0.0 and grow < 200:
        hi = x0 + (hi - x0) * 2.0
        fhi = h(hi)
        grow += 1
    root = brent_root(h, Bracket(x0, hi, f0, fhi), tol).root
    return -root


def C_p(p: float) -> float:
    """Sharp constant at (m, lam) = (0, 1), returned in p-th power scale.

    Equals 1/(p-1)^p for 1 < p <= 2 and (1 + |alpha_p|)^(p-2)/(p-1)
    for p > 2.
    """
    if not (math.isfinite(p) and p > 1.0):
        raise ParameterDomainError(f"p must exceed 1 (got {p})")
    if p <= 2.0:
        return (p - 1.0) ** (-p)
    a = alpha_star(p)
    return (1.0 + abs(a)) ** (p - 2.0) / (p - 1.0)


def c_ratio(params: Params, alpha: float, beta: float) -> float:
    """Two-point ratio c(alpha, beta)^p on the open region alpha < gamma < beta."""
    g = params.gamma
    if not (alpha < g < beta):
        raise FeasibilityError(
            f"need alpha < gamma < beta (got alpha={alpha}, gamma={g:.6g}, beta={beta})"
        )
    return kernels.c_ratio_pow_p(params.p, g, params.lam, alpha, beta)


def conjectured_value(params: Params) -> float:
    """Closed-form candidate (1+m)/gamma - 1 type value for the caller's lam:
    lam/gamma - 1 in norm scale.  A lower bound for the sharp constant
    when it exceeds 1; not sharp in general."""
    return params.lam / params.gamma - 1.0


@dataclass(frozen=True)
class ConstantResult:
    """Sharp constant together with how it was obtained.

    ``c_pow_p`` is the constant in p-th power scale, ``c`` its p-th root.
    ``argmax`` is the interior maximizer when one exists; ``alpha_p`` is
    recorded for the (m, lam) = (0, 1) closed form.
    """

    params: Params
    c_pow_p: float
    c: float
    branch: Branch
    argmax: tuple[float, float] | None = None
    alpha_p: float | None = None
    opt: OptResult | None = None


def _boundary_pow_p(params: Params) -> float:
    return max(1.0, abs(1.0 - params.lam / params.gamma) ** params.p)


def optimize_ratio(params: Params, cfg: OptConfig | None = None) -> OptResult:
    """Multistart maximization of the two-point ratio using the active
    kernel backend.  Argmax is reported in (alpha, beta) coordinates."""
    if cfg is None:
        cfg = OptConfig()
    g = params.gamma
    best: tuple[float, float, float, bool] | None = None
    total_ev = 0
    for u0, v0 in multistart_points(cfg):
        u, v, fval, ev, conv = kernels.ratio_descent(
            params.p, g, params.lam, u0, v0, cfg.x_tol, cfg.f_tol, cfg.max_iter
        )
        total_ev += ev
        alpha = g - math.exp(u)
        beta = g + math.exp(v)
        cand = (fval, alpha, beta, conv)
        if (
            best is None
            or cand[0] > best[0]
            or (cand[0] == best[0] and (cand[1], cand[2]) < (best[1], best[2]))
        ):
            best = cand
    assert best is not None
    value, alpha, beta, conv = best
    return OptResult(argmax=(alpha, beta), value=value, converged=conv, evals=total_ev)


def generic_constant(params: Params, cfg: OptConfig | None = None) -> ConstantResult:
    """General-parameter constant: interior optimum vs boundary limit.

    The boundary limit max{1, |1 - lam/gamma|^p} is attained as both
    endpoints collapse to gamma or spread to infinity; the interior
    branch wins only when the optimizer beats it by more than f_tol.
    """
    if cfg is None:
        cfg = OptConfig()
    res = optimize_ratio(params, cfg)
    if not res.converged:
        raise NonConvergenceError(
            f"ratio optimizer did not converge for {params}",
            best=res,
        )
    boundary = _boundary_pow_p(params)
    if res.value > boundary + cfg.f_tol:
        return ConstantResult(
            params=params,
            c_pow_p=res.value,
            c=res.value ** (1.0 / params.p),
            branch=Branch.INTERIOR_OPTIMUM,
            argmax=res.argmax,
            opt=res,
        )
    return ConstantResult(
        params=params,
        c_pow_p=boundary,
        c=boundary ** (1.0 / params.p),
        branch=Branch.BOUNDARY_LIMIT,
        opt=res,
    )


def sharp_constant(params: Params, cfg: OptConfig | None = None) -> ConstantResult:
    """Sharp constant for I - lam*H_m on L^p, by branch:

    1. lam <= 0: closed form (|lam|/gamma + 1)^p.
    2. p = 2: closed form max{1, lam/gamma - 1}^2.
    3. m = 0, lam = 1: closed form C_p with the tangency abscissa alpha_p.
    4. otherwise: seeded multistart optimization vs the boundary limit.
    """
    p, lam = params.p, params.lam
    g = params.gamma
    if lam <= 0.0:
        c = abs(lam) / g + 1.0
        return ConstantResult(params=params, c_pow_p=c**p, c=c, branch=Branch.LAMBDA_NONPOSITIVE)
    if p == 2.0:
        c = max(1.0, lam / g - 1.0)
        return ConstantResult(params=params, c_pow_p=c**p, c=c, branch=Branch.P_EQUALS_TWO)
    if params.m == 0.0 and lam == 1.0:
        cp = C_p(p)
        return ConstantResult(
            params=params,
            c_pow_p=cp,
            c=cp ** (1.0 / p),
            branch=Branch.CLOSED_FORM_M0_L1,
            alpha_p=alpha_star(p),
        )
    return generic_constant(params, cfg)
