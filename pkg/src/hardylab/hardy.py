"""The weighted averaging operator H_m and its action on two function
representations.

Closed path: finite sums of power terms c * t^a on half-open intervals.
H_m maps such functions to such functions, so images and L^p norms are
computed exactly (with adaptive quadrature only where several exponents
share an interval).

Sampled path: values on a finite grid in [0, T], with the operator
applied through exact moment integration of the piecewise-linear
interpolant.  Norms on the two paths live on different domains
((0, inf) vs [0, T]); reports state which one they used.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from .constants import Params
from .errors import (
    DivergenceError,
    ExponentDomainError,
    FeasibilityError,
    ParameterDomainError,
)
from .numerics import integrate_adaptive

__all__ = [
    "PowerPiece",
    "PowerTerm",
    "Segment",
    "PiecewisePowerFn",
    "SampledFn",
    "NoninvertibilityWitness",
    "ComplexBoundReport",
    "apply_Hm_closed",
    "residual_closed",
    "lp_norm_closed",
    "extremal_family",
    "ratio_extremal",
    "sample",
    "apply_Hm_sampled",
    "lp_norm_sampled",
    "hardy_norm_witness",
    "noninvertibility_witness",
    "verify_complex_bound",
]


@dataclass(frozen=True)
class PowerPiece:
    """A single power term c * t^exponent on the half-open interval [lo, hi)."""

    coeff: complex
    exponent: float
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.lo < self.hi):
            raise FeasibilityError(f"piece interval must satisfy 0 <= lo < hi (got [{self.lo}, {self.hi}))")
        if not math.isfinite(self.exponent):
            raise FeasibilityError(f"piece exponent must be finite (got {self.exponent})")


@dataclass(frozen=True)
class PowerTerm:
    coeff: complex
    exponent: float


@dataclass(frozen=True)
class Segment:
    """A maximal interval on which the function is a fixed sum of terms."""

    lo: float
    hi: float
    terms: tuple[PowerTerm, ...]


def _merge_terms(terms) -> tuple[PowerTerm, ...]:
    by_exp: dict[float, complex] = {}
    for t in terms:
        by_exp[t.exponent] = by_exp.get(t.exponent, 0.0) + t.coeff
    kept = [PowerTerm(c, e) for e, c in by_exp.items() if c != 0.0]
    kept.sort(key=lambda t: t.exponent)
    return tuple(kept)


class PiecewisePowerFn:
    """A finite sum of power terms organized into disjoint sorted segments.

    Segments are half-open [lo, hi) with hi possibly infinite; the
    function is zero outside them.  Multiple terms may share a segment,
    which is how images under H_m are represented.
    """

    __slots__ = ("segments",)

    def __init__(self, segments) -> None:
        segs = []
        prev_hi = None
        for s in segments:
            if not (0.0 <= s.lo < s.hi):
                raise FeasibilityError(f"segment interval invalid: [{s.lo}, {s.hi})")
            if prev_hi is not None and s.lo < prev_hi:
                raise FeasibilityError("segments must be sorted and disjoint")
            prev_hi = s.hi
            terms = _merge_terms(s.terms)
            if terms:
                segs.append(Segment(s.lo, s.hi, terms))
        self.segments = tuple(segs)

    # -- construction -------------------------------------------------

    @classmethod
    def from_pieces(cls, pieces) -> "PiecewisePowerFn":
        """Build from single-term pieces; overlapping intervals add."""
        pieces = list(pieces)
        if not pieces:
            return cls([])
        cuts = sorted({p.lo for p in pieces} | {p.hi for p in pieces})
        segs = []
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            terms = [
                PowerTerm(p.coeff, p.exponent)
                for p in pieces
                if p.lo <= lo and hi <= p.hi
            ]
            if terms:
                segs.append(Segment(lo, hi, tuple(terms)))
        return cls(segs)

    @classmethod
    def power(cls, coeff: complex, exponent: float, lo: float, hi: float) -> "PiecewisePowerFn":
        return cls.from_pieces([PowerPiece(coeff, exponent, lo, hi)])

    @classmethod
    def indicator(cls, lo: float, hi: float) -> "PiecewisePowerFn":
        return cls.power(1.0, 0.0, lo, hi)

    # -- basic queries -------------------------------------------------

    @property
    def pieces(self) -> tuple[PowerPiece, ...]:
        """Flat single-term view (one piece per segment term)."""
        out = []
        for s in self.segments:
            for t in s.terms:
                out.append(PowerPiece(t.coeff, t.exponent, s.lo, s.hi))
        return tuple(out)

    def is_real(self) -> bool:
        return all(complex(t.coeff).imag == 0.0 for s in self.segments for t in s.terms)

    def __call__(self, t: float) -> complex | float:
        starts = [s.lo for s in self.segments]
        i = bisect_right(starts, t) - 1
        if i < 0:
            return 0.0
        s = self.segments[i]
        if not (s.lo <= t < s.hi):
            return 0.0
        val = sum(term.coeff * t**term.exponent for term in s.terms)
        if isinstance(val, complex) and val.imag == 0.0:
            return val.real
        return val

    # -- linear structure ----------------------------------------------

    def scale(self, factor: complex) -> "PiecewisePowerFn":
        if factor == 0:
            return PiecewisePowerFn([])
        return PiecewisePowerFn(
            [
                Segment(s.lo, s.hi, tuple(PowerTerm(factor * t.coeff, t.exponent) for t in s.terms))
                for s in self.segments
            ]
        )

    def __mul__(self, factor: complex) -> "PiecewisePowerFn":
        return self.scale(factor)

    __rmul__ = __mul__

    def __add__(self, other: "PiecewisePowerFn") -> "PiecewisePowerFn":
        cuts = sorted(
            {s.lo for s in self.segments}
            | {s.hi for s in self.segments if math.isfinite(s.hi)}
            | {s.lo for s in other.segments}
            | {s.hi for s in other.segments if math.isfinite(s.hi)}
        )
        tops = [s.hi for s in self.segments] + [s.hi for s in other.segments]
        unbounded = any(math.isinf(h) for h in tops)
        edges = list(zip(cuts[:-1], cuts[1:]))
        if unbounded and cuts:
            edges.append((cuts[-1], math.inf))
        segs = []
        for lo, hi in edges:
            terms = []
            for fn in (self, other):
                for s in fn.segments:
                    if s.lo <= lo and hi <= s.hi:
                        terms.extend(s.terms)
            if terms:
                segs.append(Segment(lo, hi, tuple(terms)))
        return PiecewisePowerFn(segs)

    def __sub__(self, other: "PiecewisePowerFn") -> "PiecewisePowerFn":
        return self + other.scale(-1.0)

    def restrict(self, lo: float, hi: float) -> "PiecewisePowerFn":
        """Clip to [lo, hi), discarding everything outside."""
        segs = []
        for s in self.segments:
            a = max(s.lo, lo)
            b = min(s.hi, hi)
            if a < b:
                segs.append(Segment(a, b, s.terms))
        return PiecewisePowerFn(segs)

    # -- serialization -------------------------------------------------

    def to_json(self) -> dict:
        pieces = []
        for p in self.pieces:
            c = complex(p.coeff)
            pieces.append(
                {
                    "coeff_re": c.real,
                    "coeff_im": c.imag,
                    "exponent": p.exponent,
                    "lo": p.lo,
                    "hi": "inf" if math.isinf(p.hi) else p.hi,
                }
            )
        return {"pieces": pieces}

    @classmethod
    def from_json(cls, doc: dict) -> "PiecewisePowerFn":
        pieces = []
        for rec in doc["pieces"]:
            hi = rec["hi"]
            hi = math.inf if hi == "inf" else float(hi)
            coeff = complex(float(rec["coeff_re"]), float(rec.get("coeff_im", 0.0)))
            pieces.append(PowerPiece(coeff, float(rec["exponent"]), float(rec["lo"]), hi))
        return cls.from_pieces(pieces)

    def __repr__(self) -> str:
        return f"PiecewisePowerFn({len(self.segments)} segments)"


# ---------------------------------------------------------------------------
# Closed-path operator action and norms
# ---------------------------------------------------------------------------


def apply_Hm_closed(f: PiecewisePowerFn, params: Params) -> PiecewisePowerFn:
    """Exact image of ``f`` under H_m g(t) = t^(-1-m/2) * int_0^t g(s) s^(m/2) ds.

    Each term c * t^a on [l, u) contributes (c/e) * t^a minus a
    t^(-1-m/2) correction inside the interval (e = a + m/2 + 1), and a
    pure t^(-1-m/2) tail beyond it carrying the accumulated mass.  The
    resonant case e = 0 would produce a logarithm and is rejected.
    """
    q0 = 1.0 + params.m / 2.0
    out_segs: list[Segment] = []
    mass: complex = 0.0

    def tail_segment(lo: float, hi: float) -> None:
        if mass != 0.0 and lo < hi:
            out_segs.append(Segment(lo, hi, (PowerTerm(mass, -q0),)))

    cursor = None
    for seg in f.segments:
        if cursor is not None and cursor < seg.lo:
            tail_segment(cursor, seg.lo)
        terms: list[PowerTerm] = []
        local: complex = mass
        for t in seg.terms:
            e = t.exponent + q0
            if e == 0.0:
                raise ExponentDomainError(
                    f"exponent {t.exponent} resonates with the weight (a + m/2 = -1): logarithmic image"
                )
            if seg.lo == 0.0 and e < 0.0:
                raise DivergenceError(
                    f"exponent {t.exponent} makes the averaged integral diverge at 0 (need a + m/2 > -1)"
                )
            terms.append(PowerTerm(t.coeff / e, t.exponent))
            lo_pow = seg.lo**e if seg.lo > 0.0 else 0.0
            local -= t.coeff * lo_pow / e
            if math.isfinite(seg.hi):
                mass += t.coeff * (seg.hi**e - lo_pow) / e
        if local != 0.0:
            terms.append(PowerTerm(local, -q0))
        out_segs.append(Segment(seg.lo, seg.hi, tuple(terms)))
        cursor = seg.hi
    if cursor is not None and math.isfinite(cursor):
        tail_segment(cursor, math.inf)
    return PiecewisePowerFn(out_segs)


def residual_closed(f: PiecewisePowerFn, params: Params) -> PiecewisePowerFn:
    """Exact image of ``f`` under I - lam * H_m."""
    return f + apply_Hm_closed(f, params).scale(-params.lam)


def _abs_pow(c: complex, p: float) -> float:
    return abs(c) ** p


def _segment_norm_pow(seg: Segment, p: float, tol: float) -> float:
    """Integral of |f|^p over one segment."""
    exps = [t.exponent for t in seg.terms]
    if seg.lo == 0.0 and p * min(exps) <= -1.0:
        raise DivergenceError(
            f"|f|^p ~ t^{p * min(exps):.6g} near 0 is not integrable on [0, {seg.hi})"
        )
    if math.isinf(seg.hi) and p * max(exps) >= -1.0:
        raise DivergenceError(
            f"|f|^p ~ t^{p * max(exps):.6g} at infinity is not integrable on [{seg.lo}, inf)"
        )
    if len(seg.terms) == 1:
        c, a = seg.terms[0].coeff, seg.terms[0].exponent
        q = p * a + 1.0
        if q == 0.0:
            # Pure t^(-1/p): logarithmic antiderivative; endpoints are
            # finite and positive here by the divergence checks above.
            return _abs_pow(c, p) * math.log(seg.hi / seg.lo)
        hi_pow = 0.0 if math.isinf(seg.hi) else seg.hi**q
        lo_pow = 0.0 if seg.lo == 0.0 else seg.lo**q
        return _abs_pow(c, p) * (hi_pow - lo_pow) / q

    def integrand(t: float) -> float:
        return abs(sum(term.coeff * t**term.exponent for term in seg.terms)) ** p

    if math.isfinite(seg.hi):
        return integrate_adaptive(integrand, seg.lo, seg.hi, tol)
    # Map [lo, inf) to (0, 1] via t = lo/s; the image singularity at
    # s = 0 is a power of exponent > -1 by the decay check above.
    lo = seg.lo

    def mapped(s: float) -> float:
        t = lo / s
        return integrand(t) * lo / (s * s)

    return integrate_adaptive(mapped, 0.0, 1.0, tol)


def lp_norm_closed(f: PiecewisePowerFn, p: float, tol: float = 1e-10) -> float:
    """L^p(0, inf) norm on the closed path.

    Single-term segments integrate in closed form; multi-term segments
    fall back to adaptive quadrature of |f|^p at tolerance ``tol``.
    Raises :class:`DivergenceError` when the norm is infinite.
    """
    if not p > 1.0:
        raise ParameterDomainError(f"p must exceed 1 (got {p})")
    total = 0.0
    for seg in f.segments:
        total += _segment_norm_pow(seg, p, tol)
    return total ** (1.0 / p)


# ---------------------------------------------------------------------------
# Extremal family
# ---------------------------------------------------------------------------


def extremal_family(params: Params, alpha: float, beta: float) -> PiecewisePowerFn:
    """Two-power near-extremizer: beta * t^(beta-g-1/p) on [0, 1) glued to
    alpha * t^(alpha-g-1/p) on [1, inf), with g = gamma.

    Lies in L^p for every feasible (alpha, beta) and satisfies
    H_m f = t^(beta-g-1/p) on [0, 1), t^(alpha-g-1/p) on [1, inf).
    """
    g = params.gamma
    if not (alpha < g < beta):
        raise FeasibilityError(
            f"need alpha < gamma < beta (got alpha={alpha}, gamma={g:.6g}, beta={beta})"
        )
    inv_p = 1.0 / params.p
    pieces = [PowerPiece(beta, beta - g - inv_p, 0.0, 1.0)]
    if alpha != 0.0:
        pieces.append(PowerPiece(alpha, alpha - g - inv_p, 1.0, math.inf))
    return PiecewisePowerFn.from_pieces(pieces)


def ratio_extremal(params: Params, alpha: float, beta: float) -> float:
    """||f - lam*H_m f||_p^p / ||f||_p^p for the two-power family, via the
    closed norm expressions.  Agrees with the two-point ratio c(alpha,
    beta)^p identically on the feasible region."""
    g = params.gamma
    if not (alpha < g < beta):
        raise FeasibilityError(
            f"need alpha < gamma < beta (got alpha={alpha}, gamma={g:.6g}, beta={beta})"
        )
    p, lam = params.p, params.lam

    def norm_pow(shift: float) -> float:
        return abs(beta - shift) ** p / (p * (beta - g)) + abs(alpha - shift) ** p / (p * (g - alpha))

    return norm_pow(lam) / norm_pow(0.0)


# ---------------------------------------------------------------------------
# Sampled path
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SampledFn:
    """Function values on a strictly increasing grid in [0, T].

    The function is treated as piecewise linear between nodes and zero
    below the first node when grid[0] > 0.
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values)
        if values.dtype.kind not in "fc":
            values = values.astype(float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if grid.ndim != 1 or grid.size < 2:
            raise FeasibilityError("grid must be 1-D with at least two nodes")
        if grid[0] < 0.0:
            raise FeasibilityError("grid must start at or above 0")
        if not np.all(np.diff(grid) > 0.0):
            raise FeasibilityError("grid must be strictly increasing")
        if values.shape != grid.shape:
            raise FeasibilityError("values must match grid shape")

    def to_json(self) -> dict:
        vals = np.asarray(self.values, dtype=complex)
        return {
            "grid": [float(t) for t in self.grid],
            "values_re": [float(v) for v in vals.real],
            "values_im": [float(v) for v in vals.imag],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SampledFn":
        grid = np.asarray(doc["grid"], dtype=float)
        re = np.asarray(doc["values_re"], dtype=float)
        im_raw = doc.get("values_im")
        if im_raw is None or not np.any(np.asarray(im_raw)):
            return cls(grid, re)
        return cls(grid, re + 1j * np.asarray(im_raw, dtype=float))


def sample(f: PiecewisePowerFn, grid: np.ndarray) -> SampledFn:
    """Evaluate a closed-path function on a grid."""
    grid = np.asarray(grid, dtype=float)
    is_real = f.is_real()
    out = np.zeros_like(grid, dtype=float if is_real else complex)
    for seg in f.segments:
        mask = (grid >= seg.lo) & (grid < seg.hi)
        if not np.any(mask):
            continue
        ts = grid[mask]
        acc = np.zeros_like(ts, dtype=out.dtype)
        for term in seg.terms:
            coeff = term.coeff.real if is_real else term.coeff
            acc += coeff * ts**term.exponent
        out[mask] = acc
    return SampledFn(grid, out)


def apply_Hm_sampled(f: SampledFn, params: Params) -> SampledFn:
    """H_m applied to the piecewise-linear interpolant of ``f``.

    Cell moments of s^(m/2) * (linear) integrate exactly, so the only
    error is the interpolation error of the input.  At t = 0 the
    operator takes the value f(0) / (1 + m/2).
    """
    m = params.m
    q0 = m / 2.0 + 1.0
    q1 = m / 2.0 + 2.0
    t = f.grid
    v = f.values
    t0, t1 = t[:-1], t[1:]
    f0, f1 = v[:-1], v[1:]
    h = t1 - t0
    p0 = t1**q0 - t0**q0
    p1 = t1**q1 - t0**q1
    i0 = p0 / q0
    i1 = p1 / q1
    cells = f0 * i0 + (f1 - f0) / h * (i1 - t0 * i0)
    mass = np.concatenate(([0.0], np.cumsum(cells)))
    out = np.empty_like(v)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[:] = mass / t**q0
    if t[0] == 0.0:
        out[0] = v[0] / q0
    else:
        out[0] = 0.0
    return SampledFn(t, out)


def lp_norm_sampled(f: SampledFn, p: float) -> float:
    """L^p([grid[0], grid[-1]]) norm by trapezoid rule on |f|^p."""
    if not p > 1.0:
        raise ParameterDomainError(f"p must exceed 1 (got {p})")
    trapz = getattr(np, "trapezoid", None) or np.trapz
    return float(trapz(np.abs(f.values) ** p, f.grid)) ** (1.0 / p)


# ---------------------------------------------------------------------------
# Witnesses and bounds
# ---------------------------------------------------------------------------


def hardy_norm_witness(params: Params, eps: float) -> float:
    """Norm ratio ||H_m f||_p / ||f||_p for f = t^(-1/p + eps) on (0, 1).

    Strictly below the operator norm 1/gamma for eps > 0 and increasing
    to it as eps decreases.  Computed in closed form via the piecewise
    algebra (every segment involved is single-term)."""
    if not (0.0 < eps < params.gamma):
        raise FeasibilityError(f"need 0 < eps < gamma (got eps={eps}, gamma={params.gamma:.6g})")
    f = PiecewisePowerFn.power(1.0, -1.0 / params.p + eps, 0.0, 1.0)
    hf = apply_Hm_closed(f, params)
    return lp_norm_closed(hf, params.p) / lp_norm_closed(f, params.p)


@dataclass(frozen=True)
class NoninvertibilityWitness:
    """Norm of H_m applied to the unit indicator of [n, n+1), with the
    closed-form upper bound in p-th power scale for comparison."""

    n: int
    norm: float
    norm_pow_p: float
    bound_pow_p: float


def noninvertibility_witness(params: Params, n: int, tol: float = 1e-10) -> NoninvertibilityWitness:
    """||H_m 1_[n, n+1)||_p, which vanishes as n grows even though the
    input norm stays 1; shows I - lam*H_m is never boundedly invertible
    onto its image uniformly in n."""
    if n < 1:
        raise FeasibilityError(f"n must be a positive integer (got {n})")
    p = params.p
    q0 = 1.0 + params.m / 2.0
    f = PiecewisePowerFn.indicator(float(n), float(n + 1))
    hf = apply_Hm_closed(f, params)
    norm = lp_norm_closed(hf, p, tol)
    bound = ((n + 1.0) ** q0 - n**q0) ** p / (q0**p * (p * q0 - 1.0) * n ** (p * q0 - 1.0))
    return NoninvertibilityWitness(n=n, norm=norm, norm_pow_p=norm**p, bound_pow_p=bound)


@dataclass(frozen=True)
class ComplexBoundReport:
    """Outcome of checking ||f - lam*H_m f||_p <= C ||f||_p on [0, T]."""

    lhs_norm: float
    input_norm: float
    bound: float
    ratio: float
    passed: bool
    domain: tuple[float, float]


def verify_complex_bound(
    f: SampledFn,
    params: Params,
    c: float,
    tol: float = 1e-8,
) -> ComplexBoundReport:
    """Check the residual bound for a complex-valued sampled function.

    H_m acts componentwise on real and imaginary parts; norms are grid
    norms on the sampled domain [grid[0], grid[-1]]."""
    hf = apply_Hm_sampled(f, params)
    resid = SampledFn(f.grid, f.values - params.lam * hf.values)
    lhs = lp_norm_sampled(resid, params.p)
    fn = lp_norm_sampled(f, params.p)
    ratio = lhs / fn if fn > 0.0 else 0.0
    return ComplexBoundReport(
        lhs_norm=lhs,
        input_norm=fn,
        bound=c,
        ratio=ratio,
        passed=ratio <= c + tol,
        domain=(float(f.grid[0]), float(f.grid[-1])),
    )
