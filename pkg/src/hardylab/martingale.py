"""Extremal martingales for the maximal-function inequality
||f_n - f_n*||_p <= C ||f_n||_p, exact ratio evaluation, and a fuzzer
for the inequality over random simple martingales.

The extremal family starts at 1 and at each step either gets absorbed
at alpha * (current value) with probability s or moves to beta * value
with probability 1 - s, where beta = (1 - s*alpha)/(1 - s) keeps the
mean fixed.  Its terminal law is explicit, so ratios are evaluated in
closed form rather than by simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bellman import ViolationReport
from .errors import GenerationError, ParameterDomainError
from .constants import C_p

__all__ = [
    "ExtremalMartingale",
    "MartingaleNode",
    "SimpleMartingale",
    "extremal_ratio_exact",
    "limit_ratio",
    "terminal_distribution",
    "extremal_tree",
    "random_simple_martingale",
    "mean_matching_probs",
    "maximal_ratio",
    "verify_maximal_inequality",
    "fuzz_rows",
]


@dataclass(frozen=True)
class ExtremalMartingale:
    """Parameters (alpha, s, n) of the absorbed-growth extremal family."""

    alpha: float
    s: float
    n: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha)):
            raise ParameterDomainError(f"alpha must be finite (got {self.alpha})")
        if not (0.0 < self.s < 1.0):
            raise ParameterDomainError(f"s must lie in (0, 1) (got {self.s})")
        if not (isinstance(self.n, int) and self.n >= 0):
            raise ParameterDomainError(f"n must be a nonnegative integer (got {self.n})")

    @property
    def beta(self) -> float:
        return (1.0 - self.s * self.alpha) / (1.0 - self.s)

    def growth_exceeds_one(self, p: float) -> bool:
        """Whether (1 - s) * beta^p > 1, the regime where the ratio
        climbs toward its limit as n grows."""
        return (1.0 - self.s) * self.beta**p > 1.0


def extremal_ratio_exact(em: ExtremalMartingale, p: float) -> float:
    """||f_n - f_n*||_p^p / ||f_n||_p^p for the extremal family.

    The terminal law is P(f_n = alpha * beta^k) = s(1-s)^k for
    0 <= k < n and P(f_n = beta^n) = (1-s)^n; off the top branch
    f_n - f_n* = (1 - 1/alpha) f_n, on it the difference vanishes.
    The geometric sums are evaluated in closed form, normalized to
    avoid overflow when (1-s)*beta^p is large.

    Requires alpha <= 1: only then is beta >= 1, so the running maximum
    at absorption is the current growth value beta^k and the difference
    identity above holds.  (The tree itself remains a valid martingale
    for alpha > 1, but this closed form would not describe it.)"""
    if p <= 1.0:
        raise ParameterDomainError(f"p must exceed 1 (got {p})")
    if em.alpha > 1.0:
        raise ParameterDomainError(
            f"closed-form ratio requires alpha <= 1 (got {em.alpha}); for larger alpha "
            "the running maximum no longer rides the growth branch"
        )
    if em.alpha == 0.0:
        raise ZeroDivisionError("alpha = 0: f_n - f_n* = (1 - 1/alpha) f_n is undefined")
    if em.n == 0:
        return 0.0
    a_pow = abs(em.alpha - 1.0) ** p
    b_pow = abs(em.alpha) ** p
    q = (1.0 - em.s) * abs(em.beta) ** p
    if q > 1.0:
        # sum_{k<n} q^k = q^n * T with T = (1 - q^-n)/(q - 1); divide
        # through by q^n so nothing overflows.
        t = (1.0 - q ** (-em.n)) / (q - 1.0)
        return a_pow * em.s * t / (b_pow * em.s * t + 1.0)
    if q == 1.0:
        sn = float(em.n)
        return a_pow * em.s * sn / (b_pow * em.s * sn + 1.0)
    sn = (1.0 - q**em.n) / (1.0 - q)
    return a_pow * em.s * sn / (b_pow * em.s * sn + q**em.n)


def limit_ratio(alpha: float, p: float) -> float:
    """n -> inf, s -> 0 limit |alpha-1|^p / (|alpha|^p - p*alpha + p - 1).

    The denominator is strictly positive for alpha != 1; the supremum
    over alpha is the sharp constant in p-th power scale."""
    if p <= 1.0:
        raise ParameterDomainError(f"p must exceed 1 (got {p})")
    if alpha == 1.0:
        raise ParameterDomainError("alpha = 1 makes the limit ratio indeterminate (0/0)")
    return abs(alpha - 1.0) ** p / (abs(alpha) ** p - p * alpha + p - 1.0)


def terminal_distribution(em: ExtremalMartingale) -> list[tuple[float, float]]:
    """Explicit terminal law of f_n as (value, probability) pairs:
    absorbed at step k+1 with value alpha*beta^k and mass s(1-s)^k,
    plus the surviving top value beta^n with mass (1-s)^n.

    Weights are independent powers of ``decay`` = fl(1 - s) paired with
    the exactly complementary ``1 - decay`` (a Sterbenz-exact
    subtraction), so the total mass telescopes to 1 within a few ulps
    even for large n; the pair differs from (s, 1-s) by at most one
    rounding of s."""
    decay = 1.0 - em.s
    s_eff = 1.0 - decay
    beta = em.beta

    def bpow(k: int) -> float:
        try:
            return beta**k
        except OverflowError:
            return math.copysign(math.inf, beta) if k % 2 else math.inf

    out = [(em.alpha * bpow(k), s_eff * decay**k) for k in range(em.n)]
    out.append((bpow(em.n), decay**em.n))
    return out


# ---------------------------------------------------------------------------
# Simple martingales as finite trees
# ---------------------------------------------------------------------------


@dataclass
class MartingaleNode:
    """One tree node: value of the process, conditional probability of
    reaching this node from its parent, and children (empty = leaf)."""

    value: float
    prob: float
    children: list["MartingaleNode"] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "prob": self.prob,
            "children": [c.to_json() for c in self.children],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "MartingaleNode":
        return cls(
            value=float(doc["value"]),
            prob=float(doc["prob"]),
            children=[cls.from_json(c) for c in doc.get("children", [])],
        )


@dataclass
class SimpleMartingale:
    """A simple martingale presented as a finite tree of outcomes."""

    root: MartingaleNode
    depth: int

    def validate(self, tol: float = 1e-12) -> None:
        """Check root mass 1 and, at every internal node, that child
        probabilities sum to 1 and the weighted child mean returns the
        node's value (the martingale property)."""
        if abs(self.root.prob - 1.0) > tol:
            raise ParameterDomainError(f"root probability must be 1 (got {self.root.prob})")
        stack = [self.root]
        while stack:
            node = stack.pop()
            if not node.children:
                continue
            mass = math.fsum(c.prob for c in node.children)
            mean = math.fsum(c.prob * c.value for c in node.children)
            if abs(mass - 1.0) > tol:
                raise ParameterDomainError(
                    f"child probabilities at value {node.value} sum to {mass}, not 1"
                )
            if abs(mean - node.value) > tol * max(1.0, abs(node.value)):
                raise ParameterDomainError(
                    f"martingale property fails at value {node.value}: child mean {mean}"
                )
            stack.extend(node.children)

    def to_json(self) -> dict:
        return self.root.to_json()

    @classmethod
    def from_json(cls, doc: dict) -> "SimpleMartingale":
        root = MartingaleNode.from_json(doc)

        def depth_of(node: MartingaleNode) -> int:
            if not node.children:
                return 0
            return 1 + max(depth_of(c) for c in node.children)

        return cls(root=root, depth=depth_of(root))


def extremal_tree(em: ExtremalMartingale) -> SimpleMartingale:
    """The extremal family as a tree: each surviving node branches into
    an absorbed leaf (alpha * value, mass s) and a continuing node
    (beta * value, mass 1 - s); absorption freezes the path, so the
    absorbed child is a leaf at its absorption depth."""
    root = MartingaleNode(value=1.0, prob=1.0)
    node = root
    for _ in range(em.n):
        absorbed = MartingaleNode(value=em.alpha * node.value, prob=em.s)
        survive = MartingaleNode(value=em.beta * node.value, prob=1.0 - em.s)
        node.children = [absorbed, survive]
        node = survive
    return SimpleMartingale(root=root, depth=em.n)


def mean_matching_probs(
    parent_value: float, values: np.ndarray, raw_weights: np.ndarray
) -> np.ndarray | None:
    """Convex weights on ``values`` with mean exactly ``parent_value``.

    Normalizes the raw weights, then shifts mass between the extreme
    children (the two-point scheme) to correct the mean.  Returns None
    when the correction would drive a weight negative."""
    w = raw_weights / raw_weights.sum()
    i_min = int(np.argmin(values))
    i_max = int(np.argmax(values))
    lo, hi = values[i_min], values[i_max]
    if not lo < parent_value < hi:
        return None
    mu = float(w @ values)
    shift = (mu - parent_value) / (hi - lo)
    w = w.copy()
    if shift >= 0.0:
        if w[i_max] < shift:
            return None
        w[i_max] -= shift
        w[i_min] += shift
    else:
        if w[i_min] < -shift:
            return None
        w[i_min] += shift
        w[i_max] -= shift
    return w


_RESAMPLE_BUDGET = 100


def random_simple_martingale(
    seed: int,
    depth: int,
    max_branch: int = 4,
    value_scale: float = 1.0,
) -> SimpleMartingale:
    """Seeded random simple martingale with the martingale property
    holding by construction at every internal node.

    Child values are uniform in [value - value_scale, value + value_scale]
    and must straddle the parent; probabilities come from
    :func:`mean_matching_probs`.  Draws failing either requirement are
    resampled, up to a budget."""
    if depth < 1:
        raise ParameterDomainError(f"depth must be at least 1 (got {depth})")
    if max_branch < 2:
        raise ParameterDomainError(f"max_branch must be at least 2 (got {max_branch})")
    rng = np.random.default_rng(seed)
    root = MartingaleNode(value=1.0, prob=1.0)

    def grow(node: MartingaleNode, level: int) -> None:
        if level == depth:
            return
        for _ in range(_RESAMPLE_BUDGET):
            k = int(rng.integers(2, max_branch + 1))
            values = node.value + value_scale * (2.0 * rng.random(k) - 1.0)
            probs = mean_matching_probs(node.value, values, rng.random(k))
            if probs is not None:
                break
        else:
            raise GenerationError(
                f"no feasible child draw at value {node.value} after {_RESAMPLE_BUDGET} tries"
            )
        node.children = [
            MartingaleNode(value=float(v), prob=float(q)) for v, q in zip(values, probs)
        ]
        for child in node.children:
            grow(child, level + 1)

    grow(root, 0)
    return SimpleMartingale(root=root, depth=depth)


# ---------------------------------------------------------------------------
# Inequality verification
# ---------------------------------------------------------------------------


def _leaf_sums(sm: SimpleMartingale, p: float, absolute: bool) -> tuple[float, float, int]:
    """Exact (||f_n - f_n*||_p^p, ||f_n||_p^p, leaf count) by walking
    every path with its running maximum."""
    lhs_terms: list[float] = []
    rhs_terms: list[float] = []
    leaves = 0
    x0 = abs(sm.root.value) if absolute else sm.root.value
    stack = [(sm.root, 1.0, x0)]
    while stack:
        node, path_p, running_max = stack.pop()
        x = abs(node.value) if absolute else node.value
        running_max = max(running_max, x)
        path_p *= node.prob if node is not sm.root else 1.0
        if not node.children:
            leaves += 1
            lhs_terms.append(path_p * abs(x - running_max) ** p)
            rhs_terms.append(path_p * abs(x) ** p)
            continue
        for child in node.children:
            stack.append((child, path_p, running_max))
    return math.fsum(lhs_terms), math.fsum(rhs_terms), leaves


def maximal_ratio(sm: SimpleMartingale, p: float, absolute: bool = False) -> float:
    """||f_n - f_n*||_p^p / ||f_n||_p^p over the tree's terminal law;
    0 for the identically-zero process."""
    lhs, rhs, _ = _leaf_sums(sm, p, absolute)
    if rhs == 0.0:
        return 0.0
    return lhs / rhs


def verify_maximal_inequality(
    sm: SimpleMartingale,
    p: float,
    c: float,
    absolute: bool = False,
) -> ViolationReport:
    """Check ||f_n - f_n*||_p <= c ||f_n||_p exactly over all leaves.

    ``c`` is in norm scale.  With ``absolute`` the walk uses |f| and
    its running maximum (the nonnegative-submartingale variant).  The
    violation is the normalized excess of the p-th power left side over
    the right; a few ulps of slack absorb rounding."""
    lhs, rhs, leaves = _leaf_sums(sm, p, absolute)
    bound = c**p * rhs
    violation = (lhs - bound) / (1.0 + lhs + bound)
    return ViolationReport(
        max_violation=violation,
        witness=None,
        points_checked=leaves,
        passed=violation <= 1e-12,
    )


def fuzz_rows(
    n_trees: int,
    p: float,
    c: float | None = None,
    depth: int = 4,
    max_branch: int = 4,
    value_scale: float = 1.0,
    seed0: int = 0,
):
    """Yield (seed, ratio, passed) for seeded random trees; ``ratio``
    is the p-th power ratio and ``passed`` compares it against c^p.
    Defaults c to the sharp constant for (m, lam) = (0, 1)."""
    c_pow = C_p(p) if c is None else c**p
    for i in range(n_trees):
        seed = seed0 + i
        sm = random_simple_martingale(seed, depth, max_branch, value_scale)
        ratio = maximal_ratio(sm, p)
        yield seed, ratio, ratio <= c_pow * (1.0 + 1e-12) + 1e-15
