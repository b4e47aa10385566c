"""Domination witnesses between increasing approximations, and the
approximation speed-up construction.

A witness (q, alpha, beta) asserts that beta's approximation is dominated
by q times alpha's, in one of three equivalent-in-the-limit senses:

  clause a: the sequence q*alpha_s - beta_s is nondecreasing;
  clause b: beta - beta_s < q * (alpha - alpha_s) for all s (a statement
            about the limits, checkable only against a horizon proxy);
  clause c: beta_{s+1} - beta_s < q * (alpha_{s+1} - alpha_s) for all s.

All checks here operate on finite prefixes with exact comparisons.  The
clause-b checker substitutes the value at a later horizon H for the limit
and is explicitly a diagnostic, as is ratio_trace.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .rationals import Rational, ZERO
from .streams import ApproxStream, Direction


@dataclass(frozen=True)
class SolovayWitness:
    q: Rational
    clause: str  # "a", "b" or "c"
    alpha: ApproxStream
    beta: ApproxStream

    def __post_init__(self):
        if self.q <= 0:
            raise ValueError(f"q must be positive, got {self.q}")
        if self.clause not in ("a", "b", "c"):
            raise ValueError(f"clause must be one of a/b/c, got {self.clause!r}")
        for s, name in ((self.alpha, "alpha"), (self.beta, "beta")):
            if s.direction is not Direction.INCREASING:
                raise ValueError(f"{name} must be increasing")


@dataclass(frozen=True)
class ClauseVerdict:
    holds: bool
    fails_at: Optional[int] = None

    def __bool__(self) -> bool:
        return self.holds


def check_clause_c(w: SolovayWitness, T: int) -> ClauseVerdict:
    """beta_{s+1} - beta_s < q * (alpha_{s+1} - alpha_s) for all s < T,
    strict and exact; on failure reports the least failing s."""
    if w.clause != "c":
        raise ValueError(f"witness clause is {w.clause!r}, expected 'c'")
    for s in range(T):
        db = w.beta.value(s + 1) - w.beta.value(s)
        da = w.alpha.value(s + 1) - w.alpha.value(s)
        if not (db < w.q * da):
            return ClauseVerdict(False, s)
    return ClauseVerdict(True)


def check_clause_a(w: SolovayWitness, T: int) -> ClauseVerdict:
    """q*alpha_s - beta_s nondecreasing on the prefix: the finite shadow of
    "q*alpha - beta is left-c.e. via these approximations"."""
    if w.clause != "a":
        raise ValueError(f"witness clause is {w.clause!r}, expected 'a'")
    for s in range(T):
        lo = w.q * w.alpha.value(s) - w.beta.value(s)
        hi = w.q * w.alpha.value(s + 1) - w.beta.value(s + 1)
        if hi < lo:
            return ClauseVerdict(False, s)
    return ClauseVerdict(True)


def check_clause_b_horizon(w: SolovayWitness, T: int, H: int) -> ClauseVerdict:
    """Horizon-proxy diagnostic for the limit clause: substitutes the stage-H
    values for the limits and checks beta_H - beta_s < q * (alpha_H - alpha_s)
    for s < T.  Not a limit statement."""
    if w.clause != "b":
        raise ValueError(f"witness clause is {w.clause!r}, expected 'b'")
    if H <= T:
        raise ValueError(f"horizon H={H} must exceed T={T}")
    aH = w.alpha.value(H)
    bH = w.beta.value(H)
    for s in range(T):
        if not (bH - w.beta.value(s) < w.q * (aH - w.alpha.value(s))):
            return ClauseVerdict(False, s)
    return ClauseVerdict(True)


def speedup(alpha: ApproxStream, beta: ApproxStream, p: Rational) -> ApproxStream:
    """An increasing stream gamma with gamma_0 = min(alpha_0, p*beta_0) and
    gamma_{s+1} = min(alpha_{s+1}, gamma_s + p*(beta_{s+1} - beta_s)).

    Unconditionally: gamma is increasing, gamma_s <= alpha_s, and each
    increment is at most p times the corresponding beta increment.  When
    alpha's tail lag is bounded by q*(beta's tail lag) for some q < p, the
    p-paced budget lets gamma catch alpha (cap-by-alpha then always wins).
    """
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    for s, name in ((alpha, "alpha"), (beta, "beta")):
        if s.direction is not Direction.INCREASING:
            raise ValueError(f"{name} must be increasing")

    def gen(s: int, prefix: Sequence[Rational]) -> Rational:
        if s == 0:
            return min(alpha.value(0), p * beta.value(0))
        budget = prefix[-1] + p * (beta.value(s) - beta.value(s - 1))
        return min(alpha.value(s), budget)

    return ApproxStream(
        Direction.INCREASING, gen, unit_interval=False,
        label=f"speedup(p={p})",
    )


def ratio_trace(
    alpha: ApproxStream, beta: ApproxStream, T: int, H: int
) -> list[Optional[Rational]]:
    """Diagnostic horizon-proxy ratios r_s = (alpha_H - alpha_s)/(beta_H - beta_s)
    for s < T; entries where beta_H = beta_s are None (undefined)."""
    if H <= T:
        raise ValueError(f"horizon H={H} must exceed T={T}")
    aH = alpha.value(H)
    bH = beta.value(H)
    out: list[Optional[Rational]] = []
    for s in range(T):
        db = bH - beta.value(s)
        if db == ZERO:
            out.append(None)
        else:
            out.append((aH - alpha.value(s)) / db)
    return out


def least_prefix_q(
    alpha: ApproxStream,
    beta: ApproxStream,
    clause: str,
    T: int,
    resolution: Rational = Rational(1, 1024),
) -> Optional[Rational]:
    """Bisection estimate (diagnostic only) of the least q for which the
    given clause holds on the prefix; returns an upper bound within
    `resolution` of the infimum, or None if no q <= 2**20 works."""

    def holds(q: Rational) -> bool:
        w = SolovayWitness(q, clause, alpha, beta)
        if clause == "c":
            return check_clause_c(w, T).holds
        if clause == "a":
            return check_clause_a(w, T).holds
        raise ValueError("least_prefix_q supports clauses 'a' and 'c' only")

    hi = Rational(1)
    while not holds(hi):
        hi *= 2
        if hi > Rational(1 << 20):
            return None
    lo = Rational(0)
    while hi - lo > resolution:
        mid = (lo + hi) / 2
        if mid > 0 and holds(mid):
            hi = mid
        else:
            lo = mid
    return hi
