"""Stage engine that grows an increasing approximation against a suite of
monotone adversaries, pacing every contribution by a designated source
stream.

Per requirement index i the engine keeps a counter c_i (bumped on L-side
expansionary stages), a counter d_i (bumped on R-side expansionary stages),
a scale q_i derived from the d_j of higher-priority indices, and a
contribution beta_i.  The total beta_s is the exact sum of contributions.

Stage s+1, entered with state through stage s:

  1. materialize the driving stream, the pacing source and every
     participating adversary at s+1;
  2. R-side classification: |alpha_{s+1} - B - delta_i(s+1)| < 2^-d_i,
     with B the entry sum of contributions (the pre-update total: the
     natural circularity of "beta at the stage being built" is resolved by
     always testing against the state as the stage begins); bump d_i on
     success;
  3. recompute the scales q_i from the updated d_j: q_0 = 1/2 and, for
     i > 0, q_i = min over j < i of 2^-(i + d_j + 1);
  4. L-side classification with threshold 2^-c_i against the same B; on
     success grow beta_i by q_i * (eta_{s+1} - eta_t), where t is the
     previous L-expansionary stage of i (0 if none), and bump c_i;
  5. admit index s+1 with zeroed parameters and re-total beta.

Indices without an adversary stay inert: their parameters exist (all zero)
but never change.  Every parameter change is logged as a TraceEvent; a run
is bit-exactly replayable from its trace.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

from .rationals import ONE, ZERO, Rational, pow2_neg, parse_rational
from .streams import AdversarySuite, ApproxStream, EngineView, StreamError
from .trace import CheckResult, TraceEvent, VerificationReport, fmt

SuiteOrFactory = Union[AdversarySuite, Callable[["ExpansionEngine"], AdversarySuite]]


@dataclass
class ExpansionConfig:
    alpha: ApproxStream
    eta: ApproxStream
    suite: SuiteOrFactory
    stages: int

    def __post_init__(self):
        if self.stages < 0:
            raise ValueError(f"stage budget must be >= 0, got {self.stages}")


class ExpansionEngine:
    """One run of the construction; single-threaded, deterministic."""

    def __init__(self, config: ExpansionConfig):
        self.config = config
        self.alpha = config.alpha
        self.eta = config.eta
        self.suite = config.suite(self) if callable(config.suite) else config.suite
        self.s = 0
        self.c: dict[int, int] = {}
        self.d: dict[int, int] = {}
        self.beta_i: dict[int, Rational] = {}
        self.exp_stages_l: dict[int, list[int]] = {}
        self.exp_stages_r: dict[int, list[int]] = {}
        self.beta = ZERO
        self.alpha_hist: list[Rational] = []
        self.eta_hist: list[Rational] = []
        self.beta_hist: list[Rational] = []
        self.events: list[TraceEvent] = []
        self._logged_q: dict[int, Rational] = {}

        a0 = self._guarded(self.alpha, 0, "alpha")
        e0 = self._guarded(self.eta, 0, "eta")
        self.alpha_hist.append(a0)
        self.eta_hist.append(e0)
        self.beta_hist.append(ZERO)
        self._log(0, "alpha", None, None, fmt(a0))
        self._log(0, "eta", None, None, fmt(e0))
        self._log(0, "beta", None, None, fmt(ZERO))

    # -- read-only view for adaptive adversaries -------------------------

    @property
    def stage(self) -> int:
        return self.s

    def difference(self, s: int) -> Rational:
        return self.alpha_hist[s] - self.beta_hist[s]

    # -- parameter accessors (inert indices have the uniform defaults) ---

    def c_of(self, i: int) -> int:
        return self.c.get(i, 0)

    def d_of(self, i: int) -> int:
        return self.d.get(i, 0)

    def beta_i_of(self, i: int) -> Rational:
        return self.beta_i.get(i, ZERO)

    def last_exp_of(self, i: int) -> int:
        stages = self.exp_stages_l.get(i)
        return stages[-1] if stages else 0

    def q_of(self, i: int) -> Rational:
        """q_i at the current stage: 1/2 for i = 0, else the least
        2^-(i + d_j + 1) over j < i."""
        if i == 0:
            return Rational(1, 2)
        max_d = max((dj for j, dj in self.d.items() if j < i), default=0)
        return pow2_neg(i + max_d + 1)

    # -- expansionary predicates (for completed stages) -------------------

    def is_l_expansionary(self, i: int, s_next: int) -> bool:
        """Was stage s_next L_i-expansionary?  Valid for s_next <= current
        stage; recomputed from history with the pre-update-total convention."""
        return self._expansionary_at(i, s_next, side="L")

    def is_r_expansionary(self, i: int, s_next: int) -> bool:
        return self._expansionary_at(i, s_next, side="R")

    def _expansionary_at(self, i: int, s_next: int, side: str) -> bool:
        if not (1 <= s_next <= self.s) or i > s_next - 1:
            raise ValueError(f"stage {s_next} not in this run or index {i} too large")
        stream = self.suite.gamma(i) if side == "L" else self.suite.delta(i)
        if stream is None:
            return False
        bumps = (self.exp_stages_l if side == "L" else self.exp_stages_r).get(i, [])
        counter = sum(1 for t in bumps if t <= s_next - 1)
        gap = abs(self.alpha_hist[s_next] - self.beta_hist[s_next - 1] - stream.value(s_next))
        return gap < pow2_neg(counter)

    # -- the stage function ----------------------------------------------

    def step(self) -> None:
        s1 = self.s + 1
        if s1 > self.config.stages:
            raise ValueError(f"stage budget {self.config.stages} exhausted")
        a_new = self._guarded(self.alpha, s1, "alpha")
        e_new = self._guarded(self.eta, s1, "eta")
        self._log(s1, "alpha", None, fmt(self.alpha_hist[-1]), fmt(a_new))
        self._log(s1, "eta", None, fmt(self.eta_hist[-1]), fmt(e_new))

        entry_total = self.beta  # B: the sum of contributions as the stage begins

        participating_r = [i for i in self.suite.delta_indices if i <= self.s]
        participating_l = [i for i in self.suite.gamma_indices if i <= self.s]
        for i in participating_r:
            v = self.suite.delta(i).value(s1)
            self._log(s1, "delta", i, None, fmt(v))
        for i in participating_l:
            v = self.suite.gamma(i).value(s1)
            self._log(s1, "gamma", i, None, fmt(v))

        for i in participating_r:
            gap = abs(a_new - entry_total - self.suite.delta(i).value(s1))
            if gap < pow2_neg(self.d_of(i)):
                old = self.d_of(i)
                self.d[i] = old + 1
                self.exp_stages_r.setdefault(i, []).append(s1)
                self._log(s1, "d", i, str(old), str(old + 1))

        for i in self.suite.gamma_indices:
            if i > s1:
                continue
            q_now = self.q_of(i)
            if self._logged_q.get(i) != q_now:
                old = self._logged_q.get(i)
                self._log(s1, "q", i, fmt(old) if old is not None else None, fmt(q_now))
                self._logged_q[i] = q_now

        for i in participating_l:
            gap = abs(a_new - entry_total - self.suite.gamma(i).value(s1))
            if gap < pow2_neg(self.c_of(i)):
                t = self.last_exp_of(i)
                increment = self.q_of(i) * (e_new - self.eta_hist[t])
                old_c = self.c_of(i)
                old_b = self.beta_i_of(i)
                self.c[i] = old_c + 1
                self.beta_i[i] = old_b + increment
                self.exp_stages_l.setdefault(i, []).append(s1)
                self._log(s1, "c", i, str(old_c), str(old_c + 1))
                self._log(s1, "beta_i", i, fmt(old_b), fmt(self.beta_i[i]))

        old_beta = self.beta
        self.beta = sum(self.beta_i.values(), start=ZERO)
        self._log(s1, "beta", None, fmt(old_beta), fmt(self.beta))
        self.alpha_hist.append(a_new)
        self.eta_hist.append(e_new)
        self.beta_hist.append(self.beta)
        self.s = s1

    def run(self) -> None:
        while self.s < self.config.stages:
            self.step()

    # -- helpers -----------------------------------------------------------

    def _guarded(self, stream: ApproxStream, s: int, name: str) -> Rational:
        v = stream.value(s)
        if not (ZERO <= v < ONE):
            raise StreamError(f"{name} value {v} at stage {s} not in [0,1)")
        return v

    def _log(self, stage, kind, req, old, new) -> None:
        self.events.append(TraceEvent(stage, kind, req, old, new))

    def snapshot(self) -> dict:
        return {
            "engine": "lemma2",
            "stage": self.s,
            "alpha": fmt(self.alpha_hist[-1]),
            "eta": fmt(self.eta_hist[-1]),
            "beta": fmt(self.beta),
            "c": {str(i): v for i, v in sorted(self.c.items())},
            "d": {str(i): v for i, v in sorted(self.d.items())},
            "q": {str(i): fmt(q) for i, q in sorted(self._logged_q.items())},
            "beta_i": {str(i): fmt(v) for i, v in sorted(self.beta_i.items())},
            "last_exp": {str(i): v[-1] for i, v in sorted(self.exp_stages_l.items())},
        }


def run_expansion(config: ExpansionConfig) -> ExpansionEngine:
    engine = ExpansionEngine(config)
    engine.run()
    return engine


def replay_expansion(events: list[TraceEvent]) -> dict:
    """Fold a trace back into a final-state snapshot (no generators re-run)."""
    c: dict[int, int] = {}
    d: dict[int, int] = {}
    q: dict[int, str] = {}
    beta_i: dict[int, str] = {}
    last_exp: dict[int, int] = {}
    alpha = eta = beta = "0/1"
    stage = 0
    for ev in events:
        stage = max(stage, ev.stage)
        if ev.kind == "alpha":
            alpha = ev.new
        elif ev.kind == "eta":
            eta = ev.new
        elif ev.kind == "beta":
            beta = ev.new
        elif ev.kind == "c":
            c[ev.requirement] = ev.new_int()
            last_exp[ev.requirement] = ev.stage
        elif ev.kind == "d":
            d[ev.requirement] = ev.new_int()
        elif ev.kind == "q":
            q[ev.requirement] = ev.new
        elif ev.kind == "beta_i":
            beta_i[ev.requirement] = ev.new
    return {
        "engine": "lemma2",
        "stage": stage,
        "alpha": alpha,
        "eta": eta,
        "beta": beta,
        "c": {str(i): v for i, v in sorted(c.items())},
        "d": {str(i): v for i, v in sorted(d.items())},
        "q": {str(i): v for i, v in sorted(q.items())},
        "beta_i": {str(i): v for i, v in sorted(beta_i.items())},
        "last_exp": {str(i): v for i, v in sorted(last_exp.items())},
    }


def _stage_table(events: list[TraceEvent], kind: str) -> dict[int, Rational]:
    return {ev.stage: ev.new_rational() for ev in events if ev.kind == kind}


def verify_expansion(events: list[TraceEvent], final: dict) -> VerificationReport:
    """Exact invariant checks over a completed run, from its trace alone.

    V1 total below one; V2 per-index contribution cap; V3 restraint bound on
    lower-priority growth; V4 pacing along expansionary stages; V5
    stabilization statistics.  The pacing comparison is >= (the construction
    yields equality whenever a single requirement carries the whole
    increment between consecutive expansionary stages).
    """
    report = VerificationReport()
    T = final["stage"]
    alpha_by = _stage_table(events, "alpha")
    eta_by = _stage_table(events, "eta")
    beta_by = _stage_table(events, "beta")
    c_bumps: dict[int, list[int]] = {}
    d_bumps: dict[int, list[int]] = {}
    incr_by_stage: dict[int, dict[int, Rational]] = {}
    for ev in events:
        if ev.kind == "c":
            c_bumps.setdefault(ev.requirement, []).append(ev.stage)
        elif ev.kind == "d":
            d_bumps.setdefault(ev.requirement, []).append(ev.stage)
        elif ev.kind == "beta_i":
            inc = ev.new_rational() - parse_rational(ev.old)
            incr_by_stage.setdefault(ev.stage, {})[ev.requirement] = inc

    def d_at(j: int, t: int) -> int:
        return sum(1 for b in d_bumps.get(j, ()) if b <= t)

    def q_at(i: int, t: int) -> Rational:
        if i == 0:
            return Rational(1, 2)
        max_d = max((d_at(j, t) for j in d_bumps if j < i), default=0)
        return pow2_neg(i + max_d + 1)

    v1 = report.check("V1 total below one")
    beta_T = parse_rational(final["beta"])
    if not beta_T < ONE:
        v1.fail(f"beta_T = {beta_T} >= 1")

    v2 = report.check("V2 contribution cap 2^-(i+1) * eta")
    eta_T = eta_by[T]
    for key, text in final["beta_i"].items():
        i = int(key)
        contribution = parse_rational(text)
        if not contribution <= pow2_neg(i + 1) * eta_T:
            v2.fail(f"beta_{i} = {contribution} > 2^-{i + 1} * eta_T")

    v3 = report.check("V3 restraint bound on lower-priority growth")
    relevant = sorted(set(d_bumps) | {j for incs in incr_by_stage.values() for j in incs})
    for stage, incs in sorted(incr_by_stage.items()):
        for j in relevant:
            total = sum((inc for i, inc in incs.items() if i > j), start=ZERO)
            if total > pow2_neg(d_at(j, stage)):
                v3.fail(
                    f"stage {stage}: growth below priority {j} is {total} "
                    f"> 2^-{d_at(j, stage)}"
                )

    v4 = report.check("V4 pacing along expansionary stages")
    for i, stages in sorted(c_bumps.items()):
        for t1, t2 in zip(stages, stages[1:]):
            lhs = beta_by[t2] - beta_by[t1]
            rhs = q_at(i, t2) * (eta_by[t2] - eta_by[t1])
            if not lhs >= rhs:
                v4.fail(f"req {i}, stages {t1}->{t2}: {lhs} < {rhs}")

    v5 = report.check("V5 stabilization statistics")
    for i in sorted(set(c_bumps) | set(d_bumps)):
        last_c = c_bumps.get(i, [None])[-1]
        last_d = d_bumps.get(i, [None])[-1]
        report.stats[f"req {i} last c change"] = last_c
        report.stats[f"req {i} last d change"] = last_d
    report.stats["stages"] = T
    return report
