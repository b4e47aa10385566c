"""Monotone rational approximation streams and adversary suites.

An increasing stream is the computational stand-in for a left-c.e. real,
a decreasing one for a right-c.e. real.  Streams are materialized stage by
stage; the direction invariant and (optionally) membership in the open unit
interval are asserted on every new value, never assumed.

Generators are pure functions of (stage, materialized prefix, declared
engine view) so that every run is bit-exact reproducible.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Optional, Protocol, Sequence

from .rationals import ONE, ZERO, Rational

log = logging.getLogger(__name__)


class Direction(Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"


class StreamError(Exception):
    """Base class for stream faults."""


class MonotonicityViolation(StreamError):
    """A generator produced a value that breaks the direction invariant."""


class OutOfUnitInterval(StreamError):
    """A unit-interval stream produced a value outside (0, 1)."""


# Generator signature: (stage, materialized prefix) -> value at that stage.
Generator = Callable[[int, Sequence[Rational]], Rational]


class ApproxStream:
    """A monotone computable sequence of rationals, cached per stage.

    Re-querying a stage always returns the identical Rational.  Advancing
    past the next unmaterialized stage is a precondition error.
    """

    def __init__(
        self,
        direction: Direction,
        generator: Generator,
        unit_interval: bool = True,
        label: str = "",
    ):
        self.direction = direction
        self.generator = generator
        self.unit_interval = unit_interval
        self.label = label
        self._prefix: list[Rational] = []
        self.faults: list[str] = []

    def __repr__(self) -> str:
        return f"ApproxStream({self.direction.value}, {self.label!r}, |prefix|={len(self._prefix)})"

    @property
    def materialized(self) -> int:
        """Number of stages materialized so far."""
        return len(self._prefix)

    def prefix(self) -> tuple[Rational, ...]:
        return tuple(self._prefix)

    def value(self, s: int) -> Rational:
        """Value at stage s, materializing all earlier stages as needed."""
        if s < 0:
            raise ValueError(f"negative stage {s}")
        while len(self._prefix) <= s:
            self._materialize_next()
        return self._prefix[s]

    def advance(self, s: int) -> Rational:
        """Materialize and return value(s); stages < s must exist already."""
        if s > len(self._prefix):
            raise StreamError(
                f"{self.label or 'stream'}: advance({s}) with only "
                f"{len(self._prefix)} stages materialized"
            )
        return self.value(s)

    def record_fault(self, message: str) -> None:
        self.faults.append(message)
        log.debug("stream %s fault: %s", self.label, message)

    def _materialize_next(self) -> None:
        s = len(self._prefix)
        v = self.generator(s, self._prefix)
        if not isinstance(v, Fraction):
            raise TypeError(f"{self.label}: generator returned {type(v).__name__}")
        if self._prefix:
            prev = self._prefix[-1]
            if self.direction is Direction.INCREASING and v < prev:
                raise MonotonicityViolation(
                    f"{self.label}: value({s}) = {v} < value({s - 1}) = {prev}"
                )
            if self.direction is Direction.DECREASING and v > prev:
                raise MonotonicityViolation(
                    f"{self.label}: value({s}) = {v} > value({s - 1}) = {prev}"
                )
        if self.unit_interval and not (ZERO < v < ONE):
            raise OutOfUnitInterval(f"{self.label}: value({s}) = {v} not in (0,1)")
        self._prefix.append(v)


def advance(stream: ApproxStream, s: int) -> Rational:
    """Module-level alias for ApproxStream.advance."""
    return stream.advance(s)


class EngineView(Protocol):
    """Read-only handle a running engine exposes to adaptive adversaries."""

    @property
    def stage(self) -> int: ...

    def difference(self, s: int) -> Rational:
        """alpha_s - beta_s for a completed stage s."""
        ...


def make_constant_target(
    limit: Rational,
    direction: Direction,
    rate: Rational,
    label: str = "",
) -> ApproxStream:
    """Geometric approach to `limit` from inside the unit interval.

    Increasing: value(s) = limit * (1 - rate**(s+1));
    decreasing: value(s) = limit + (1 - limit) * rate**(s+1).
    Both stay in (0,1) and converge to limit.
    """
    if not (ZERO < limit < ONE):
        raise ValueError(f"limit {limit} not in (0,1)")
    if not (ZERO < rate < ONE):
        raise ValueError(f"rate {rate} not in (0,1)")

    if direction is Direction.INCREASING:

        def gen(s: int, _prefix: Sequence[Rational]) -> Rational:
            return limit - limit * rate ** (s + 1)

    else:

        def gen(s: int, _prefix: Sequence[Rational]) -> Rational:
            return limit + (ONE - limit) * rate ** (s + 1)

    return ApproxStream(
        direction,
        gen,
        unit_interval=True,
        label=label or f"target({limit},{direction.value},{rate})",
    )


def make_tracker(
    engine_view: EngineView,
    direction: Direction,
    lag: int,
    start: Rational,
    label: str = "",
) -> ApproxStream:
    """Adaptive adversary chasing the engine's running alpha - beta.

    The value at stage s+1 moves toward the engine's difference at stage
    s - lag, clamped so that monotonicity and the (0,1) bound are never
    violated; when the raw target would break monotonicity the stream holds
    its previous value and records a fault.
    """
    if lag < 0:
        raise ValueError(f"negative lag {lag}")
    if not (ZERO < start < ONE):
        raise ValueError(f"start {start} not in (0,1)")

    stream_box: list[ApproxStream] = []

    def gen(s: int, prefix: Sequence[Rational]) -> Rational:
        if s == 0:
            return start
        prev = prefix[-1]
        t = s - 1 - lag
        if t < 0:
            return prev
        raw = engine_view.difference(t)
        if direction is Direction.INCREASING:
            if raw <= prev:
                if raw < prev:
                    stream_box[0].record_fault(
                        f"stage {s}: target {raw} below increasing tracker {prev}; holding"
                    )
                return prev
            if raw >= ONE:
                return (prev + ONE) / 2
            return raw
        else:
            if raw >= prev:
                if raw > prev:
                    stream_box[0].record_fault(
                        f"stage {s}: target {raw} above decreasing tracker {prev}; holding"
                    )
                return prev
            if raw <= ZERO:
                return prev / 2
            return raw

    stream = ApproxStream(
        direction,
        gen,
        unit_interval=True,
        label=label or f"tracker(lag={lag},{direction.value})",
    )
    stream_box.append(stream)
    return stream


def constant_stream(value: Rational, direction: Direction = Direction.INCREASING,
                    label: str = "") -> ApproxStream:
    """A stream that is constant at `value` (not unit-interval flagged)."""
    return ApproxStream(
        direction,
        lambda s, _p: value,
        unit_interval=False,
        label=label or f"const({value})",
    )


@dataclass(frozen=True)
class SuiteEntry:
    """One adversary: role "L" plays an increasing stream against requirement
    L_i, role "R" plays a decreasing stream against R_i."""

    index: int
    role: str  # "L" or "R"
    stream: ApproxStream
    provenance: str = ""

    def __post_init__(self):
        if self.role not in ("L", "R"):
            raise ValueError(f"role must be 'L' or 'R', got {self.role!r}")
        if self.index < 0:
            raise ValueError(f"negative index {self.index}")
        want = Direction.INCREASING if self.role == "L" else Direction.DECREASING
        if self.stream.direction is not want:
            raise ValueError(
                f"entry {self.index}/{self.role}: stream direction "
                f"{self.stream.direction.value}, expected {want.value}"
            )


class AdversarySuite:
    """Indexed families of adversary streams; index i in the suite is
    requirement index i in an engine run."""

    def __init__(self, entries: Iterable[SuiteEntry]):
        self.entries = tuple(entries)
        self._gamma: dict[int, SuiteEntry] = {}
        self._delta: dict[int, SuiteEntry] = {}
        for e in self.entries:
            table = self._gamma if e.role == "L" else self._delta
            if e.index in table:
                raise ValueError(f"duplicate {e.role} entry at index {e.index}")
            table[e.index] = e

    def __len__(self) -> int:
        return len(self.entries)

    def gamma(self, i: int) -> Optional[ApproxStream]:
        e = self._gamma.get(i)
        return e.stream if e else None

    def delta(self, i: int) -> Optional[ApproxStream]:
        e = self._delta.get(i)
        return e.stream if e else None

    @property
    def gamma_indices(self) -> tuple[int, ...]:
        return tuple(sorted(self._gamma))

    @property
    def delta_indices(self) -> tuple[int, ...]:
        return tuple(sorted(self._delta))

    @property
    def max_index(self) -> int:
        if not self.entries:
            return -1
        return max(e.index for e in self.entries)


EMPTY_SUITE = AdversarySuite(())
