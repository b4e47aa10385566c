"""A toy prefix-free bit machine and the dovetailed enumeration of its
halting probability.

The top-level machine dispatches "by adjunction": a finite prefix-free set of
codes sigma_e routes the program tail to sub-interpreter e, so running
sigma_e + tau on the top machine is the same computation as running tau on
sub-machine e.

A counter sub-machine reads its tail as a self-delimiting program: a unary
instruction count (k ones, then a zero) followed by exactly 3k body bits,
one 3-bit opcode per instruction, over three registers.  Self-delimitation
makes each sub-domain prefix-free by construction, hence the whole halting
domain too, and the Kraft sum of discovered halts stays below 1.

Nothing here is universal or random; the enumeration is a structurally
Omega-like increasing stream with exact dyadic values.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Optional

from .rationals import Rational, ZERO, ONE
from .streams import ApproxStream, Direction

# Micro-op vocabulary for counter sub-machines.  djzK decrements register K
# if positive, otherwise skips the next instruction; jmp resets the program
# counter to 0.  Running off the end of the body never halts.
MICRO_OPS = ("halt", "inc0", "inc1", "inc2", "djz0", "djz1", "djz2", "jmp", "nop")

HALTED = "halt"
RUNNING = "running"
INVALID = "invalid"


@dataclass(frozen=True)
class SubMachine:
    """One routed interpreter: either the trivial machine (domain = the empty
    tail, halting in one step) or a counter machine with its own 8-entry
    opcode table."""

    name: str
    opcodes: tuple[str, ...] = ()
    trivial: bool = False

    def __post_init__(self):
        if self.trivial:
            if self.opcodes:
                raise ValueError(f"sub {self.name}: trivial machines take no opcode table")
            return
        if len(self.opcodes) != 8:
            raise ValueError(f"sub {self.name}: opcode table must have 8 entries")
        for op in self.opcodes:
            if op not in MICRO_OPS:
                raise ValueError(f"sub {self.name}: unknown micro-op {op!r}")

    def decode(self, tail: str) -> Optional[list[int]]:
        """Parse a self-delimiting tail into a list of opcode numbers, or
        None if the tail is not exactly a valid program."""
        if self.trivial:
            return [] if tail == "" else None
        count = 0
        while count < len(tail) and tail[count] == "1":
            count += 1
        if count >= len(tail):  # no terminating zero
            return None
        body = tail[count + 1:]
        if len(body) != 3 * count:
            return None
        return [int(body[k:k + 3], 2) for k in range(0, len(body), 3)]

    def run(self, tail: str, budget: int) -> tuple[str, Optional[int]]:
        """Run the tail for at most `budget` steps.

        Returns (status, steps): ("halt", steps) on halting, ("running",
        None) if the budget ran out or the machine diverged structurally,
        ("invalid", None) if the tail is not a program.
        """
        program = self.decode(tail)
        if program is None:
            return (INVALID, None)
        if self.trivial:
            return (HALTED, 1) if budget >= 1 else (RUNNING, None)
        exec_state = ExecState(program)
        for _ in range(budget):
            status = exec_state.step(self.opcodes)
            if status == HALTED:
                return (HALTED, exec_state.steps)
            if status == INVALID:  # ran off the end: diverges
                return (RUNNING, None)
        return (RUNNING, None)


class ExecState:
    """Mutable execution state of one counter program."""

    __slots__ = ("program", "pc", "regs", "steps", "dead")

    def __init__(self, program: list[int]):
        self.program = program
        self.pc = 0
        self.regs = [0, 0, 0]
        self.steps = 0
        self.dead = False  # ran off the end; will never halt

    def step(self, opcodes: tuple[str, ...]) -> str:
        if self.dead or self.pc >= len(self.program):
            self.dead = True
            return INVALID
        op = opcodes[self.program[self.pc]]
        self.steps += 1
        if op == "halt":
            return HALTED
        if op == "nop":
            self.pc += 1
        elif op == "jmp":
            self.pc = 0
        elif op.startswith("inc"):
            self.regs[int(op[3])] += 1
            self.pc += 1
        else:  # djzK
            k = int(op[3])
            if self.regs[k] > 0:
                self.regs[k] -= 1
                self.pc += 1
            else:
                self.pc += 2
        return RUNNING


@dataclass(frozen=True)
class ToyMachine:
    """Dispatch table from prefix codes to sub-machines."""

    dispatch: tuple[tuple[str, SubMachine], ...]

    def __post_init__(self):
        codes = [code for code, _ in self.dispatch]
        for code in codes:
            if not code or any(b not in "01" for b in code):
                raise ValueError(f"bad dispatch code {code!r}")
        for a in codes:
            for b in codes:
                if a != b and b.startswith(a):
                    raise ValueError(f"dispatch codes not prefix-free: {a!r} < {b!r}")

    def route(self, program: str) -> Optional[tuple[SubMachine, str]]:
        for code, sub in self.dispatch:
            if program.startswith(code):
                return sub, program[len(code):]
        return None

    def run(self, program: str, budget: int) -> tuple[str, Optional[int]]:
        routed = self.route(program)
        if routed is None:
            return (INVALID, None)
        sub, tail = routed
        return sub.run(tail, budget)


class MachineDefinitionError(Exception):
    """The machine violates prefix-freeness over its enumerated halts."""


class OmegaEnumeration:
    """Dovetailed halting enumeration over all programs of length <= L.

    Stage s runs every program for bound(s) = s steps; omega(s) is the exact
    Kraft sum over halts discovered so far.  Simulation is incremental: each
    still-live program advances one step per stage.
    """

    def __init__(self, machine: ToyMachine, max_length: int):
        if max_length < 1:
            raise ValueError(f"max_length must be >= 1, got {max_length}")
        self.machine = machine
        self.max_length = max_length
        self.halted: dict[str, int] = {}  # program -> halting time
        self._omega_by_stage: list[Rational] = [ZERO]  # omega(0) = 0
        self._live: list[tuple[str, SubMachine, ExecState]] = []
        self._trivial_pending: list[tuple[str, SubMachine]] = []
        self._seed_pool()

    def _seed_pool(self) -> None:
        for length in range(1, self.max_length + 1):
            for bits in product("01", repeat=length):
                program = "".join(bits)
                routed = self.machine.route(program)
                if routed is None:
                    continue
                sub, tail = routed
                decoded = sub.decode(tail)
                if decoded is None:
                    continue
                if sub.trivial:
                    self._trivial_pending.append((program, sub))
                else:
                    self._live.append((program, sub, ExecState(decoded)))

    def advance_to(self, s: int) -> None:
        while len(self._omega_by_stage) <= s:
            self._advance_one()

    def _advance_one(self) -> None:
        # trivial programs halt in 1 step, discovered at the first stage
        for program, _sub in self._trivial_pending:
            self._record_halt(program)
        self._trivial_pending.clear()
        survivors = []
        for program, sub, exec_state in self._live:
            status = exec_state.step(sub.opcodes)
            if status == HALTED:
                self._record_halt(program)
            elif not exec_state.dead:
                survivors.append((program, sub, exec_state))
        self._live = survivors
        omega = sum(
            (Rational(1, 1 << len(p)) for p in self.halted), start=ZERO
        )
        if omega >= ONE:
            raise MachineDefinitionError(f"Kraft sum reached {omega}")
        self._omega_by_stage.append(omega)

    def _record_halt(self, program: str) -> None:
        for other in self.halted:
            if other.startswith(program) or program.startswith(other):
                raise MachineDefinitionError(
                    f"halting programs not prefix-free: {program!r} vs {other!r}"
                )
        self.halted[program] = len(self._omega_by_stage)

    def omega(self, s: int) -> Rational:
        self.advance_to(s)
        return self._omega_by_stage[s]


def enumerate_omega(machine: ToyMachine, max_length: int, s: int) -> Rational:
    """Kraft sum over halts of programs of length <= max_length discovered
    within s steps each."""
    return OmegaEnumeration(machine, max_length).omega(s)


def omega_stream(
    machine: ToyMachine,
    max_length: int,
    offset: Rational = ZERO,
    scale: Rational = ONE,
    label: str = "",
) -> ApproxStream:
    """Affine image offset + scale * omega_s as a monotone stream.

    Positive scale gives an increasing stream, negative a decreasing one.
    The stream is unit-interval flagged only when the affine image of [0,1)
    provably stays inside (0,1).
    """
    if scale == ZERO:
        raise ValueError("scale must be nonzero")
    enum = OmegaEnumeration(machine, max_length)
    direction = Direction.INCREASING if scale > ZERO else Direction.DECREASING
    lo, hi = sorted((offset, offset + scale))
    in_unit = ZERO < lo and hi <= ONE

    def gen(s: int, _prefix) -> Rational:
        return offset + scale * enum.omega(s)

    return ApproxStream(direction, gen, unit_interval=in_unit,
                        label=label or f"omega(L={max_length})")


def translate_omega(
    omega: ApproxStream,
    x: ApproxStream,
    horizon: int = 64,
    label: str = "",
) -> ApproxStream:
    """Pointwise sum of two increasing streams, the toy analogue of a
    translated halting probability; rejected if the sum reaches 1 at the
    given horizon."""
    for s, name in ((omega, "omega"), (x, "x")):
        if s.direction is not Direction.INCREASING:
            raise ValueError(f"{name} must be increasing")
    if omega.value(horizon) + x.value(horizon) >= ONE:
        raise ValueError(
            f"horizon sum {omega.value(horizon) + x.value(horizon)} >= 1"
        )
    return ApproxStream(
        Direction.INCREASING,
        lambda s, _p: omega.value(s) + x.value(s),
        unit_interval=False,
        label=label or f"translate({omega.label},{x.label})",
    )


def parse_machine(text: str) -> ToyMachine:
    """Parse the small line-based machine format::

        # comment
        sub counter halt inc0 inc1 inc2 djz0 djz1 jmp nop
        sub unit trivial
        dispatch 0 counter
        dispatch 10 unit

    Each counter sub names the micro-ops bound to opcodes 0..7.
    """
    subs: dict[str, SubMachine] = {}
    dispatch: list[tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] == "sub":
            if len(fields) < 3:
                raise ValueError(f"line {lineno}: sub needs a name and a body")
            name = fields[1]
            if name in subs:
                raise ValueError(f"line {lineno}: duplicate sub {name!r}")
            if fields[2:] == ["trivial"]:
                subs[name] = SubMachine(name, trivial=True)
            else:
                subs[name] = SubMachine(name, opcodes=tuple(fields[2:]))
        elif fields[0] == "dispatch":
            if len(fields) != 3:
                raise ValueError(f"line {lineno}: dispatch takes a code and a sub name")
            dispatch.append((fields[1], fields[2]))
        else:
            raise ValueError(f"line {lineno}: unknown directive {fields[0]!r}")
    entries = []
    for code, name in dispatch:
        if name not in subs:
            raise ValueError(f"dispatch references unknown sub {name!r}")
        entries.append((code, subs[name]))
    if not entries:
        raise ValueError("machine has no dispatch entries")
    return ToyMachine(tuple(entries))


STANDARD_TABLE = ("halt", "inc0", "inc1", "inc2", "djz0", "djz1", "jmp", "nop")
SHUFFLED_TABLE = ("nop", "inc0", "inc1", "djz0", "halt", "djz1", "jmp", "inc2")
HALTLESS_TABLE = ("nop", "inc0", "inc1", "inc2", "djz0", "djz1", "jmp", "nop")


def bundled_machines() -> dict[str, ToyMachine]:
    """The toy machines shipped with the package."""
    return {
        "pair": ToyMachine((
            ("0", SubMachine("counter_a", opcodes=STANDARD_TABLE)),
            ("10", SubMachine("counter_b", opcodes=SHUFFLED_TABLE)),
            ("110", SubMachine("unit", trivial=True)),
        )),
        "mini": ToyMachine((
            ("0", SubMachine("unit", trivial=True)),
            ("10", SubMachine("counter", opcodes=STANDARD_TABLE)),
        )),
        "silent": ToyMachine((
            ("0", SubMachine("spinner", opcodes=HALTLESS_TABLE)),
        )),
    }
