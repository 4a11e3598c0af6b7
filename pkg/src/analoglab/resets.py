"""Recursively enumerable ground truth: register machines, enumerations, waiting times.

Two interchangeable sources of an r.e. set are provided:

* machine mode -- the halting set of a family of 2-register Minsky machines,
  enumerated by deterministic dovetailing;
* synthetic mode -- a scripted schedule of ``(j, nu(j))`` pairs, used by the
  experiments because every waiting time is known in advance.

Every search takes an explicit budget.  Nothing here ever concludes that
``j`` is *not* in the set; a failed search returns ``None`` ("not found
within budget").
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

__all__ = [
    "ArityMismatch",
    "AssemblyError",
    "BudgetExhausted",
    "Djz",
    "Halt",
    "HaltEvent",
    "Inc",
    "InputFamily",
    "MachineEnumerator",
    "MachineState",
    "ProgramFamily",
    "RegisterMachine",
    "ResetsError",
    "ScheduleError",
    "ScheduleExhausted",
    "SyntheticSchedule",
    "SyntheticVerifier",
    "WaitingTimeTable",
    "dovetail",
    "load_machine",
    "load_schedule",
    "nu_dio",
    "parse_assembly",
    "parse_schedule",
]


class ResetsError(Exception):
    pass


class ScheduleExhausted(ResetsError, IndexError):
    """Index beyond the scripted length of a synthetic schedule."""


class BudgetExhausted(ResetsError, IndexError):
    """Machine-mode enumeration ran out of dovetailing stages."""


class ScheduleError(ResetsError, ValueError):
    pass


class AssemblyError(ResetsError, ValueError):
    pass


class ArityMismatch(ValueError):
    pass


################################################################################
# Register machines


@dataclass(frozen=True)
class Inc:
    register: int


@dataclass(frozen=True)
class Djz:
    """Jump to ``target`` if the register is zero, otherwise decrement it."""

    register: int
    target: int


@dataclass(frozen=True)
class Halt:
    pass


Instruction = Union[Inc, Djz, Halt]


@dataclass(frozen=True)
class RegisterMachine:
    """A Minsky machine.  Label ``len(instructions)`` is the end label.

    Execution stops on ``HALT`` (one step) or on reaching the end label
    (no extra step).
    """

    instructions: tuple[Instruction, ...]
    register_count: int = 2

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))
        if self.register_count < 1:
            raise AssemblyError("register_count must be >= 1")
        end = len(self.instructions)
        for label, ins in enumerate(self.instructions):
            if isinstance(ins, Halt):
                continue
            if not 0 <= ins.register < self.register_count:
                raise AssemblyError(f"instruction {label}: register {ins.register} out of range")
            if isinstance(ins, Djz) and not 0 <= ins.target <= end:
                raise AssemblyError(f"instruction {label}: jump target {ins.target} out of range")

    @property
    def end_label(self) -> int:
        return len(self.instructions)

    def start(self, registers: Sequence[int] = ()) -> MachineState:
        regs = list(registers) + [0] * (self.register_count - len(registers))
        if len(regs) != self.register_count or any(r < 0 for r in regs):
            raise ValueError("bad initial registers")
        return MachineState(self, regs)

    def run(self, registers: Sequence[int] = (), max_steps: int = 1000) -> MachineState:
        state = self.start(registers)
        state.advance(max_steps)
        return state

    def to_assembly(self) -> str:
        lines = []
        for ins in self.instructions:
            if isinstance(ins, Inc):
                lines.append(f"INC {ins.register}")
            elif isinstance(ins, Djz):
                target = "END" if ins.target == self.end_label else str(ins.target)
                lines.append(f"DJZ {ins.register} {target}")
            else:
                lines.append("HALT")
        return "\n".join(lines) + "\n"


@dataclass
class MachineState:
    machine: RegisterMachine
    registers: list[int]
    pc: int = 0
    steps: int = 0
    halted: bool = False

    def __post_init__(self):
        if self.pc == self.machine.end_label:
            self.halted = True

    def advance(self, until_steps: int) -> bool:
        """Run until ``steps == until_steps`` or halt; return ``halted``."""
        code = self.machine.instructions
        end = len(code)
        regs = self.registers
        pc, steps = self.pc, self.steps
        while not self.halted and steps < until_steps:
            ins = code[pc]
            steps += 1
            if isinstance(ins, Inc):
                regs[ins.register] += 1
                pc += 1
            elif isinstance(ins, Djz):
                if regs[ins.register] == 0:
                    pc = ins.target
                else:
                    regs[ins.register] -= 1
                    pc += 1
            else:
                self.halted = True
                break
            if pc == end:
                self.halted = True
        self.pc, self.steps = pc, steps
        return self.halted


_LINE = re.compile(r"^(?:(?P<label>[A-Za-z_]\w*)\s*:)?\s*(?P<body>.*)$")


def parse_assembly(text: str, register_count: int | None = None) -> RegisterMachine:
    """Parse the line-based assembly format.

    One instruction per line: ``INC r``, ``DJZ r label`` or ``HALT``.  A line
    may carry a ``name:`` prefix; jump labels are names, instruction indices
    or ``END``.  ``#`` starts a comment.  An optional ``.registers N``
    directive fixes the register count (default: 2, or more if used).
    """
    raw: list[tuple[int, list[str]]] = []
    labels: dict[str, int] = {}
    declared = register_count
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.lower().startswith(".registers"):
            parts = line.split()
            if len(parts) != 2 or not parts[1].isdigit():
                raise AssemblyError(f"line {lineno}: bad .registers directive")
            declared = int(parts[1])
            continue
        m = _LINE.match(line)
        label, body = m.group("label"), m.group("body").strip()
        if label:
            if label.upper() == "END" or label in labels:
                raise AssemblyError(f"line {lineno}: duplicate or reserved label {label!r}")
            labels[label] = len(raw)
        if not body:
            raise AssemblyError(f"line {lineno}: label without instruction")
        raw.append((lineno, body.split()))

    end = len(raw)
    code: list[Instruction] = []
    used = 0
    for lineno, tokens in raw:
        op = tokens[0].upper()
        try:
            if op == "HALT" and len(tokens) == 1:
                code.append(Halt())
                continue
            if op == "INC" and len(tokens) == 2:
                reg = int(tokens[1])
                code.append(Inc(reg))
            elif op == "DJZ" and len(tokens) == 3:
                reg, target = int(tokens[1]), tokens[2]
                if target.upper() == "END":
                    dest = end
                elif target.isdigit():
                    dest = int(target)
                elif target in labels:
                    dest = labels[target]
                else:
                    raise AssemblyError(f"line {lineno}: unknown label {target!r}")
                code.append(Djz(reg, dest))
            else:
                raise AssemblyError(f"line {lineno}: cannot parse {' '.join(tokens)!r}")
        except ValueError as exc:
            if isinstance(exc, AssemblyError):
                raise
            raise AssemblyError(f"line {lineno}: {exc}") from None
        used = max(used, reg + 1)
    if declared is None:
        declared = max(2, used)
    return RegisterMachine(tuple(code), declared)


def load_machine(path: str | Path) -> RegisterMachine:
    return parse_assembly(Path(path).read_text())


################################################################################
# Machine families and dovetailing


@dataclass(frozen=True)
class InputFamily:
    """Program ``p`` is a fixed machine started with ``p`` in one register."""

    machine: RegisterMachine
    input_register: int = 0

    def program(self, p: int) -> tuple[RegisterMachine, tuple[int, ...]]:
        regs = [0] * self.machine.register_count
        regs[self.input_register] = p
        return self.machine, tuple(regs)


@dataclass(frozen=True)
class ProgramFamily:
    """All machines over ``register_count`` registers, in a fixed bijective order.

    Programs are ordered by length, then by mixed-radix code over the
    instruction alphabet ``INC r | DJZ r t (0 <= t <= L) | HALT``.  Program
    ``p`` runs on input ``p`` (register 0), so the halting set is the
    diagonal set.
    """

    register_count: int = 2
    diagonal: bool = True

    def _alphabet(self, length: int) -> list[Instruction]:
        r = self.register_count
        alpha: list[Instruction] = [Inc(i) for i in range(r)]
        alpha += [Djz(i, t) for i in range(r) for t in range(length + 1)]
        alpha.append(Halt())
        return alpha

    def decode(self, p: int) -> RegisterMachine:
        if p < 0:
            raise ValueError("program index must be >= 0")
        length = 0
        while True:
            alpha = self._alphabet(length)
            count = len(alpha) ** length
            if p < count:
                break
            p -= count
            length += 1
        code = []
        for _ in range(length):
            p, digit = divmod(p, len(alpha))
            code.append(alpha[digit])
        return RegisterMachine(tuple(code), self.register_count)

    def program(self, p: int) -> tuple[RegisterMachine, tuple[int, ...]]:
        regs = [0] * self.register_count
        if self.diagonal:
            regs[0] = p
        return self.decode(p), tuple(regs)


MachineFamily = Union[InputFamily, ProgramFamily]


@dataclass(frozen=True)
class HaltEvent:
    stage: int
    program: int
    steps: int
    registers: tuple[int, ...]


def dovetail(family: MachineFamily, max_stage: int) -> Iterator[HaltEvent]:
    """Yield halting events, stage by stage.

    At stage ``s`` programs ``0..s`` have each been run for ``s`` steps in
    total.  Programs that halt are reported once, at the first stage at which
    they have halted, in increasing program order within a stage.
    """
    states: list[MachineState] = []
    done: list[bool] = []
    for s in range(max_stage + 1):
        machine, regs = family.program(s)
        states.append(machine.start(regs))
        done.append(False)
        for p in range(s + 1):
            if done[p]:
                continue
            st = states[p]
            if st.advance(s):
                done[p] = True
                yield HaltEvent(s, p, st.steps, tuple(st.registers))


################################################################################
# Enumerations


class Enumerator:
    """Repetition-free enumeration ``n -> a(n)`` of an r.e. set."""

    def nth(self, n: int) -> int:
        raise NotImplementedError

    def prefix(self, count: int) -> list[int]:
        """``a(0..count-1)``, stopping early if the enumeration runs out."""
        out = []
        for n in range(count):
            try:
                out.append(self.nth(n))
            except (ScheduleExhausted, BudgetExhausted):
                break
        return out


@dataclass(frozen=True)
class SyntheticSchedule(Enumerator):
    """A scripted enumeration with ``a(nu) == j`` for each ``(j, nu)`` pair.

    Indices up to the largest scripted ``nu`` that carry no scripted value
    emit filler elements ``filler_base + n``; fillers sit above every
    scripted ``j`` so they never alias a question ``j < J`` as long as
    ``J <= filler_base``.
    """

    pairs: tuple[tuple[int, int], ...]
    filler_base: int | None = None
    _by_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pairs = tuple(sorted((int(j), int(nu)) for j, nu in self.pairs))
        object.__setattr__(self, "pairs", pairs)
        js = [j for j, _ in pairs]
        nus = [nu for _, nu in pairs]
        if any(v < 0 for v in js + nus):
            raise ScheduleError("schedule entries must be natural numbers")
        if len(set(js)) != len(js):
            raise ScheduleError("an element is scheduled twice")
        if len(set(nus)) != len(nus):
            raise ScheduleError("two elements share a waiting time")
        base = self.filler_base
        if base is None:
            base = max(js) + 1 if js else 0
        elif js and base <= max(js):
            raise ScheduleError("filler_base must exceed every scheduled element")
        object.__setattr__(self, "filler_base", base)
        object.__setattr__(self, "_by_index", {nu: j for j, nu in pairs})

    @classmethod
    def from_waiting_times(cls, waits: Mapping[int, int], filler_base: int | None = None):
        return cls(tuple(waits.items()), filler_base)

    @property
    def length(self) -> int:
        return max(self._by_index) + 1 if self._by_index else 0

    @property
    def members(self) -> frozenset[int]:
        return frozenset(j for j, _ in self.pairs)

    def waiting_time(self, j: int) -> int | None:
        for jj, nu in self.pairs:
            if jj == j:
                return nu
        return None

    def nth(self, n: int) -> int:
        if n < 0:
            raise ValueError("index must be >= 0")
        if n >= self.length:
            raise ScheduleExhausted(f"index {n} beyond scripted length {self.length}")
        return self._by_index.get(n, self.filler_base + n)

    def beta(self, J: int) -> int:
        return max((nu for j, nu in self.pairs if j < J), default=0)

    def to_text(self) -> str:
        lines = ["# j nu(j)"] + [f"{j} {nu}" for j, nu in self.pairs]
        return "\n".join(lines) + "\n"


def parse_schedule(text: str, filler_base: int | None = None) -> SyntheticSchedule:
    """Parse ``j nu(j)`` lines (decimal, ``#`` comments)."""
    pairs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise ScheduleError(f"line {lineno}: expected 'j nu', got {line!r}")
        pairs.append((int(parts[0]), int(parts[1])))
    return SyntheticSchedule(tuple(pairs), filler_base)


def load_schedule(path: str | Path, filler_base: int | None = None) -> SyntheticSchedule:
    return parse_schedule(Path(path).read_text(), filler_base)


class MachineEnumerator(Enumerator):
    """The halting set of a machine family, in dovetailing order.

    The emitted prefix is cached; extending it is not thread-safe.
    """

    def __init__(self, family: MachineFamily, max_stage: int):
        self.family = family
        self.max_stage = max_stage
        self._events = dovetail(family, max_stage)
        self._emitted: list[HaltEvent] = []
        self._dry = False

    @property
    def events(self) -> list[HaltEvent]:
        return list(self._emitted)

    def nth(self, n: int) -> int:
        if n < 0:
            raise ValueError("index must be >= 0")
        while len(self._emitted) <= n and not self._dry:
            try:
                self._emitted.append(next(self._events))
            except StopIteration:
                self._dry = True
        if n >= len(self._emitted):
            raise BudgetExhausted(f"index {n} not reached within {self.max_stage} stages")
        return self._emitted[n].program

    def to_schedule(self, count: int) -> SyntheticSchedule:
        """Script the first ``count`` outputs as a synthetic schedule."""
        values = self.prefix(count)
        return SyntheticSchedule(tuple((j, n) for n, j in enumerate(values)))


################################################################################
# Waiting times


class WaitingTimeTable:
    """``nu(j)`` and ``beta(J)`` for an enumeration, searched to ``budget`` indices."""

    def __init__(self, enumerator: Enumerator, budget: int):
        if budget < 0:
            raise ValueError("budget must be >= 0")
        self.enumerator = enumerator
        self.budget = budget
        self._index: dict[int, int] | None = None

    def _lookup(self) -> dict[int, int]:
        if self._index is None:
            self._index = {j: n for n, j in enumerate(self.enumerator.prefix(self.budget))}
        return self._index

    def nu(self, j: int) -> int | None:
        """Least ``n < budget`` with ``a(n) == j``; ``None`` if not found."""
        return self._lookup().get(j)

    def beta(self, J: int) -> int:
        """Largest found waiting time among ``j < J`` (0 when there is none)."""
        return max((n for n in (self.nu(j) for j in range(J)) if n is not None), default=0)

    def rows_consulted(self) -> int:
        return len(self.enumerator.prefix(self.budget))


################################################################################
# Diophantine-style verifier


class DiophantineVerifier:
    """Total map ``(j, m_1..m_k) -> natural``, zero exactly at witnesses."""

    arity: int

    def evaluate(self, j: int, m: Sequence[int]) -> int:
        raise NotImplementedError

    def __call__(self, j: int, m: Sequence[int]) -> int:
        return self.evaluate(j, m)

    def evaluate_grid(self, j: int, m: np.ndarray) -> np.ndarray:
        """Evaluate on integer points stacked along the last axis."""
        m = np.asarray(m, dtype=np.int64)
        if m.shape[-1] != self.arity:
            raise ArityMismatch(f"expected {self.arity} coordinates, got {m.shape[-1]}")
        flat = m.reshape(-1, self.arity)
        out = np.fromiter((self.evaluate(j, tuple(row)) for row in flat), dtype=np.int64, count=len(flat))
        return out.reshape(m.shape[:-1])


@dataclass(frozen=True)
class SyntheticVerifier(DiophantineVerifier):
    """Verifier for a scripted set with one witness vector per member.

    ``evaluate(j, m) == 0`` iff ``m`` is the witness of ``j``; otherwise it is
    ``1 + |m_1 - w_1| + sum_{i>1} |m_i - w_i|``, so moving the first
    coordinate of a witness by one never gives another zero.  Non-members
    get ``1 + sum(m)``.
    """

    witnesses: Mapping[int, tuple[int, ...]]
    arity: int = 1

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError("arity must be >= 1")
        fixed = {}
        for j, w in dict(self.witnesses).items():
            w = tuple(int(v) for v in w)
            if len(w) != self.arity or any(v < 0 for v in w):
                raise ArityMismatch(f"witness for {j} must be {self.arity} naturals")
            fixed[int(j)] = w
        object.__setattr__(self, "witnesses", fixed)

    @classmethod
    def from_schedule(cls, schedule: SyntheticSchedule, arity: int = 1) -> SyntheticVerifier:
        """Witness of ``j`` is ``(nu(j), 0, ..., 0)``.

        The first coordinate encodes the enumeration trace up to the point
        where ``j`` appears, coded by its length ``nu(j)``.
        """
        return cls({j: (nu,) + (0,) * (arity - 1) for j, nu in schedule.pairs}, arity)

    def evaluate(self, j: int, m: Sequence[int]) -> int:
        if len(m) != self.arity:
            raise ArityMismatch(f"expected {self.arity} coordinates, got {len(m)}")
        w = self.witnesses.get(j)
        if w is None:
            return 1 + sum(int(v) for v in m)
        dist = abs(int(m[0]) - w[0]) + sum(abs(int(a) - b) for a, b in zip(m[1:], w[1:]))
        return 0 if dist == 0 else 1 + dist

    def evaluate_grid(self, j: int, m: np.ndarray) -> np.ndarray:
        m = np.asarray(m, dtype=np.int64)
        if m.shape[-1] != self.arity:
            raise ArityMismatch(f"expected {self.arity} coordinates, got {m.shape[-1]}")
        w = self.witnesses.get(j)
        if w is None:
            return 1 + m.sum(axis=-1)
        dist = np.abs(m - np.asarray(w)).sum(axis=-1)
        return np.where(dist == 0, 0, 1 + dist)


def nu_dio(verifier: DiophantineVerifier, j: int, budget: int) -> int | None:
    """Least ``n <= budget`` such that some ``m`` with all ``m_i < n`` is a zero."""
    k = verifier.arity
    for n in range(1, budget + 1):
        # only the new shell max(m) == n - 1 needs checking
        for m in itertools.product(range(n), repeat=k):
            if max(m) == n - 1 and verifier.evaluate(j, m) == 0:
                return n
    return None


def witness_zeros(verifier: DiophantineVerifier, j: int, bound: int) -> Iterable[tuple[int, ...]]:
    """All zeros of ``verifier`` for ``j`` with every coordinate below ``bound``."""
    for m in itertools.product(range(bound), repeat=verifier.arity):
        if verifier.evaluate(j, m) == 0:
            yield m
