"""Switching-station labels that pick which CUs stay active at each level.

Stations are numbered from 1.  A hierarchy plan gives station ``i`` the number
of levels ``j`` with ``i = 1 (mod L**j)``; keeping stations whose label is at
least ``b`` leaves one CU every ``L**b`` stations.  A super-CU plan stores
``p - f(i)`` so that a dense 3-on/2-off pattern switches on as the level rises.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .codes import Circuit, Erase
from .core import CostModel
from .qsim import Gate


def R(x: int) -> int:
    return 1 if x == 1 else 0


def R_prime(x: int, k: int, L: int = 16, offsets: Sequence[int] = (0, 5, 10), width: int = 3) -> int:
    """1 when ``x`` falls in one of the data sub-blocks at scale ``k``."""
    unit = L ** (k - 1)
    return int(any(1 + r * unit <= x <= (r + width) * unit for r in offsets))


def label_bits_for(p: int) -> int:
    return max(1, math.ceil(math.log2(p + 1)))


@dataclass(frozen=True)
class LabelPlan:
    p: int
    L: int
    labels: tuple[int, ...]
    scheme: str = "hierarchy"
    label_bits: int = 0

    def __post_init__(self):
        if not self.label_bits:
            object.__setattr__(self, "label_bits", label_bits_for(self.p))
        if self.scheme == "hierarchy":
            if sum(1 for v in self.labels if v == self.p) != 1:
                raise ValueError("exactly one station must carry the reserved label p")
            if any(not 0 <= v <= self.p for v in self.labels):
                raise ValueError("hierarchy labels must lie in [0, p]")

    @property
    def num_ss(self) -> int:
        return len(self.labels)

    def label(self, i: int) -> int:
        """Label of station ``i`` (1-based)."""
        return self.labels[i - 1]

    def active(self, b: int) -> list[bool]:
        if self.scheme == "supercu":
            return [supercu_active(v, b) for v in self.labels]
        return [bool(active_at_level(v, b)) for v in self.labels]

    def active_stations(self, b: int) -> list[int]:
        return [i for i, on in enumerate(self.active(b), start=1) if on]


def hierarchy_labels(p: int, L: int, num_ss: int) -> LabelPlan:
    if p < 1 or L < 2 or num_ss < 1:
        raise ValueError("need p >= 1, L >= 2, num_ss >= 1")
    labels = [sum(R(i % L ** j) for j in range(1, p)) for i in range(1, num_ss + 1)]
    # station 1 would hold p-1; it becomes the single-CU station
    labels[0] = p
    return LabelPlan(p, L, tuple(labels))


def active_at_level(label: int, b: int) -> int:
    return int(label >= b)


def supercu_active(label: int, b: int) -> bool:
    # stored p - f(i); a station joins once the level reaches its label
    return label <= b


def supercu_labels(p: int, L: int = 16, num_ss: int | None = None,
                   offsets: Sequence[int] = (0, 5, 10), width: int = 3) -> LabelPlan:
    if p < 2:
        raise ValueError("super-CU labels need p >= 2")
    num_ss = num_ss or L ** (p - 1)
    labels = []
    for i in range(1, num_ss + 1):
        f = 0
        for j in range(1, p):
            if i <= L ** j and all(R_prime(i % L ** k, k, L, offsets, width) for k in range(1, j)):
                f += 1
        labels.append(p - f)
    return LabelPlan(p, L, tuple(labels), scheme="supercu")


@dataclass(frozen=True)
class CompositePlan:
    """Two label plans side by side in every station; queries pick one half."""

    a: LabelPlan
    b: LabelPlan

    def __post_init__(self):
        if self.a.num_ss != self.b.num_ss:
            raise ValueError(f"plans cover {self.a.num_ss} and {self.b.num_ss} stations")

    @property
    def num_ss(self) -> int:
        return self.a.num_ss

    @property
    def label_bits(self) -> int:
        return self.a.label_bits + self.b.label_bits

    @property
    def labels(self) -> tuple[tuple[int, int], ...]:
        return tuple(zip(self.a.labels, self.b.labels))

    def active(self, level: int, half: str = "a") -> list[bool]:
        if half not in ("a", "b"):
            raise ValueError("half must be 'a' or 'b'")
        return (self.a if half == "a" else self.b).active(level)


def composite_labels(plan_a: LabelPlan, plan_b: LabelPlan) -> CompositePlan:
    return CompositePlan(plan_a, plan_b)


@dataclass(frozen=True)
class ExplicitPlan:
    """Station ``i`` stores one bit per level: bit ``b`` switches it on at level ``b``."""

    p: int
    bits: tuple[tuple[int, ...], ...]

    @property
    def num_ss(self) -> int:
        return len(self.bits)

    @property
    def label_bits(self) -> int:
        return self.p

    def active(self, b: int) -> list[bool]:
        if not 0 <= b < self.p:
            raise ValueError(f"level must be in [0, {self.p - 1}]")
        return [bool(row[b]) for row in self.bits]


def explicit_per_level_labels(p: int, patterns: Sequence[Sequence[int]]) -> ExplicitPlan:
    """``patterns[b][i-1]`` says whether station ``i`` is on at level ``b``."""
    if len(patterns) != p:
        raise ValueError(f"need one pattern per level ({p}), got {len(patterns)}")
    lengths = {len(pat) for pat in patterns}
    if len(lengths) != 1:
        raise ValueError("all level patterns must cover the same stations")
    rows = tuple(tuple(int(bool(pat[i])) for pat in patterns) for i in range(lengths.pop()))
    return ExplicitPlan(p, rows)


# --- comparator ----------------------------------------------------------------

@dataclass(frozen=True)
class Step:
    """One reversible bit operation, optionally gated on a bit of ``b``.

    ``when`` is ``(x, v)``: the step is only sent when bit ``x`` of ``b``
    (most significant first) equals ``v``.  Pulses are global, so ``b`` is
    known to the controller and never stored in the station.
    """

    op: str
    target: str
    controls: tuple[str, ...] = ()
    polarities: tuple[int, ...] = ()
    when: tuple[int, int] | None = None


@dataclass(frozen=True)
class ComparatorProgram:
    p: int
    n_bits: int
    steps: tuple[Step, ...]
    ancillas: tuple[str, ...] = ("c0", "c1")

    @property
    def step_count(self) -> int:
        """Length of the longest sequence actually sent for some ``b``."""
        return max(len(self.steps_for(b)) for b in range(self.p + 1))

    def steps_for(self, b: int) -> list[Step]:
        if not 0 <= b <= self.p:
            raise ValueError(f"level b={b} outside [0, {self.p}]")
        bbits = _bits(b, self.n_bits)
        return [s for s in self.steps if s.when is None or bbits[s.when[0]] == s.when[1]]

    def registers(self) -> list[str]:
        return [f"a{x}" for x in range(self.n_bits)] + list(self.ancillas) + ["r"]


# constant c in step_count <= c * log2(p), p >= 2
COMPARATOR_STEP_CONSTANT = 10


def _bits(v: int, n: int) -> list[int]:
    return [v >> (n - 1 - x) & 1 for x in range(n)]


def comparator_program(p: int) -> ComparatorProgram:
    """MSB-first test ``label >= b`` using an equality flag held in two ancillas.

    The flag moves between ``c0`` and ``c1`` each bit; the stale copy is erased.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    n = label_bits_for(p)
    steps: list[Step] = [Step("X", "c0")]
    flag, spare = "c0", "c1"
    for x in range(n):
        a = f"a{x}"
        # b_x = 0: a_x = 1 while still equal decides label > b
        steps.append(Step("CCX", "r", (flag, a), (1, 1), when=(x, 0)))
        steps.append(Step("CCX", spare, (flag, a), (1, 0), when=(x, 0)))
        # b_x = 1: equality survives only if a_x = 1
        steps.append(Step("CCX", spare, (flag, a), (1, 1), when=(x, 1)))
        steps.append(Step("ERASE", flag))
        flag, spare = spare, flag
    steps.append(Step("CNOT", "r", (flag,), (1,)))
    steps.append(Step("ERASE", flag))
    return ComparatorProgram(p, n, tuple(steps))


def evaluate(program: ComparatorProgram, label: int, b: int) -> int:
    """Run the program on one station's bits and return the result bit ``r``."""
    if not 0 <= label < 2 ** program.n_bits:
        raise ValueError(f"label {label} does not fit in {program.n_bits} bits")
    reg = dict.fromkeys(program.registers(), 0)
    for x, v in enumerate(_bits(label, program.n_bits)):
        reg[f"a{x}"] = v
    for s in program.steps_for(b):
        if s.op == "ERASE":
            reg[s.target] = 0
        elif all(reg[c] == pol for c, pol in zip(s.controls, s.polarities)):
            reg[s.target] ^= 1
    if any(reg[c] for c in program.ancillas):
        raise RuntimeError("ancillas not returned to 0")
    return reg["r"]


def comparator_circuit(program: ComparatorProgram, b: int) -> Circuit:
    """The program for level ``b`` as a circuit over the station's bits.

    Wires: label bits, then ancillas, then ``r``; all counted as ancillas of a
    zero-data block so erasures are legal.
    """
    regs = program.registers()
    wire = {name: w for w, name in enumerate(regs)}
    gates = []
    for s in program.steps_for(b):
        if s.op == "ERASE":
            gates.append(Erase(wire[s.target]))
        elif s.op == "X":
            gates.append(Gate("X", wire[s.target]))
        else:
            gates.append(Gate("MCX" if len(s.controls) > 1 else "CNOT", wire[s.target],
                              tuple(wire[c] for c in s.controls), s.polarities))
    return Circuit(tuple(gates), 0, len(regs), name=f"comparator-b{b}")


def label_computation_pulses(p: int, b: int, model: CostModel | None = None) -> int:
    from .compiler import compile

    return compile(comparator_circuit(comparator_program(p), b), None, model).total_pulses


def serial_gate_pulses(num_blocks: int, block_stride: int, model: CostModel | None = None) -> int:
    """Pulses for one CU to visit every block in turn and apply a one-qubit gate."""
    model = model or CostModel()
    per_gate = model.one_qubit_op_pulses + model.one_qubit_restore_pulses
    return num_blocks * per_gate + (num_blocks - 1) * model.approach(block_stride)


# --- Zeno-safe physical framing ---------------------------------------------

CU_PATTERN = (1, 1)


def frame_label(value: int, n_bits: int) -> tuple[int, ...]:
    """Cell pattern for a label: guard pair, then each bit doubled, then a guard pair.

    Every 1 has a 1 neighbour, so the lone-1 reset never touches the label.
    """
    cells = [1, 1, 0]
    for bit in _bits(value, n_bits):
        cells += [bit, bit, 0]
    return tuple(cells + [1, 1])


def read_label(cells: Sequence[int], n_bits: int) -> int:
    if len(cells) != 3 * n_bits + 5 or tuple(cells[:3]) != (1, 1, 0) or tuple(cells[-2:]) != (1, 1):
        raise ValueError("not a framed label")
    value = 0
    for x in range(n_bits):
        pair = cells[3 + 3 * x: 5 + 3 * x]
        if pair[0] != pair[1]:
            raise ValueError(f"corrupted bit {x}")
        value = value << 1 | pair[0]
    return value


def frame_station(label: int, n_bits: int, with_cu: bool = True) -> tuple[int, ...]:
    cells = list(frame_label(label, n_bits))
    if with_cu:
        cells += [0] + list(CU_PATTERN)
    return tuple(cells)


def plan_cells(plan: LabelPlan, with_cu: bool = True) -> np.ndarray:
    """Concatenated cell patterns of every station, separated by a 0."""
    out: list[int] = []
    for v in plan.labels:
        out += list(frame_station(v, plan.label_bits, with_cu)) + [0]
    return np.array(out, dtype=np.uint8)
