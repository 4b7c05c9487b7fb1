"""Device geometry, the abstract pulse-machine instruction set and its cost model.

A globally controlled chain is modelled at the level of whole qubits: a
control unit (CU) sits next to one qubit at a time, and every primitive
operation is an instruction with a fixed number of global pulses.  Nothing
here simulates pulse shapes; pulses are only counted.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable

import yaml


@dataclass(frozen=True)
class ChainLayout:
    """Geometry of a chain made of ``num_blocks`` identical blocks.

    Each block holds ``block_size_qubits`` qubits (data and ancilla) followed by
    a switching station of ``ss_cells`` cells.
    """

    block_size_qubits: int
    num_blocks: int = 1
    cells_per_qubit: int = 8
    ss_cells: int = 10
    label_bits: int = 0

    def __post_init__(self):
        for name in ("block_size_qubits", "num_blocks", "cells_per_qubit"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.ss_cells < 0 or self.label_bits < 0:
            raise ValueError("ss_cells and label_bits must be non-negative")

    @property
    def ss_qubit_span(self) -> int:
        """Width of a switching station measured in qubit slots (rounded up)."""
        return -(-self.ss_cells // self.cells_per_qubit)

    @property
    def block_stride(self) -> int:
        """Qubit-slot distance between the first qubits of neighbouring blocks."""
        return self.block_size_qubits + self.ss_qubit_span

    def ss_position(self, block: int) -> int:
        """Chain slot of a block's switching station (just right of its last qubit)."""
        return block * self.block_stride + self.block_size_qubits

    def with_blocks(self, num_blocks: int) -> "ChainLayout":
        return ChainLayout(self.block_size_qubits, num_blocks, self.cells_per_qubit,
                           self.ss_cells, self.label_bits)


def total_cells(layout: ChainLayout) -> int:
    return layout.num_blocks * (layout.block_size_qubits * layout.cells_per_qubit
                                + layout.ss_cells)


def subcomputer_cell_cost(n_qubits: int, r_aux: int = 0) -> int:
    """Cells per qubit when every qubit gets its own labelled sub-computer and CU.

    Each label bit and auxiliary bit needs 4 cells, doubled for spacing, plus
    10 cells for the qubit and its CU.
    """
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    if r_aux < 0:
        raise ValueError("r_aux must be >= 0")
    return 2 * 4 * (math.ceil(math.log2(n_qubits)) + r_aux) + 10


def subcomputer_capacity(total: int, n_qubits: int, r_aux: int = 0) -> int:
    """Number of qubits ``total`` cells can host at ``n_qubits``-sized labels."""
    return total // subcomputer_cell_cost(n_qubits, r_aux)


@dataclass(frozen=True)
class CostModel:
    """Global-pulse counts for each primitive.

    Defaults follow the counting convention for the two-cell-type Ising chain:
    one-qubit gate 8 + 7, control interaction 5, target operation 9 + 8 and
    approach ``2 * (distance + 1)``.
    """

    one_qubit_op_pulses: int = 8
    one_qubit_restore_pulses: int = 7
    control_interact_pulses: int = 5
    control_restore_pulses: int = 5
    target_op_pulses: int = 9
    target_restore_pulses: int = 8
    approach_pulses_per_step: int = 2
    approach_step_offset: int = 1
    absorb_pulses: int = 10
    stabilize_pulses: int = 1

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be non-negative")

    @property
    def emit_pulses(self) -> int:
        # emission is the absorption sequence run backwards
        return self.absorb_pulses

    def approach(self, distance: int) -> int:
        return self.approach_pulses_per_step * (abs(distance) + self.approach_step_offset)


class Kind(enum.Enum):
    APPROACH = "approach"
    ONE_QUBIT_GATE = "one_qubit_gate"
    CONTROL_ENCODE = "control_encode"
    TARGET_GATE = "target_gate"
    RESTORE = "restore"
    ABSORB = "absorb"
    EMIT = "emit"
    LABEL_COMPUTE = "label_compute"
    STABILIZE = "stabilize"
    ERASE = "erase"


RESTORE_KINDS = ("one_qubit", "target", "control")


@dataclass(frozen=True)
class PulseInstruction:
    """One abstract instruction.  ``qubits`` are chain slots (or an SS index)."""

    kind: Kind
    qubits: tuple[int, ...] = ()
    gate: str | None = None
    restore: str | None = None
    level: int | None = None

    def __post_init__(self):
        if not isinstance(self.kind, Kind):
            raise ValueError(f"unknown instruction kind {self.kind!r}")
        arity = {Kind.APPROACH: 2, Kind.LABEL_COMPUTE: 0, Kind.STABILIZE: 0}.get(self.kind, 1)
        if self.kind is Kind.RESTORE:
            arity = len(self.qubits)
            if self.restore not in RESTORE_KINDS:
                raise ValueError(f"unknown restore kind {self.restore!r}")
        if len(self.qubits) != arity:
            raise ValueError(f"{self.kind.value} takes {arity} qubit argument(s)")
        if self.kind is Kind.LABEL_COMPUTE and self.level is None:
            raise ValueError("label_compute needs a level")

    def __str__(self) -> str:
        parts = [self.kind.value.upper()]
        parts += [str(q) for q in self.qubits]
        for extra in (self.gate, self.restore):
            if extra is not None:
                parts.append(extra)
        if self.level is not None:
            parts.append(f"b={self.level}")
        return " ".join(parts)


def approach(i: int, j: int) -> PulseInstruction:
    return PulseInstruction(Kind.APPROACH, (i, j))


def one_qubit_gate(q: int, gate: str) -> PulseInstruction:
    return PulseInstruction(Kind.ONE_QUBIT_GATE, (q,), gate=gate)


def control_encode(q: int) -> PulseInstruction:
    return PulseInstruction(Kind.CONTROL_ENCODE, (q,))


def target_gate(q: int, gate: str) -> PulseInstruction:
    return PulseInstruction(Kind.TARGET_GATE, (q,), gate=gate)


def restore(kind: str, q: int | None = None) -> PulseInstruction:
    return PulseInstruction(Kind.RESTORE, () if q is None else (q,), restore=kind)


def absorb(ss: int) -> PulseInstruction:
    return PulseInstruction(Kind.ABSORB, (ss,))


def emit(ss: int) -> PulseInstruction:
    return PulseInstruction(Kind.EMIT, (ss,))


def label_compute(level: int) -> PulseInstruction:
    return PulseInstruction(Kind.LABEL_COMPUTE, level=level)


def stabilize() -> PulseInstruction:
    return PulseInstruction(Kind.STABILIZE)


def erase(q: int) -> PulseInstruction:
    return PulseInstruction(Kind.ERASE, (q,))


def instruction_cost(instr: PulseInstruction, model: CostModel) -> int:
    k = instr.kind
    if k is Kind.APPROACH:
        i, j = instr.qubits
        return model.approach(i - j)
    if k in (Kind.ONE_QUBIT_GATE, Kind.ERASE):
        return model.one_qubit_op_pulses
    if k is Kind.CONTROL_ENCODE:
        return model.control_interact_pulses
    if k is Kind.TARGET_GATE:
        return model.target_op_pulses
    if k is Kind.RESTORE:
        return {"one_qubit": model.one_qubit_restore_pulses,
                "target": model.target_restore_pulses,
                "control": model.control_restore_pulses}[instr.restore]
    if k is Kind.ABSORB:
        return model.absorb_pulses
    if k is Kind.EMIT:
        return model.emit_pulses
    if k is Kind.STABILIZE:
        return model.stabilize_pulses
    # LABEL_COMPUTE only marks where the comparator's own instructions start
    return 0


@dataclass(frozen=True)
class PulseProgram:
    instructions: tuple[PulseInstruction, ...]
    costs: tuple[int, ...]

    @classmethod
    def build(cls, instructions: Iterable[PulseInstruction], model: CostModel) -> "PulseProgram":
        instrs = tuple(instructions)
        return cls(instrs, tuple(instruction_cost(i, model) for i in instrs))

    @property
    def total_pulses(self) -> int:
        return sum(self.costs)

    def __len__(self) -> int:
        return len(self.instructions)

    def __add__(self, other: "PulseProgram") -> "PulseProgram":
        return PulseProgram(self.instructions + other.instructions, self.costs + other.costs)

    def reversed(self) -> "PulseProgram":
        """The inverse sequence: order reversed, absorb and emit swapped."""
        swap = {Kind.ABSORB: Kind.EMIT, Kind.EMIT: Kind.ABSORB}
        out = []
        for instr in reversed(self.instructions):
            if instr.kind in swap:
                instr = PulseInstruction(swap[instr.kind], instr.qubits)
            elif instr.kind is Kind.APPROACH:
                instr = approach(instr.qubits[1], instr.qubits[0])
            out.append(instr)
        return PulseProgram(tuple(out), tuple(reversed(self.costs)))

    def to_text(self) -> str:
        return "\n".join(f"{instr}\t{cost}" for instr, cost in zip(self.instructions, self.costs))


@dataclass(frozen=True)
class NoiseConfig:
    p_x: float = 0.0
    p_y: float = 0.0
    p_z: float = 0.0
    granularity: str = "per_cycle"


@dataclass(frozen=True)
class Config:
    layout: dict = field(default_factory=dict)
    cost_model: CostModel = field(default_factory=CostModel)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    algorithm_budget: int = 16


def load_config(path: str | Path | None) -> Config:
    """Read a YAML document with optional ``layout``, ``cost_model``, ``noise`` sections.

    Missing file sections fall back to the defaults; ``None`` gives all defaults.
    """
    if path is None:
        return Config()
    doc = yaml.safe_load(Path(path).read_text()) or {}
    unknown = set(doc) - {"layout", "cost_model", "noise", "algorithm_budget"}
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")
    return Config(
        layout=dict(doc.get("layout") or {}),
        cost_model=CostModel(**(doc.get("cost_model") or {})),
        noise=NoiseConfig(**(doc.get("noise") or {})),
        algorithm_budget=int(doc.get("algorithm_budget", 16)),
    )


def dump_config(config: Config) -> str:
    doc = {"layout": config.layout, "cost_model": asdict(config.cost_model),
           "noise": asdict(config.noise), "algorithm_budget": config.algorithm_budget}
    return yaml.safe_dump(doc, sort_keys=False)
