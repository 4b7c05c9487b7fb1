"""The device-level machine cycle: parallel EC, CU switching, algorithm, reactivation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import codes, qsim
from .codes import CodeSpec, Erase
from .compiler import compile, compile_gates
from .core import (ChainLayout, CostModel, PulseProgram, absorb, approach, label_compute,
                   stabilize as stabilize_instr)
from .frames import FrameSimulator
from .labels import LabelPlan, comparator_circuit, comparator_program, evaluate, hierarchy_labels
from .qsim import Gate, StateVector

PHASES = ("EC", "Transition", "Algorithm")

# Bloch vector (1,1,1)/sqrt(3): every non-trivial logical Pauli leaves overlap 1/3
MAGIC_STATE = np.array([math.cos(math.acos(1 / math.sqrt(3)) / 2),
                        math.sin(math.acos(1 / math.sqrt(3)) / 2) * np.exp(1j * math.pi / 4)])


# --- Zeno stabilisation ---------------------------------------------------------

@dataclass(frozen=True)
class CellPattern:
    bits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("cells hold 0 or 1")

    def __len__(self) -> int:
        return len(self.bits)


def stabilize(pattern: CellPattern | Sequence[int]) -> CellPattern:
    """Reset every 1 whose two neighbours are 0; chain ends count as 0."""
    bits = np.asarray(pattern.bits if isinstance(pattern, CellPattern) else pattern, dtype=bool)
    if bits.size == 0:
        return CellPattern(())
    padded = np.concatenate(([False], bits, [False]))
    lone = bits & ~padded[:-2] & ~padded[2:]
    return CellPattern(tuple((bits & ~lone).astype(int)))


# --- noise --------------------------------------------------------------------------

@dataclass(frozen=True)
class NoiseModel:
    """Independent Pauli errors on each data qubit.

    ``per_cycle``: rates are probabilities per qubit per cycle.
    ``per_pulse_exposure``: rates are per pulse; a cycle of ``n`` pulses hits a
    qubit with probability ``1 - (1 - p)^n``, split in proportion to the rates.
    """

    p_x: float = 0.0
    p_y: float = 0.0
    p_z: float = 0.0
    granularity: str = "per_cycle"

    def __post_init__(self):
        if min(self.p_x, self.p_y, self.p_z) < 0 or self.total > 1:
            raise ValueError("rates must be non-negative and sum to at most 1")
        if self.granularity not in ("per_cycle", "per_pulse_exposure"):
            raise ValueError(f"unknown granularity {self.granularity!r}")

    @classmethod
    def depolarizing(cls, p: float, granularity: str = "per_cycle") -> "NoiseModel":
        return cls(p / 3, p / 3, p / 3, granularity)

    @property
    def total(self) -> float:
        return self.p_x + self.p_y + self.p_z

    def cycle_rates(self, pulses: int = 0) -> tuple[float, float, float]:
        if self.granularity == "per_cycle" or self.total == 0:
            return self.p_x, self.p_y, self.p_z
        hit = 1 - (1 - self.total) ** pulses
        return tuple(r / self.total * hit for r in (self.p_x, self.p_y, self.p_z))

    def sample(self, rng: np.random.Generator, n_qubits: int, pulses: int = 0) -> list[tuple[int, str]]:
        px, py, pz = self.cycle_rates(pulses)
        u = rng.random(n_qubits)
        out = []
        for q, v in enumerate(u):
            if v < px:
                out.append((q, "X"))
            elif v < px + py:
                out.append((q, "Y"))
            elif v < px + py + pz:
                out.append((q, "Z"))
        return out


# --- device -----------------------------------------------------------------------------

@dataclass
class CUState:
    active: bool = True
    position: int = 0


@dataclass(frozen=True)
class AlgorithmGate:
    """A logical one-qubit gate addressed to ``block``.

    Pulses are global, so every block whose CU is active receives the gate.
    """

    name: str
    block: int = 0


@dataclass
class CycleReport:
    level: int
    ec_pulses: int
    transition_pulses: int
    algorithm_pulses: int
    reactivation_pulses: int
    active_blocks: list[int]
    injected: list[list[tuple[int, str]]]
    fidelities: list[float]
    erasure_outcomes: list[list[int]] = field(default_factory=list)

    @property
    def total_pulses(self) -> int:
        return self.ec_pulses + self.transition_pulses + self.algorithm_pulses + self.reactivation_pulses


@dataclass
class DeviceState:
    code: CodeSpec
    layout: ChainLayout
    label_plan: LabelPlan
    cost_model: CostModel
    cu_states: list[CUState]
    block_states: list[StateVector]
    logical: list[np.ndarray]
    rng: np.random.Generator
    seed: int | None = None
    phase: str = "EC"
    algorithm_budget: int = 16
    pulse_ledger: dict[str, int] = field(default_factory=lambda: dict.fromkeys(
        ("ec", "transition", "algorithm", "reactivation"), 0))

    @classmethod
    def create(cls, code: CodeSpec | str, num_blocks: int, p: int = 2, seed: int | None = None,
               psi: Sequence[Sequence[complex]] | None = None,
               cost_model: CostModel | None = None, ss_cells: int = 10,
               algorithm_budget: int = 16) -> "DeviceState":
        code = codes.get_code(code) if isinstance(code, str) else code
        rng = np.random.default_rng(seed)
        layout = ChainLayout(code.block_size_qubits, num_blocks, ss_cells=ss_cells,
                             label_bits=math.ceil(math.log2(p + 1)))
        plan = hierarchy_labels(p, code.block_size_qubits, num_blocks)
        logical = [np.asarray(v, dtype=complex) for v in psi] if psi is not None else [
            qsim.random_qubit(rng) for _ in range(num_blocks)]
        if len(logical) != num_blocks:
            raise ValueError("one logical state per block")
        blocks = [codes.encoded_state(code, v, seed=rng) for v in logical]
        cus = [CUState(True, 0) for _ in range(num_blocks)]
        return cls(code, layout, plan, cost_model or CostModel(), cus, blocks, logical, rng,
                   seed, algorithm_budget=algorithm_budget)

    @property
    def num_blocks(self) -> int:
        return self.layout.num_blocks

    def active_blocks(self) -> list[int]:
        return [k for k, cu in enumerate(self.cu_states) if cu.active]

    def fidelities(self) -> list[float]:
        return [codes.logical_fidelity(self.code, s, v) for s, v in zip(self.block_states, self.logical)]


@lru_cache(maxsize=None)
def _ec_compiled(code: CodeSpec, model: CostModel):
    return compile(code.ec(), None, model)


def transition_program(state: DeviceState, level: int) -> PulseProgram:
    """Pulses that take every CU to its station, test the label and absorb.

    The same pulses drive every station; only the label data differs.
    """
    model = state.cost_model
    ss = state.layout.block_size_qubits
    rest = _ec_compiled(state.code, model).cu_path[-1] if _ec_compiled(state.code, model).cu_path else 0
    instrs = [stabilize_instr()]
    if rest != ss:
        instrs.append(approach(rest, ss))
    instrs.append(label_compute(level))
    circ = comparator_circuit(comparator_program(state.label_plan.p), level)
    # station bits sit beside the SS slot, one slot each
    comp = compile_gates(circ.gates, [ss + w for w in range(circ.n_wires)], model, start=ss)
    instrs += comp.program.instructions
    last = comp.cu_path[-1] if comp.cu_path else ss
    if last != ss:
        instrs.append(approach(last, ss))
    instrs.append(absorb(ss))
    return PulseProgram.build(instrs, model)


def _transversal(code: CodeSpec, name: str) -> list[Gate]:
    if name == "X":
        return [Gate(c, q) for q, c in enumerate(code.logical_x) if c != "I"]
    if name == "Z":
        return [Gate(c, q) for q, c in enumerate(code.logical_z) if c != "I"]
    if name == "H" and code.name == "steane":
        return [Gate("H", q) for q in range(code.n_data)]
    raise ValueError(f"no transversal logical {name} for the {code.name} code")


_LOGICAL = {"X": qsim.MATRICES["X"], "Z": qsim.MATRICES["Z"], "H": qsim.MATRICES["H"]}


def run_cycle(state: DeviceState, level: int, algorithm_gates: Iterable[AlgorithmGate] = (),
              noise: NoiseModel | None = None) -> tuple[DeviceState, CycleReport]:
    """One full cycle: noise, parallel EC, switch to ``level``, algorithm, switch back.

    ``state`` is updated in place and returned with the cycle's report.
    """
    if state.phase != "EC":
        raise RuntimeError(f"cycle must start in the EC phase, device is in {state.phase}")
    if not 0 <= level <= state.label_plan.p:
        raise ValueError(f"level must lie in [0, {state.label_plan.p}]")
    gates = list(algorithm_gates)
    if len(gates) > state.algorithm_budget:
        raise ValueError(f"{len(gates)} algorithm gates exceed the budget of {state.algorithm_budget}")
    model = state.cost_model
    code = state.code
    ec = _ec_compiled(code, model)
    transition = transition_program(state, level)
    ss = state.layout.block_size_qubits

    # algorithm pulses do not depend on the noise, so work them out first
    alg_gates = [g for ag in gates for g in _transversal(code, ag.name)]
    alg = compile_gates(alg_gates, code.positions, model, start=ss) if alg_gates else None
    alg_pulses = 0
    if alg is not None:
        alg_pulses = alg.total_pulses
        if alg.cu_path[-1] != ss:
            alg_pulses += model.approach(alg.cu_path[-1] - ss)

    noise = noise or NoiseModel()
    exposure = ec.total_pulses + 2 * transition.total_pulses + alg_pulses
    injected = []
    for blk in state.block_states:
        errs = noise.sample(state.rng, code.n_data, exposure)
        for q, pauli in errs:
            qsim.apply_error(blk, q, pauli)
        injected.append(errs)

    # (1) every block runs the same EC pulses at once
    outcomes = [ec_circuit_run(code, blk) for blk in state.block_states]
    state.pulse_ledger["ec"] += ec.total_pulses

    # (2) CUs meet their stations; the label test decides who stays on
    state.phase = "Transition"
    comparator = comparator_program(state.label_plan.p)
    flags = [bool(evaluate(comparator, v, level)) for v in state.label_plan.labels]
    for cu, on in zip(state.cu_states, flags):
        cu.position = ss
        cu.active = on
    state.pulse_ledger["transition"] += transition.total_pulses

    # (3) surviving CUs execute the algorithm step
    state.phase = "Algorithm"
    active = state.active_blocks()
    for ag in gates:
        if not state.cu_states[ag.block].active:
            raise RuntimeError(f"block {ag.block} has no active CU at level {level}")
        phys = _transversal(code, ag.name)
        for k in active:
            for g in phys:
                qsim.apply_gate(state.block_states[k], g)
            state.logical[k] = _LOGICAL[ag.name] @ state.logical[k]
    state.pulse_ledger["algorithm"] += alg_pulses

    # (4) the reverse pulses re-emit every absorbed CU
    reactivation = transition.reversed()
    for cu in state.cu_states:
        cu.active = True
        cu.position = 0
    state.pulse_ledger["reactivation"] += reactivation.total_pulses
    state.phase = "EC"

    return state, CycleReport(level, ec.total_pulses, transition.total_pulses, alg_pulses,
                       reactivation.total_pulses, active, injected, state.fidelities(), outcomes)


def ec_circuit_run(code: CodeSpec, block: StateVector) -> list[int]:
    return _ec_circuit(code).run(block)


@lru_cache(maxsize=None)
def _ec_circuit(code: CodeSpec):
    return code.ec()


def end_cell_io(state: DeviceState, operation: str, value: int | None = None,
                block: int = 0, wire: int | None = None) -> int:
    """Prepare or read the qubit in the chain's end cell.

    That qubit is the only one with its own control and readout; anything
    else is refused.
    """
    boundary = state.code.positions.index(0)
    if block != 0 or (wire is not None and wire != boundary):
        raise ValueError("only the end-cell qubit (block 0, chain slot 0) is addressable")
    s = state.block_states[0]
    if operation == "prepare":
        if value not in (0, 1):
            raise ValueError("prepare needs value 0 or 1")
        qsim.erase(s, boundary)
        if value:
            qsim.apply_gate(s, Gate("X", boundary))
        return value
    if operation == "read":
        return qsim.measure(s, boundary)
    raise ValueError(f"operation must be 'prepare' or 'read', not {operation!r}")


# --- Monte Carlo ----------------------------------------------------------------------------

@dataclass
class SweepRow:
    rate: float
    trials: int
    failures: int

    @property
    def logical_error_rate(self) -> float:
        return self.failures / self.trials

    @property
    def stderr(self) -> float:
        p = self.logical_error_rate
        return math.sqrt(p * (1 - p) / self.trials)


def _sample_frames(rng: np.random.Generator, trials: int, n_data: int, n_wires: int,
                   p: float, x: np.ndarray, z: np.ndarray) -> None:
    u = rng.random((trials, n_data))
    ex = u < 2 * p / 3          # X or Y
    ez = (u >= p / 3) & (u < p)  # Y or Z
    x[:, :n_data] ^= ex
    z[:, :n_data] ^= ez


def frame_trials(code: CodeSpec, p: float, cycles: int, trials: int,
                 rng: np.random.Generator, chunk: int = 200_000) -> int:
    """Logical failures among ``trials`` runs of ``cycles`` noisy EC rounds."""
    sim = _frame_sim(code)
    failures = 0
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        x = np.zeros((m, sim.n), dtype=bool)
        z = np.zeros((m, sim.n), dtype=bool)
        for _ in range(cycles):
            _sample_frames(rng, m, code.n_data, sim.n, p, x, z)
            sim.run(x, z)
        failures += int(np.count_nonzero(sim.logical_flips(x, z)))
        done += m
    return failures


@lru_cache(maxsize=None)
def _frame_sim(code: CodeSpec) -> FrameSimulator:
    return FrameSimulator(code)


def decoded_fidelity(code: CodeSpec, block: StateVector, psi: Sequence[complex]) -> float:
    """Undo the encoder and compare the input qubit with ``psi``."""
    s = block.copy()
    code.encode().inverse().run(s)
    first = {"steane": 2, "shor": 0}[code.name]
    rho = qsim.reduced_density_matrix(s, [first])
    v = np.asarray(psi, dtype=complex)
    return float(np.real(np.vdot(v, rho @ v)))


def statevector_trials(code: CodeSpec, p: float, cycles: int, trials: int,
                       rng: np.random.Generator) -> int:
    """Same experiment as :func:`frame_trials` on full state vectors (slow)."""
    noise = NoiseModel.depolarizing(p)
    ec = _ec_circuit(code)
    failures = 0
    for _ in range(trials):
        block = codes.encoded_state(code, MAGIC_STATE, seed=rng)
        for _ in range(cycles):
            for q, pauli in noise.sample(rng, code.n_data):
                qsim.apply_error(block, q, pauli)
            ec.run(block)
        failures += decoded_fidelity(code, block, MAGIC_STATE) < 0.5
    return failures


def monte_carlo_sweep(code: CodeSpec | str, rates: Sequence[float], cycles: int = 1,
                      trials: int = 100_000, seed: int = 0, engine: str = "frame") -> list[SweepRow]:
    """Logical error rate per physical rate under i.i.d. depolarizing data noise.

    Each rate draws from its own child of ``SeedSequence(seed)``, so a row depends
    only on the master seed and the rate's position in the list.
    """
    code = codes.get_code(code) if isinstance(code, str) else code
    if trials < 1 or cycles < 1:
        raise ValueError("trials and cycles must be >= 1")
    if engine not in ("frame", "statevector"):
        raise ValueError("engine must be 'frame' or 'statevector'")
    children = np.random.SeedSequence(seed).spawn(len(rates))
    rows = []
    for p, child in zip(rates, children):
        if not 0 <= p < 0.2:
            raise ValueError(f"rate {p} outside [0, 0.2)")  # 0 is allowed as a sanity point
        rng = np.random.default_rng(child)
        run = frame_trials if engine == "frame" else statevector_trials
        rows.append(SweepRow(p, trials, run(code, p, cycles, trials, rng)))
    return rows


def fit_loglog_slope(rows: Sequence[SweepRow]) -> float:
    """Weighted least-squares slope of log(logical rate) against log(physical rate)."""
    pts = [r for r in rows if r.failures > 0 and r.rate > 0]
    if len(pts) < 2:
        raise ValueError("need at least two rates with failures to fit a slope")
    x = np.log([r.rate for r in pts])
    y = np.log([r.logical_error_rate for r in pts])
    w = np.sqrt([r.failures for r in pts])  # 1 / relative error
    slope, _ = np.polyfit(x, y, 1, w=w)
    return float(slope)
