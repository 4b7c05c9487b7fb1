"""Steane [[7,1,3]] and Shor [[9,1,3]] circuits with measurement-free correction.

Each block holds the data qubits and the ancillas.  Syndromes are copied
onto ancillas with CNOTs, the correction is a multi-controlled Pauli keyed to
the ancilla pattern, and the ancillas are then erased so they can be reused.
No measurement happens anywhere in the error-correction cycle.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np

from . import qsim
from .qsim import Gate, StateVector, cnot, mcx


@dataclass(frozen=True)
class Erase:
    target: int

    @property
    def wires(self) -> tuple[int, ...]:
        return (self.target,)

    def __str__(self) -> str:
        return f"ERASE {self.target}"


Op = Union[Gate, Erase]


@dataclass(frozen=True)
class Circuit:
    """Gate list over ``n_data + n_ancilla`` wires.

    Data wires come first.  ``positions[w]`` is the chain slot (qubit index
    inside the block) that wire ``w`` occupies; the compiler measures CU
    travel in these slots.
    """

    gates: tuple[Op, ...]
    n_data: int
    n_ancilla: int
    positions: tuple[int, ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if not self.positions:
            object.__setattr__(self, "positions", tuple(range(self.n_wires)))
        if len(self.positions) != self.n_wires or len(set(self.positions)) != self.n_wires:
            raise ValueError("positions must assign a distinct slot to every wire")
        for g in self.gates:
            for w in g.wires:
                if not 0 <= w < self.n_wires:
                    raise ValueError(f"wire {w} out of range in {g}")
            if isinstance(g, Erase) and g.target < self.n_data:
                raise ValueError(f"erase on data wire {g.target}")

    @property
    def n_wires(self) -> int:
        return self.n_data + self.n_ancilla

    @property
    def ancilla_wires(self) -> range:
        return range(self.n_data, self.n_wires)

    def __add__(self, other: "Circuit") -> "Circuit":
        if (self.n_data, self.n_ancilla, self.positions) != (other.n_data, other.n_ancilla, other.positions):
            raise ValueError("circuits live on different blocks")
        return Circuit(self.gates + other.gates, self.n_data, self.n_ancilla, self.positions,
                       self.name or other.name)

    def __len__(self) -> int:
        return len(self.gates)

    def with_gates(self, gates: Iterable[Op]) -> "Circuit":
        return Circuit(tuple(gates), self.n_data, self.n_ancilla, self.positions, self.name)

    def inverse(self) -> "Circuit":
        if any(isinstance(g, Erase) for g in self.gates):
            raise ValueError("erasure is not invertible")
        return self.with_gates(g.inverse() for g in reversed(self.gates))

    def peak_ancilla_usage(self) -> int:
        """Largest number of ancillas holding information at the same time.

        An ancilla is busy from the first gate that touches it until it is erased.
        """
        busy: set[int] = set()
        peak = 0
        for g in self.gates:
            if isinstance(g, Erase):
                busy.discard(g.target)
                continue
            busy.update(w for w in g.wires if w >= self.n_data)
            peak = max(peak, len(busy))
        return peak

    def run(self, state: StateVector, offset: int = 0) -> list[int]:
        """Apply in place to wires ``offset ..`` of ``state``; returns erasure outcomes."""
        outcomes = []
        for g in self.gates:
            if isinstance(g, Erase):
                outcomes.append(qsim.erase(state, g.target + offset)[1])
            elif offset:
                qsim.apply_gate(state, Gate(g.name, g.target + offset,
                                            tuple(c + offset for c in g.controls), g.polarities))
            else:
                qsim.apply_gate(state, g)
        return outcomes

    def to_text(self) -> str:
        head = [f"# {self.name}" if self.name else "# circuit",
                f"# wires data={self.n_data} ancilla={self.n_ancilla}",
                "# positions " + " ".join(map(str, self.positions))]
        return "\n".join(head + [str(g) for g in self.gates]) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        n_data = n_anc = None
        positions: tuple[int, ...] = ()
        name = ""
        gates: list[Op] = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("wires"):
                    kv = dict(tok.split("=") for tok in body.split()[1:])
                    n_data, n_anc = int(kv["data"]), int(kv["ancilla"])
                elif body.startswith("positions"):
                    positions = tuple(int(t) for t in body.split()[1:])
                elif lineno == 1 and body != "circuit":
                    name = body
                continue
            gates.append(parse_op(line))
        if n_data is None:
            raise ValueError("missing '# wires data=.. ancilla=..' header")
        return cls(tuple(gates), n_data, n_anc, positions, name)


def parse_op(line: str) -> Op:
    tok = line.split()
    name, args = tok[0].upper(), [int(t) for t in tok[1:]]
    if name == "ERASE":
        if len(args) != 1:
            raise ValueError(f"bad erase line: {line!r}")
        return Erase(args[0])
    if not args:
        raise ValueError(f"missing target: {line!r}")
    target, rest = args[0], args[1:]
    if len(rest) % 2:
        raise ValueError(f"controls and polarities must pair up: {line!r}")
    k = len(rest) // 2
    return Gate(name, target, tuple(rest[:k]), tuple(rest[k:]))


# --- Pauli-string helpers -------------------------------------------------

def pauli_bits(p: str) -> tuple[np.ndarray, np.ndarray]:
    x = np.array([c in "XY" for c in p], dtype=bool)
    z = np.array([c in "ZY" for c in p], dtype=bool)
    return x, z


def commutes(a: str, b: str) -> bool:
    ax, az = pauli_bits(a)
    bx, bz = pauli_bits(b)
    return not (np.sum(ax & bz) + np.sum(az & bx)) % 2


def apply_pauli_string(state: StateVector, p: str, offset: int = 0) -> StateVector:
    for q, c in enumerate(p):
        if c != "I":
            qsim.apply_gate(state, Gate(c, q + offset))
    return state


def _support(qubits: Iterable[int], n: int, op: str) -> str:
    s = set(qubits)
    return "".join(op if q in s else "I" for q in range(n))


@dataclass(frozen=True)
class CodeSpec:
    name: str
    n_data: int
    n_ancilla: int
    stabilizers: tuple[str, ...]
    logical_x: str
    logical_z: str
    positions: tuple[int, ...] = field(default=())

    @property
    def block_size_qubits(self) -> int:
        return self.n_data + self.n_ancilla

    def check(self) -> None:
        """Raise if the stabilizers or logicals break the commutation rules."""
        ops = list(self.stabilizers)
        for i, a in enumerate(ops):
            for b in ops[i + 1:]:
                if not commutes(a, b):
                    raise ValueError(f"stabilizers {a} and {b} anticommute")
        for lop in (self.logical_x, self.logical_z):
            for s in ops:
                if not commutes(lop, s):
                    raise ValueError(f"logical {lop} anticommutes with {s}")
        if commutes(self.logical_x, self.logical_z):
            raise ValueError("logical X and Z must anticommute")

    def encode(self) -> Circuit:
        return _built(ENCODERS[self.name], self)

    def ec(self) -> Circuit:
        return _built(EC_BUILDERS[self.name], self)

    def blank(self, gates: Iterable[Op] = (), name: str = "") -> Circuit:
        return Circuit(tuple(gates), self.n_data, self.n_ancilla, self.positions, name)


# Hamming parity checks: qubit j (1-based) takes part in check k iff bit k of j is set.
STEANE_CHECKS = tuple(tuple(j - 1 for j in range(1, 8) if j >> k & 1) for k in range(3))

STEANE = CodeSpec(
    name="steane",
    n_data=7,
    n_ancilla=3,
    stabilizers=tuple(_support(c, 7, "Z") for c in STEANE_CHECKS)
    + tuple(_support(c, 7, "X") for c in STEANE_CHECKS),
    logical_x="X" * 7,
    logical_z="Z" * 7,
    positions=tuple(range(10)),
)

SHOR_TRIPLES = ((0, 1, 2), (3, 4, 5), (6, 7, 8))

# Chain layout d d d a a d d d a a d d d a a a: the nine data qubits occupy the
# slots of the 3-on/2-off pattern, each triple keeps its two ancillas next to it,
# and the seventh ancilla sits at the far end.
_SHOR_DATA_SLOTS = (0, 1, 2, 5, 6, 7, 10, 11, 12)
_SHOR_ANC_SLOTS = (3, 4, 8, 9, 13, 14, 15)

SHOR = CodeSpec(
    name="shor",
    n_data=9,
    n_ancilla=7,
    stabilizers=tuple(_support(pair, 9, "Z") for t in SHOR_TRIPLES for pair in (t[:2], t[1:]))
    + (_support(range(0, 6), 9, "X"), _support(range(3, 9), 9, "X")),
    logical_x="Z" * 9,
    logical_z="X" * 9,
    positions=_SHOR_DATA_SLOTS + _SHOR_ANC_SLOTS,
)

CODES = {"steane": STEANE, "shor": SHOR}


def get_code(name: str) -> CodeSpec:
    try:
        return CODES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown code {name!r}; choose from {sorted(CODES)}") from None


# --- circuit builders -----------------------------------------------------

def _fan_out(control: int, targets: Sequence[int]) -> list[Gate]:
    return [cnot(control, t) for t in targets]


def steane_encode(code: CodeSpec = STEANE) -> Circuit:
    # the input sits on data qubit 3 (1-based); X on {3,5,6} is a logical X
    gates: list[Op] = _fan_out(2, (4, 5))
    pivots = {0: (2, 4, 6), 1: (2, 5, 6), 3: (4, 5, 6)}
    gates += [Gate("H", p) for p in pivots]
    for p, targets in pivots.items():
        gates += _fan_out(p, targets)
    return code.blank(gates, "steane-encode")


def _steane_round(data: Sequence[int], anc: Sequence[int]) -> list[Op]:
    """Copy the bit-flip syndrome onto ``anc`` and flip the offending qubit."""
    gates: list[Op] = []
    for j, q in enumerate(data, start=1):
        gates += _fan_out(q, [anc[k] for k in range(3) if j >> k & 1])
    for j, q in enumerate(data, start=1):
        gates.append(mcx(anc, q, [j >> k & 1 for k in range(3)]))
    return gates


def steane_ec(code: CodeSpec = STEANE) -> Circuit:
    data = list(range(7))
    anc = [7, 8, 9]
    erase_all = [Erase(a) for a in anc]
    hadamards = [Gate("H", q) for q in data]
    gates = (_steane_round(data, anc) + erase_all
             + hadamards + _steane_round(data, anc) + hadamards + erase_all)
    return code.blank(gates, "steane-ec")


def shor_encode(code: CodeSpec = SHOR) -> Circuit:
    gates: list[Op] = _fan_out(0, (3, 6))
    gates += [Gate("H", t[0]) for t in SHOR_TRIPLES]
    for t in SHOR_TRIPLES:
        gates += _fan_out(t[0], t[1:])
    return code.blank(gates, "shor-encode")


def shor_ec(code: CodeSpec = SHOR) -> Circuit:
    # wires 9..15 are the ancillas at slots 3,4,8,9,13,14,15
    pairs = ((9, 10), (11, 12), (13, 14))
    data = range(9)
    hadamards = [Gate("H", q) for q in data]
    gates: list[Op] = []
    # (i) phase flips: in the Hadamard frame the X-checks on triples 0+1 and
    # 1+2 are plain parities; the middle ancilla pair sits between them
    c0, c1 = pairs[1]
    gates += hadamards
    for q in data:
        gates += _fan_out(q, [a for a, span in ((c0, range(0, 6)), (c1, range(3, 9))) if q in span])
    for t, pol in zip(SHOR_TRIPLES, ((1, 0), (1, 1), (0, 1))):
        gates.append(mcx((c0, c1), t[0], pol))
    gates += hadamards
    gates += [Erase(c0), Erase(c1)]
    # (ii) bit flips: two Z-parity checks per triple, on the pair next to it
    for t, (b0, b1) in zip(SHOR_TRIPLES, pairs):
        gates += [cnot(t[0], b0), cnot(t[1], b0), cnot(t[1], b1), cnot(t[2], b1)]
        for q, pol in zip(t, ((1, 0), (1, 1), (0, 1))):
            gates.append(mcx((b0, b1), q, pol))
        gates += [Erase(b0), Erase(b1)]
    return code.blank(gates, "shor-ec")


@lru_cache(maxsize=None)
def _built(builder, code: "CodeSpec") -> Circuit:
    return builder(code)


ENCODERS = {"steane": steane_encode, "shor": shor_encode}
EC_BUILDERS = {"steane": steane_ec, "shor": shor_ec}


# --- simulation helpers -----------------------------------------------------

def encoded_state(code: CodeSpec, psi: Sequence[complex], seed=None,
                  extra_qubits: int = 0) -> StateVector:
    """Encode the one-qubit state ``psi`` into a fresh block (ancillas in |0>).

    ``extra_qubits`` zero qubits are appended after the block, e.g. an
    environment register.
    """
    first = {"steane": 2, "shor": 0}[code.name]
    n = code.block_size_qubits + extra_qubits
    factors = [np.array([1, 0], dtype=complex)] * n
    factors[first] = np.asarray(psi, dtype=complex)
    state = StateVector.product(*factors, seed=seed)
    code.encode().run(state)
    return state


@lru_cache(maxsize=None)
def codeword_basis(code_name: str) -> tuple[np.ndarray, np.ndarray]:
    """|0_L>, |1_L> on the data qubits built from the stabilizer group directly.

    |0_L> is the projection of a +1 eigenstate of the logical Z onto the
    stabilizer code space; |1_L> = logical X |0_L>.  Independent of the
    encoding circuits.
    """
    code = CODES[code_name]
    n = code.n_data
    dim = 2 ** n
    proj = np.eye(dim, dtype=complex)
    for s in code.stabilizers + (code.logical_z,):
        proj = proj @ (np.eye(dim) + pauli_matrix(s)) / 2
    col = np.argmax(np.linalg.norm(proj, axis=0))
    zero = proj[:, col] / np.linalg.norm(proj[:, col])
    one = pauli_matrix(code.logical_x) @ zero
    return zero, one


@lru_cache(maxsize=None)
def pauli_matrix(p: str) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for c in p:
        out = np.kron(out, qsim.MATRICES[c])
    return out


def data_state(code: CodeSpec, psi: Sequence[complex]) -> np.ndarray:
    zero, one = codeword_basis(code.name)
    return psi[0] * zero + psi[1] * one


@dataclass
class ECReport:
    data_fidelity: float
    product_check: bool
    ancilla_reset: bool
    product_after_erase: bool
    erasure_outcomes: list[int]


def coherent_ec_experiment(code: CodeSpec, deltas: Sequence[complex], error_qubit: int,
                           psi: Sequence[complex] | None = None, seed=None,
                           tol: float = 1e-8) -> ECReport:
    """Entangle one data qubit with a 2-qubit environment and run EC coherently.

    The environment records which of I, X, Y, Z hit ``error_qubit``:
    ``|Q>|E0> + dX X|Q>|E1> + dY Y|Q>|E2> + dZ Z|Q>|E3>`` (normalised).  The EC
    circuit runs unchanged; the data register must come out as a product with
    environment plus ancillas, both before and after the final erasure.
    """
    if not 0 <= error_qubit < code.n_data:
        raise ValueError(f"error_qubit must be a data qubit (0..{code.n_data - 1})")
    weights = np.array([1.0, *deltas], dtype=complex)
    if len(weights) != 4:
        raise ValueError("deltas must be (dX, dY, dZ)")
    rng = np.random.default_rng(seed)
    if psi is None:
        psi = qsim.random_qubit(rng)
    n_block = code.block_size_qubits
    clean = encoded_state(code, psi, seed=rng, extra_qubits=2)
    amps = np.zeros_like(clean.amplitudes)
    for branch, (pauli, w) in enumerate(zip("IXYZ", weights)):
        if w == 0:
            continue
        s = clean.copy()
        if pauli != "I":
            qsim.apply_error(s, error_qubit, pauli)
        env = [slice(None)] * (n_block + 2)
        # environment qubits are the last two wires, still |00> here
        t = s.tensor
        moved = np.zeros_like(t)
        idx = tuple(env[:n_block] + [branch >> 1, branch & 1])
        moved[idx] = t[tuple(env[:n_block] + [0, 0])]
        amps += w * moved.ravel()
    state = StateVector(amps, seed=rng)
    data = list(range(code.n_data))

    ec = code.ec()
    # the final erasures are split off so the factorised state can be inspected first
    tail = 0
    while tail < len(ec.gates) and isinstance(ec.gates[len(ec.gates) - 1 - tail], Erase):
        tail += 1
    body, final = ec.gates[: len(ec.gates) - tail], ec.gates[len(ec.gates) - tail:]
    outcomes = ec.with_gates(body).run(state)
    product_check = qsim.is_product(state, data, tol)

    outcomes += ec.with_gates(final).run(state)
    product_after = qsim.is_product(state, data, tol)
    ancillas_zero = all(state.probability_one(a) < tol for a in ec.ancilla_wires)

    rho = qsim.reduced_density_matrix(state, data)
    target = data_state(code, psi)
    fid = float(np.real(np.vdot(target, rho @ target)))
    return ECReport(fid, product_check, ancillas_zero, product_after, outcomes)


def logical_fidelity(code: CodeSpec, state: StateVector, psi: Sequence[complex]) -> float:
    """Overlap of the data register with the ideal codeword for ``psi``."""
    data = list(range(code.n_data))
    if state.n_qubits == code.n_data:
        rho_vec = state.amplitudes
        target = data_state(code, psi)
        return float(abs(np.vdot(target, rho_vec)) ** 2)
    rho = qsim.reduced_density_matrix(state, data)
    target = data_state(code, psi)
    return float(np.real(np.vdot(target, rho @ target)))
