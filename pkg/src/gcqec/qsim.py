"""Dense pure-state simulation of one block (plus an optional environment register).

Qubit 0 is the most significant bit of the basis index, so ``X`` on qubit 3 of
``|0000000>`` gives ``|0001000>``.  States are mutated in place.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

MAX_QUBITS = 24

_S2 = 1 / np.sqrt(2)
MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "SDG": np.array([[1, 0], [0, -1j]], dtype=complex),
}
ONE_QUBIT = ("X", "Y", "Z", "H", "S", "SDG")
CONTROLLED = {"CNOT": "X", "CZ": "Z", "MCX": "X", "MCZ": "Z"}
INVERSE = {"S": "SDG", "SDG": "S"}


@dataclass(frozen=True)
class Gate:
    """A one-qubit gate or a (multi-)controlled X/Z.

    ``polarities[k]`` is the control value that enables the gate on
    ``controls[k]``; 0 means an open (negated) control.
    """

    name: str
    target: int
    controls: tuple[int, ...] = ()
    polarities: tuple[int, ...] = ()

    def __post_init__(self):
        if self.name not in ONE_QUBIT and self.name not in CONTROLLED:
            raise ValueError(f"unknown gate {self.name!r}")
        controls = tuple(int(c) for c in self.controls)
        object.__setattr__(self, "controls", controls)
        if not self.polarities:
            object.__setattr__(self, "polarities", (1,) * len(controls))
        if len(self.polarities) != len(controls):
            raise ValueError("one polarity per control")
        if any(p not in (0, 1) for p in self.polarities):
            raise ValueError("polarities must be 0 or 1")
        if self.name in ONE_QUBIT and controls:
            raise ValueError(f"{self.name} takes no controls")
        if self.name in ("CNOT", "CZ") and len(controls) != 1:
            raise ValueError(f"{self.name} needs exactly one control")
        if self.name in ("MCX", "MCZ") and not controls:
            raise ValueError(f"{self.name} needs at least one control")
        if self.target in controls or len(set(controls)) != len(controls):
            raise ValueError("controls must be distinct and disjoint from the target")

    @property
    def wires(self) -> tuple[int, ...]:
        return self.controls + (self.target,)

    @property
    def is_controlled(self) -> bool:
        return bool(self.controls)

    @property
    def base(self) -> str:
        """Name of the 2x2 operator applied to the target."""
        return CONTROLLED.get(self.name, self.name)

    def inverse(self) -> "Gate":
        return Gate(INVERSE.get(self.name, self.name), self.target, self.controls, self.polarities)

    def __str__(self) -> str:
        if not self.controls:
            return f"{self.name} {self.target}"
        ctl = " ".join(map(str, self.controls))
        pol = " ".join(map(str, self.polarities))
        return f"{self.name} {self.target} {ctl} {pol}"


def cnot(c: int, t: int) -> Gate:
    return Gate("CNOT", t, (c,))


def cz(c: int, t: int) -> Gate:
    return Gate("CZ", t, (c,))


def mcx(controls: Sequence[int], t: int, polarities: Sequence[int] | None = None) -> Gate:
    return Gate("MCX", t, tuple(controls), tuple(polarities or ()))


def mcz(controls: Sequence[int], t: int, polarities: Sequence[int] | None = None) -> Gate:
    return Gate("MCZ", t, tuple(controls), tuple(polarities or ()))


class StateVector:
    """Amplitudes of ``n_qubits`` qubits together with a seedable RNG for erasures."""

    def __init__(self, amplitudes, seed=None):
        amps = np.asarray(amplitudes, dtype=complex).ravel().copy()
        n = int(round(np.log2(amps.size))) if amps.size else -1
        if n < 1 or 2 ** n != amps.size:
            raise ValueError("amplitude count must be a power of two >= 2")
        if n > MAX_QUBITS:
            raise ValueError(f"at most {MAX_QUBITS} qubits supported")
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValueError("zero state")
        self.amplitudes = amps / norm
        self.n_qubits = n
        self.rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    @classmethod
    def zeros(cls, n_qubits: int, seed=None) -> "StateVector":
        amps = np.zeros(2 ** n_qubits, dtype=complex)
        amps[0] = 1
        return cls(amps, seed)

    @classmethod
    def basis(cls, bits: str, seed=None) -> "StateVector":
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[int(bits, 2)] = 1
        return cls(amps, seed)

    @classmethod
    def product(cls, *factors, seed=None) -> "StateVector":
        """Tensor product, first factor on the most significant qubits."""
        amps = np.ones(1, dtype=complex)
        for f in factors:
            amps = np.kron(amps, f.amplitudes if isinstance(f, StateVector) else np.asarray(f, complex))
        return cls(amps, seed)

    def copy(self) -> "StateVector":
        out = StateVector.__new__(StateVector)
        out.amplitudes = self.amplitudes.copy()
        out.n_qubits = self.n_qubits
        out.rng = self.rng
        return out

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probability_one(self, qubit: int) -> float:
        self._check(qubit)
        idx = [slice(None)] * self.n_qubits
        idx[qubit] = 1
        return float(np.sum(np.abs(self.tensor[tuple(idx)]) ** 2))

    def _check(self, *qubits: int):
        for q in qubits:
            if not 0 <= q < self.n_qubits:
                raise IndexError(f"qubit {q} out of range for {self.n_qubits} qubits")

    def dump(self, path: str | Path, cutoff: float = 0.0) -> None:
        """Write ``index real imag`` per line for amplitudes above ``cutoff``."""
        lines = [f"{i} {a.real:.17g} {a.imag:.17g}"
                 for i, a in enumerate(self.amplitudes) if abs(a) > cutoff]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: str | Path, n_qubits: int) -> "StateVector":
        amps = np.zeros(2 ** n_qubits, dtype=complex)
        for line in Path(path).read_text().split("\n"):
            if line.strip():
                i, re, im = line.split()
                amps[int(i)] = complex(float(re), float(im))
        return cls(amps)


def _apply_matrix(psi: np.ndarray, m: np.ndarray, axis: int) -> None:
    moved = np.tensordot(m, psi, axes=([1], [axis]))
    psi[...] = np.moveaxis(moved, 0, axis)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    state._check(*gate.wires)
    n = state.n_qubits
    psi = state.tensor
    idx: list = [slice(None)] * n
    for c, p in zip(gate.controls, gate.polarities):
        idx[c] = p
    sub = psi[tuple(idx)]  # basic indexing: a view into the amplitudes
    axis = gate.target - sum(1 for c in gate.controls if c < gate.target)
    base = gate.base
    lo = [slice(None)] * sub.ndim
    hi = [slice(None)] * sub.ndim
    lo[axis], hi[axis] = 0, 1
    lo, hi = tuple(lo), tuple(hi)
    if base == "X":
        tmp = sub[lo].copy()
        sub[lo] = sub[hi]
        sub[hi] = tmp
    elif base == "Z":
        sub[hi] *= -1
    else:
        _apply_matrix(sub, MATRICES[base], axis)
    return state


def apply_error(state: StateVector, qubit: int, pauli: str) -> StateVector:
    if pauli not in ("X", "Y", "Z"):
        raise ValueError(f"not a Pauli error: {pauli!r}")
    return apply_gate(state, Gate(pauli, qubit))


def erase(state: StateVector, qubit: int) -> tuple[StateVector, int]:
    """Reset ``qubit`` to ``|0>``, choosing the branch with Born probabilities.

    This is the net channel of swapping into a short-lived third level that
    decays to the ground state; the sampled outcome is returned.
    """
    state._check(qubit)
    psi = state.tensor
    idx0 = [slice(None)] * state.n_qubits
    idx1 = list(idx0)
    idx0[qubit], idx1[qubit] = 0, 1
    idx0, idx1 = tuple(idx0), tuple(idx1)
    p1 = float(np.sum(np.abs(psi[idx1]) ** 2))
    outcome = int(state.rng.random() < p1)
    if outcome:
        psi[idx0] = psi[idx1]
    psi[idx1] = 0
    norm = np.linalg.norm(state.amplitudes)
    if norm < 1e-300:
        raise ValueError("erasure selected a zero-norm branch")
    state.amplitudes /= norm
    return state, outcome


def measure(state: StateVector, qubit: int) -> int:
    """Projective Z measurement with collapse (no reset)."""
    state._check(qubit)
    psi = state.tensor
    p1 = state.probability_one(qubit)
    outcome = int(state.rng.random() < p1)
    idx = [slice(None)] * state.n_qubits
    idx[qubit] = 1 - outcome
    psi[tuple(idx)] = 0
    state.amplitudes /= np.linalg.norm(state.amplitudes)
    return outcome


def fidelity(a: StateVector, b: StateVector) -> float:
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"dimension mismatch: {a.n_qubits} vs {b.n_qubits} qubits")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))


def schmidt_coefficients(state: StateVector, partition: Sequence[int]) -> np.ndarray:
    part = sorted(set(int(q) for q in partition))
    state._check(*part)
    if not part or len(part) == state.n_qubits:
        raise ValueError("partition must be a nonempty proper subset")
    rest = [q for q in range(state.n_qubits) if q not in part]
    mat = np.transpose(state.tensor, part + rest).reshape(2 ** len(part), -1)
    return np.linalg.svd(mat, compute_uv=False)


def is_product(state: StateVector, partition: Sequence[int], tol: float = 1e-8) -> bool:
    """True iff the state has Schmidt rank 1 across ``partition`` | rest."""
    s = schmidt_coefficients(state, partition)
    return bool(s.size < 2 or s[1] < tol)


def reduced_density_matrix(state: StateVector, keep: Sequence[int]) -> np.ndarray:
    keep = list(keep)
    rest = [q for q in range(state.n_qubits) if q not in keep]
    mat = np.transpose(state.tensor, keep + rest).reshape(2 ** len(keep), -1)
    return mat @ mat.conj().T


def random_qubit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)
