"""Batched Pauli-frame propagation through the EC circuits.

For Pauli noise on a codeword, every ancilla used as a control is in a
definite basis state, so a multi-controlled correction either fires or not.
Tracking the error as X/Z bit arrays (one row per trial) is then exact, and
much cheaper than carrying state vectors.  The reference value of each
control is read off a noiseless state-vector run, which also checks that it is
deterministic.
"""
from __future__ import annotations

import numpy as np

from . import qsim
from .codes import Circuit, CodeSpec, Erase, encoded_state, pauli_bits


def reference_controls(code: CodeSpec, circuit: Circuit, tol: float = 1e-9) -> list[tuple[int, ...] | None]:
    """Control values seen by each multi-controlled gate in a noiseless run."""
    rng = np.random.default_rng(0)
    state = encoded_state(code, qsim.random_qubit(rng), seed=rng)
    out: list[tuple[int, ...] | None] = []
    for g in circuit.gates:
        if isinstance(g, qsim.Gate) and g.name in ("MCX", "MCZ"):
            vals = []
            for c in g.controls:
                p1 = state.probability_one(c)
                if tol < p1 < 1 - tol:
                    raise ValueError(f"control {c} of {g} is not in a definite basis state")
                vals.append(int(p1 > 0.5))
            out.append(tuple(vals))
        else:
            out.append(None)
        if isinstance(g, Erase):
            qsim.erase(state, g.target)
        else:
            qsim.apply_gate(state, g)
    return out


class FrameSimulator:
    """Propagates a batch of Pauli frames through one code's EC circuit."""

    def __init__(self, code: CodeSpec, circuit: Circuit | None = None):
        self.code = code
        self.circuit = circuit or code.ec()
        self.reference = reference_controls(code, self.circuit)
        self.n = self.circuit.n_wires
        self._lx_x, self._lx_z = pauli_bits(code.logical_x)
        self._lz_x, self._lz_z = pauli_bits(code.logical_z)

    def run(self, x: np.ndarray, z: np.ndarray) -> None:
        """Advance frames ``x``, ``z`` (shape ``(trials, n_wires)``, bool) in place."""
        for g, ref in zip(self.circuit.gates, self.reference):
            if isinstance(g, Erase):
                x[:, g.target] = False
                z[:, g.target] = False
                continue
            t = g.target
            if g.name == "H":
                tmp = x[:, t].copy()
                x[:, t] = z[:, t]
                z[:, t] = tmp
            elif g.name in ("S", "SDG"):
                z[:, t] ^= x[:, t]
            elif g.name == "CNOT":
                c = g.controls[0]
                x[:, t] ^= x[:, c]
                z[:, c] ^= z[:, t]
            elif g.name == "CZ":
                c = g.controls[0]
                z[:, t] ^= x[:, c]
                z[:, c] ^= x[:, t]
            elif g.name in ("MCX", "MCZ"):
                fire = np.ones(x.shape[0], dtype=bool)
                for c, pol, r in zip(g.controls, g.polarities, ref):
                    fire &= (x[:, c] ^ bool(r)) == bool(pol)
                # the frame only records the difference from the noiseless run
                if ref == g.polarities:
                    fire = ~fire
                if g.name == "MCX":
                    x[:, t] ^= fire
                else:
                    z[:, t] ^= fire
            # Pauli gates only change signs

    def logical_flips(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        """True where the data frame acts as a non-trivial logical operator.

        Assumes a trivial syndrome (true right after a complete EC round): the
        frame is then a logical error iff it anticommutes with logical X or Z.
        """
        d = self.code.n_data
        xd, zd = x[:, :d], z[:, :d]
        anti_x = (np.sum(xd & self._lx_z, axis=1) + np.sum(zd & self._lx_x, axis=1)) % 2 == 1
        anti_z = (np.sum(xd & self._lz_z, axis=1) + np.sum(zd & self._lz_x, axis=1)) % 2 == 1
        return anti_x | anti_z

    def syndrome(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        """Stabilizer eigenvalue flips of the data frame (``(trials, n_stab)``)."""
        d = self.code.n_data
        out = []
        for s in self.code.stabilizers:
            sx, sz = pauli_bits(s)
            out.append((np.sum(x[:, :d] & sz, axis=1) + np.sum(z[:, :d] & sx, axis=1)) % 2 == 1)
        return np.stack(out, axis=1)
