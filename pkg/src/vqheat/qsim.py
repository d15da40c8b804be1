"""Exact statevector simulation of multi-controlled real-amplitude circuits.

Qubit ordering convention: qubit 0 is the least-significant bit of the
basis-state index, i.e. basis state |b_{n-1}...b_1 b_0> has index
sum_k b_k 2^k.  Every matrix in this package is defined against this
convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Literal, Optional, Tuple

import numpy as np

MAX_QUBITS = 12
MAX_DENSE_QUBITS = 10

GateKind = Literal["x", "z", "h", "ry", "swap"]

OPEN, CLOSED = 0, 1


@dataclass(frozen=True)
class Gate:
    """A single gate: kind, target qubit(s) and a multi-control spec.

    ``controls`` is a tuple of (qubit, polarity) pairs where polarity 1
    means close-controlled (fires on |1>) and 0 open-controlled (fires
    on |0>).
    """

    kind: GateKind
    targets: Tuple[int, ...]
    controls: Tuple[Tuple[int, int], ...] = ()
    angle: float = 0.0

    def __post_init__(self):
        if self.kind == "swap":
            if len(self.targets) != 2 or self.targets[0] == self.targets[1]:
                raise ValueError("swap needs two distinct targets")
        elif len(self.targets) != 1:
            raise ValueError(f"{self.kind} takes exactly one target")
        if self.kind == "ry" and not np.isfinite(self.angle):
            raise ValueError("ry angle must be finite")
        cq = [q for q, _ in self.controls]
        if len(set(cq)) != len(cq):
            raise ValueError("duplicate control qubits")
        if set(cq) & set(self.targets):
            raise ValueError("control qubit coincides with a target")
        for _, pol in self.controls:
            if pol not in (OPEN, CLOSED):
                raise ValueError("control polarity must be 0 (open) or 1 (closed)")

    def inverse(self) -> "Gate":
        if self.kind == "ry":
            return Gate("ry", self.targets, self.controls, -self.angle)
        return self  # x, z, h, swap are involutions


class Circuit:
    """An ordered gate list on ``n`` qubits.  Treated as an immutable value."""

    def __init__(self, n: int, gates: Iterable[Gate] = ()):
        if not 1 <= n <= MAX_QUBITS:
            raise ValueError(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")
        self.n = n
        self.gates = tuple(gates)
        for g in self.gates:
            qubits = set(g.targets) | {q for q, _ in g.controls}
            if any(q < 0 or q >= n for q in qubits):
                raise ValueError(f"gate {g} out of range for n={n}")
        self._compiled = None

    def __add__(self, other: "Circuit") -> "Circuit":
        if self.n != other.n:
            raise ValueError("qubit count mismatch")
        return Circuit(self.n, self.gates + other.gates)

    def inverse(self) -> "Circuit":
        return Circuit(self.n, tuple(g.inverse() for g in reversed(self.gates)))

    def controlled(self) -> "Circuit":
        """Same circuit on n+1 qubits with the new top qubit (index n) added
        as a closed control to every gate."""
        anc = self.n
        gates = [
            Gate(g.kind, g.targets, g.controls + ((anc, CLOSED),), g.angle)
            for g in self.gates
        ]
        return Circuit(self.n + 1, gates)

    def compiled(self):
        if self._compiled is None:
            self._compiled = [_compile_gate(g, self.n) for g in self.gates]
        return self._compiled


def _control_mask(idx: np.ndarray, controls) -> np.ndarray:
    ok = np.ones(idx.shape, dtype=bool)
    for q, pol in controls:
        bit = (idx >> q) & 1
        ok &= bit == pol
    return ok


def _compile_gate(gate: Gate, n: int):
    """Precompute index arrays so repeated application is a few fancy-index ops."""
    idx = np.arange(1 << n)
    ok = _control_mask(idx, gate.controls)
    if gate.kind in ("x", "h", "ry"):
        t = gate.targets[0]
        i0 = idx[ok & (((idx >> t) & 1) == 0)]
        i1 = i0 | (1 << t)
        if gate.kind == "x":
            return ("pairswap", i0, i1)
        if gate.kind == "h":
            return ("mix2", i0, i1, np.array([[1, 1], [1, -1]]) / np.sqrt(2.0))
        c, s = np.cos(gate.angle / 2.0), np.sin(gate.angle / 2.0)
        return ("mix2", i0, i1, np.array([[c, -s], [s, c]]))
    if gate.kind == "z":
        t = gate.targets[0]
        sel = idx[ok & (((idx >> t) & 1) == 1)]
        return ("phase", sel)
    # swap
    t1, t2 = gate.targets
    sel = idx[ok & (((idx >> t1) & 1) == 1) & (((idx >> t2) & 1) == 0)]
    return ("pairswap", sel, sel ^ ((1 << t1) | (1 << t2)))


def zero_state(n: int) -> np.ndarray:
    state = np.zeros(1 << n, dtype=complex)
    state[0] = 1.0
    return state


def basis_state(n: int, k: int) -> np.ndarray:
    state = np.zeros(1 << n, dtype=complex)
    state[k] = 1.0
    return state


def _apply_compiled(state: np.ndarray, op) -> np.ndarray:
    out = state.copy()
    if op[0] == "pairswap":
        _, i0, i1 = op
        out[i0], out[i1] = state[i1], state[i0]
    elif op[0] == "phase":
        out[op[1]] *= -1.0
    else:  # mix2
        _, i0, i1, m = op
        a, b = state[i0], state[i1]
        out[i0] = m[0, 0] * a + m[0, 1] * b
        out[i1] = m[1, 0] * a + m[1, 1] * b
    return out


def apply_gate(state: np.ndarray, gate: Gate, n: Optional[int] = None) -> np.ndarray:
    """Apply one gate, returning a new statevector (input untouched)."""
    if n is None:
        n = _infer_n(state)
    return _apply_compiled(state, _compile_gate(gate, n))


def apply_circuit(state: np.ndarray, circuit: Circuit) -> np.ndarray:
    if state.shape[0] != (1 << circuit.n):
        raise ValueError("statevector length does not match circuit qubit count")
    for op in circuit.compiled():
        state = _apply_compiled(state, op)
    return state


def _infer_n(state: np.ndarray) -> int:
    dim = state.shape[0]
    n = dim.bit_length() - 1
    if 1 << n != dim:
        raise ValueError("statevector length is not a power of two")
    return n


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense 2^n x 2^n unitary of the circuit (column k = circuit|k>)."""
    if circuit.n > MAX_DENSE_QUBITS:
        raise ValueError(f"dense unitary limited to n <= {MAX_DENSE_QUBITS}")
    mat = np.eye(1 << circuit.n, dtype=complex)
    # gate application is vectorized over columns: rows are basis indices
    for op in circuit.compiled():
        mat = _apply_compiled(mat, op)
    return mat


def inner_product(a: np.ndarray, b: np.ndarray) -> complex:
    """<a|b> with conjugation on ``a``."""
    if a.shape != b.shape:
        raise ValueError("statevector size mismatch")
    return complex(np.vdot(a, b))


def hadamard_test(
    circuit_u: Circuit,
    prep: Circuit,
    shots: Optional[int] = None,
    seed: Optional[int] = None,
) -> float:
    """Re<psi|U|psi> for |psi> = prep|0>.

    Exact mode (``shots=None``) evaluates the overlap directly.  Shots mode
    builds the ancilla circuit (H on ancilla, U closed-controlled on the
    ancilla gate by gate, H on ancilla), samples the ancilla and returns
    P(0) - P(1).
    """
    if circuit_u.n != prep.n:
        raise ValueError("circuit_u and prep must share the qubit count")
    if shots is None:
        psi = apply_circuit(zero_state(prep.n), prep)
        return float(np.real(inner_product(psi, apply_circuit(psi, circuit_u))))
    if shots < 1:
        raise ValueError("shot count must be >= 1")
    if seed is None:
        raise ValueError("shots mode requires a seed")
    n = prep.n
    anc = n
    gates = [Gate("h", (anc,))]
    gates += [Gate(g.kind, g.targets, g.controls, g.angle) for g in prep.gates]
    gates += circuit_u.controlled().gates
    gates.append(Gate("h", (anc,)))
    state = apply_circuit(zero_state(n + 1), Circuit(n + 1, gates))
    probs = np.abs(state) ** 2
    p0 = float(np.sum(probs[: 1 << n]))
    p0 = min(max(p0, 0.0), 1.0)
    rng = np.random.default_rng(seed)
    k0 = rng.binomial(shots, p0)
    return (2.0 * k0 - shots) / shots
