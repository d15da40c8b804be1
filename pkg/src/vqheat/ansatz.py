"""Fixed-structure Ry-based ansatz families and real-amplitude state preparation.

All four families use parameterized Ry rotations only, entangled with
parameter-free CZ, CX and H gates, so the reachable states are real vectors.

  A1: initial Ry layer; entangling sublayers alternate across layers between
      an even block (CZ on even nearest pairs plus the non-adjacent CZ(0,2))
      and an odd block (the ring closure CZ(n-1,0) plus CZ(0,2)), each
      followed by Ry on every qubit.
  A2: initial Ry layer; per layer CZ on even pairs (0,1),(2,3),..., Ry on
      every qubit, CZ on odd pairs (1,2),(3,4),... together with the ring
      closure (n-1,0) for even n, then Ry on the odd-pair qubits.
  A3: graph-state initializer (H on all qubits, CZ chain), initial Ry layer;
      per layer CX(1 -> 2), CX(0 -> 2), a CX chain across the middle qubits,
      H(0) and the CZ closure (n-1, 0), then Ry on every qubit.
  A4: initial Ry layer; entangling sublayers alternate across layers between
      CZ on even nearest pairs and CZ on odd nearest pairs, each augmented
      with CZ(0,2), followed by Ry on every qubit.

Parameter counts: A1/A3/A4 use n(L+1); A2 uses n + L*(n + 2*floor((n-1)/2))
(n + 6L for n = 4). The entangler layouts are fixed; their expressibility
and entanglement fingerprints are pinned down in the metrics tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qsim import CLOSED, Circuit, Gate

FAMILIES = ("A1", "A2", "A3", "A4")


@dataclass(frozen=True)
class AnsatzSpec:
    family: str
    n: int
    layers: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown ansatz family {self.family!r}")
        if self.layers < 1:
            raise ValueError("layer count must be positive")
        if not 1 <= self.n <= 12:
            raise ValueError("qubit count out of range")

    @property
    def parameter_count(self) -> int:
        n, L = self.n, self.layers
        if self.family == "A2":
            return n + L * (n + 2 * ((n - 1) // 2))
        return n * (L + 1)


def _cz(a: int, b: int) -> Gate:
    return Gate("z", (b,), ((a, CLOSED),))


def _cx(a: int, b: int) -> Gate:
    return Gate("x", (b,), ((a, CLOSED),))


def _h(q: int) -> Gate:
    return Gate("h", (q,))


def _ry_layer(qubits, thetas) -> list:
    return [Gate("ry", (q,), (), float(t)) for q, t in zip(qubits, thetas)]


def build_ansatz(spec: AnsatzSpec, theta: np.ndarray) -> Circuit:
    """Circuit V(theta) for the given family; |0> maps to a real state."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.parameter_count,):
        raise ValueError(
            f"expected {spec.parameter_count} parameters, got {theta.shape}"
        )
    n = spec.n
    gates = []
    k = 0
    even_pairs = [(q, q + 1) for q in range(0, n - 1, 2)]
    odd_pairs = [(q, q + 1) for q in range(1, n - 1, 2)]
    if spec.family == "A3" and n >= 2:
        gates += [_h(q) for q in range(n)]
        gates += [_cz(q, q + 1) for q in range(n - 1)]
    gates += _ry_layer(range(n), theta[k : k + n])
    k += n
    for layer in range(spec.layers):
        if spec.family == "A1":
            if layer % 2 == 0:
                pairs = list(even_pairs)
                if n >= 3:
                    pairs.append((0, 2))  # non-adjacent bridge
            else:
                pairs = [(n - 1, 0)] if n >= 2 else []
                if n >= 4:
                    pairs.append((0, 2))
            for a, b in pairs:
                gates.append(_cz(a, b))
            gates += _ry_layer(range(n), theta[k : k + n])
            k += n
        elif spec.family == "A2":
            for a, b in even_pairs:
                gates.append(_cz(a, b))
            gates += _ry_layer(range(n), theta[k : k + n])
            k += n
            for a, b in odd_pairs:
                gates.append(_cz(a, b))
            if n >= 4 and n % 2 == 0:
                gates.append(_cz(n - 1, 0))
            odd_qubits = [q for pair in odd_pairs for q in pair]
            gates += _ry_layer(odd_qubits, theta[k : k + len(odd_qubits)])
            k += len(odd_qubits)
        elif spec.family == "A3":
            if n == 2:
                gates += [_cx(0, 1), _h(0)]
            elif n >= 3:
                gates += [_cx(1, 2), _cx(0, 2)]
                gates += [_cx(q, q + 1) for q in range(2, n - 2)]
                gates += [_h(0), _cz(n - 1, 0)]
            gates += _ry_layer(range(n), theta[k : k + n])
            k += n
        else:  # A4
            pairs = list(even_pairs if layer % 2 == 0 or not odd_pairs else odd_pairs)
            if n >= 3:
                pairs.append((0, 2))
            for a, b in pairs:
                gates.append(_cz(a, b))
            gates += _ry_layer(range(n), theta[k : k + n])
            k += n
    assert k == spec.parameter_count
    return Circuit(n, gates)


def prepare_state(f: np.ndarray) -> Circuit:
    """Circuit U with U|0> = f/||f|| for a real signed vector of length 2^n.

    Uniformly controlled Ry rotation tree with analytically computed angles:
    internal levels rotate by 2*atan2(||lower half||, ||upper half||), the
    final level by 2*atan2(f_odd, f_even), which reproduces the signs exactly
    (no global phase)."""
    f = np.asarray(f, dtype=float)
    dim = f.shape[0]
    n = dim.bit_length() - 1
    if 1 << n != dim:
        raise ValueError("vector length must be a power of two")
    norm = np.linalg.norm(f)
    if norm == 0.0:
        raise ValueError("cannot prepare the zero vector")
    amps = f / norm
    gates = []
    # level m targets qubit n-1-m, controlled on the already-set higher qubits
    for m in range(n):
        target = n - 1 - m
        block = 1 << (n - m)       # subtree width at this level
        half = block >> 1
        segments = amps.reshape(-1, block)
        for pattern, seg in enumerate(segments):
            if m == n - 1:
                if seg[0] == 0.0 and seg[1] == 0.0:
                    continue
                angle = 2.0 * np.arctan2(seg[1], seg[0])
            else:
                lo = np.linalg.norm(seg[:half])
                hi = np.linalg.norm(seg[half:])
                if lo == 0.0 and hi == 0.0:
                    continue
                angle = 2.0 * np.arctan2(hi, lo)
            if angle == 0.0:
                continue
            controls = tuple(
                (n - 1 - b, CLOSED if (pattern >> (m - 1 - b)) & 1 else 0)
                for b in range(m)
            )
            gates.append(Gate("ry", (target,), controls, angle))
    return Circuit(n, gates)
