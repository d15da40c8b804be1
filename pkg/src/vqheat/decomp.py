"""Linear-combination-of-unitaries representation of the stiffness matrix.

Every term is a signed-permutation (or +-1 diagonal) unitary built
explicitly as a quantum circuit by a generator function, together with a
normative dense reference matrix used for verification.  Basis states are
0-indexed with qubit 0 as the least-significant bit.

Term vocabulary (N = 2^n):
  X_e        permutation swapping basis states e-1 and e,
  Xt_A       (A even) permutation swapping basis states A-1 and A+1,
  Z_s        diagonal with -1 on state s,
  Iminus_S   diagonal with -1 on every state in the set S.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .fem import BoundarySpec, Mesh1D
from .qsim import CLOSED, OPEN, Circuit, Gate, circuit_unitary

TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# generator functions
# ---------------------------------------------------------------------------

def generator_indices(e: int) -> Tuple[int, int]:
    """Unique (i, j) with e = 2^j (2i + 1): j trailing zero bits, i the rest."""
    if e < 1:
        raise ValueError("element index must be >= 1")
    j = (e & -e).bit_length() - 1
    i = e >> (j + 1)
    return i, j


def _pattern_controls(qubits: Sequence[int], pattern: int) -> Tuple[Tuple[int, int], ...]:
    """Controls on ``qubits`` matching the bits of ``pattern`` (LSB first)."""
    return tuple(
        (q, CLOSED if (pattern >> k) & 1 else OPEN) for k, q in enumerate(qubits)
    )


def _full_controls(n: int, exclude: int, state: int) -> Tuple[Tuple[int, int], ...]:
    """Controls on every qubit except ``exclude`` matching basis state ``state``."""
    return tuple(
        (q, CLOSED if (state >> q) & 1 else OPEN) for q in range(n) if q != exclude
    )


def _gray_ladder(n: int, start: int, flip_bits: Sequence[int]) -> List[Gate]:
    """Compute/uncompute ladder of fully controlled X gates swapping ``start``
    with the state reached by flipping all of ``flip_bits``.

    ``flip_bits`` is the flip order; the last one is the middle (pivot) gate.
    Depth is 2*len(flip_bits) - 1.
    """
    forward: List[Gate] = []
    cur = start
    for b in flip_bits[:-1]:
        forward.append(Gate("x", (b,), _full_controls(n, b, cur)))
        cur ^= 1 << b
    pivot_bit = flip_bits[-1]
    pivot = Gate("x", (pivot_bit,), _full_controls(n, pivot_bit, cur))
    return forward + [pivot] + forward[::-1]


def build_x_circuit(n: int, i: int, j: int, swap_as_layers: bool = False) -> Circuit:
    """Circuit whose unitary swaps basis states e-1 and e, e = 2^j (2i+1).

    j = 0: multi-controlled X on q0; j = 1: controlled swap of q0, q1 (or an
    equivalent three-layer controlled-X form when ``swap_as_layers``);
    j >= 2: gray-code ladder of depth 2j + 1.
    """
    if not 0 <= j <= n - 1:
        raise ValueError("j out of range")
    if not 0 <= i <= (1 << (n - j - 1)) - 1:
        raise ValueError("i out of range")
    if j == 0:
        controls = _pattern_controls(range(1, n), i)
        return Circuit(n, [Gate("x", (0,), controls)])
    if j == 1:
        controls = _pattern_controls(range(2, n), i)
        if not swap_as_layers:
            return Circuit(n, [Gate("swap", (0, 1), controls)])
        # CX(q0->q1), CX(q1->q0), CX(q0->q1) under the same outer controls
        g1 = Gate("x", (1,), controls + ((0, CLOSED),))
        g2 = Gate("x", (0,), controls + ((1, CLOSED),))
        return Circuit(n, [g1, g2, g1])
    e = (1 << j) * (2 * i + 1)
    start = e - 1  # bits 0..j-1 set, bit j clear, i above
    return Circuit(n, _gray_ladder(n, start, list(range(j, 0, -1)) + [0]))


def build_xtilde_circuit(n: int, i: int, j: int) -> Circuit:
    """Circuit whose unitary swaps basis states A-1 and A+1, A = 2^j (2i+1),
    with qubit 0 always close-controlled.

    j = 1: controlled X on q1; j >= 2: gray-code ladder of depth 2j - 1.
    """
    if not 1 <= j <= n - 1:
        raise ValueError("j out of range")
    if not 0 <= i <= (1 << (n - j - 1)) - 1:
        raise ValueError("i out of range")
    if j == 1:
        controls = ((0, CLOSED),) + _pattern_controls(range(2, n), i)
        return Circuit(n, [Gate("x", (1,), controls)])
    a = (1 << j) * (2 * i + 1)
    start = a - 1  # bit 0 and bits 1..j-1 set, bit j clear, i above
    return Circuit(n, _gray_ladder(n, start, list(range(j, 1, -1)) + [1]))


# ---------------------------------------------------------------------------
# boundary circuits
# ---------------------------------------------------------------------------

def _phase_circuit(n: int, state: int) -> Circuit:
    """Multi-controlled Z putting a -1 phase on a single basis state."""
    target = next((q for q in range(n) if (state >> q) & 1), None)
    if target is None:
        # phase on |0...0>: Ry(2pi) acts as -1 on the q0 pair {0, 1}; the
        # trailing controlled Z restores the sign of state 1.
        open_rest = _pattern_controls(range(1, n), 0)
        return Circuit(
            n,
            [
                Gate("ry", (0,), open_rest, TWO_PI),
                Gate("z", (0,), open_rest),
            ],
        )
    return Circuit(n, [Gate("z", (target,), _full_controls(n, target, state))])


def phase_circuit_mcz(n: int, state: int) -> Circuit:
    """Alternative -1-phase construction using only X and Z gates."""
    if state & 1:
        return _phase_circuit(n, state)
    flank = Gate("x", (0,), _full_controls(n, 0, state))
    z = Gate("z", (0,), _full_controls(n, 0, state))
    return Circuit(n, [flank, z, flank])


def pair_phase_circuit(n: int, state_pair_base: int) -> Circuit:
    """-1 phase on the q0 pair {base, base+1} (base even): Ry(2pi) on q0."""
    controls = _pattern_controls(range(1, n), state_pair_base >> 1)
    return Circuit(n, [Gate("ry", (0,), controls, TWO_PI)])


# ---------------------------------------------------------------------------
# reference matrices (normative)
# ---------------------------------------------------------------------------

def swap_matrix(N: int, a: int, b: int) -> np.ndarray:
    m = np.eye(N)
    m[[a, b], [a, b]] = 0.0
    m[a, b] = m[b, a] = 1.0
    return m


def diag_matrix(N: int, minus_states: Iterable[int]) -> np.ndarray:
    d = np.ones(N)
    for s in minus_states:
        d[s] = -1.0
    return np.diag(d)


# ---------------------------------------------------------------------------
# terms and decompositions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TermLabel:
    kind: str                      # 'identity' | 'x' | 'xtilde' | 'z' | 'iminus'
    index: Optional[int] = None    # element or basis-state index
    boundary: bool = False         # term stems from a boundary element / penalty

    def __str__(self) -> str:
        tag = self.kind if self.index is None else f"{self.kind}_{self.index}"
        return tag + ("_b" if self.boundary else "")


@dataclass(frozen=True)
class UnitaryTerm:
    coefficient: float
    circuit: Circuit
    label: TermLabel
    reference_matrix: Optional[np.ndarray] = None

    def matrix(self) -> np.ndarray:
        return circuit_unitary(self.circuit)


@dataclass
class LcuDecomposition:
    n: int
    terms: List[UnitaryTerm]

    @property
    def N(self) -> int:
        return 1 << self.n

    def coefficients(self) -> np.ndarray:
        return np.array([t.coefficient for t in self.terms])

    def reconstruct(self) -> np.ndarray:
        """Sum c_l * circuit_unitary(term_l); must equal the assembled K."""
        total = np.zeros((self.N, self.N), dtype=complex)
        for t in self.terms:
            total += t.coefficient * t.matrix()
        return total.real if np.allclose(total.imag, 0, atol=1e-12) else total


def _x_term(n: int, e: int, coeff: float, boundary: bool = False) -> UnitaryTerm:
    i, j = generator_indices(e)
    return UnitaryTerm(
        coeff,
        build_x_circuit(n, i, j),
        TermLabel("x", e, boundary),
        swap_matrix(1 << n, e - 1, e),
    )


def _xtilde_term(n: int, a: int, coeff: float) -> UnitaryTerm:
    i, j = generator_indices(a)
    if j < 1:
        raise ValueError("xtilde index must be even")
    return UnitaryTerm(
        coeff,
        build_xtilde_circuit(n, i, j),
        TermLabel("xtilde", a),
        swap_matrix(1 << n, a - 1, a + 1),
    )


def _z_term(n: int, state: int, coeff: float, index: int) -> UnitaryTerm:
    return UnitaryTerm(
        coeff,
        _phase_circuit(n, state),
        TermLabel("z", index, boundary=True),
        diag_matrix(1 << n, [state]),
    )


def _iminus_term(
    n: int, states: Sequence[int], coeff: float, index: int
) -> UnitaryTerm:
    if len(states) == 2 and states[1] == states[0] + 1 and states[0] % 2 == 0:
        circ = pair_phase_circuit(n, states[0])
    else:
        circ = Circuit(n, [g for s in states for g in _phase_circuit(n, s).gates])
    return UnitaryTerm(
        coeff, circ, TermLabel("iminus", index, boundary=True),
        diag_matrix(1 << n, states),
    )


def _identity_term(n: int, coeff: float) -> UnitaryTerm:
    return UnitaryTerm(coeff, Circuit(n, []), TermLabel("identity"), np.eye(1 << n))


def build_boundary_circuits(n: int, order: str, bc: BoundarySpec) -> List[UnitaryTerm]:
    """Boundary unitaries (unit coefficients) for sides with homogeneous
    Dirichlet condensation; used standalone for verification."""
    N = 1 << n
    terms: List[UnitaryTerm] = []
    if order == "linear":
        if bc.left.eliminated:
            terms.append(_iminus_term(n, [0], 1.0, 0))
        if bc.right.eliminated:
            terms.append(_iminus_term(n, [N - 1], 1.0, N))
        return terms
    n_el = 1 << (n - 1)
    nt = N - 1  # internal node count
    if bc.left.eliminated:
        terms.append(_z_term(n, 1, 1.0, 0))
        terms.append(_iminus_term(n, [0, 1], 1.0, 1))
    if bc.right.eliminated:
        # the -1 phase sits on the row with condensed diagonal 7, state nt-2
        terms.append(_z_term(n, nt - 2, 1.0, n_el - 1))
        terms.append(_iminus_term(n, [nt - 2, nt - 1], 1.0, 2 * (n_el - 1)))
        terms.append(_iminus_term(n, [N - 1], 1.0, 2 * n_el))
    return terms


def decompose(mesh: Mesh1D, bc: BoundarySpec) -> LcuDecomposition:
    """Explicit LCU of the assembled stiffness matrix for this mesh and BCs.

    Linear elements support every boundary combination; quadratic elements
    require a homogeneous Dirichlet condition on the left (the circuit
    library only provides swaps centered on even states, which pins the
    left-boundary row numbering).
    """
    mesh.validate_against(bc)
    n = mesh.n
    if mesh.order == "linear":
        return _decompose_linear(mesh, bc)
    if not bc.left.eliminated:
        raise ValueError(
            "quadratic decomposition requires homogeneous Dirichlet on the left"
        )
    return _decompose_quadratic(mesh, bc)


def _decompose_linear(mesh: Mesh1D, bc: BoundarySpec) -> LcuDecomposition:
    n, N = mesh.n, 1 << mesh.n
    h, c = mesh.lengths, mesh.coeffs
    n_el = mesh.n_el
    c_id = 0.0
    terms: List[UnitaryTerm] = []
    shift = 0 if bc.left.eliminated else 1  # row of element e's left node = e-1+shift
    first_full = 1 if bc.left.eliminated else 0
    last_full = n_el - 2 if bc.right.eliminated else n_el - 1
    if bc.left.eliminated:
        c_id += c[0] / (2.0 * h[0])
        terms.append(_iminus_term(n, [0], -c[0] / (2.0 * h[0]), 0))
    elif bc.left.kind == "dirichlet":
        c_id += bc.left.penalty / 2.0
        terms.append(_iminus_term(n, [0], -bc.left.penalty / 2.0, 0))
    for e in range(first_full, last_full + 1):
        w = c[e] / h[e]
        c_id += w
        terms.append(_x_term(n, e + shift, -w))
    if bc.right.eliminated:
        w = c[n_el - 1] / (2.0 * h[n_el - 1])
        c_id += w
        terms.append(_iminus_term(n, [N - 1], -w, n_el))
    elif bc.right.kind == "dirichlet":
        c_id += bc.right.penalty / 2.0
        terms.append(_iminus_term(n, [N - 1], -bc.right.penalty / 2.0, n_el))
    return LcuDecomposition(n, [_identity_term(n, c_id)] + terms)


def _decompose_quadratic(mesh: Mesh1D, bc: BoundarySpec) -> LcuDecomposition:
    n, N = mesh.n, 1 << mesh.n
    h, c = mesh.lengths, mesh.coeffs
    n_el = mesh.n_el
    nt = N - 1
    c_id = 0.0
    terms: List[UnitaryTerm] = []

    # left boundary element (condensed)
    w = c[0] / h[0]
    c_id += 2.5 * w
    terms.append(_z_term(n, 1, 1.5 * w, 0))
    terms.append(_x_term(n, 1, -(8.0 / 3.0) * w, boundary=True))
    terms.append(_iminus_term(n, [0, 1], -(4.0 / 3.0) * w, 1))

    def add_internal(e: int) -> None:
        w = c[e] / h[e]
        terms.append(_x_term(n, 2 * e, -(8.0 / 3.0) * w))
        terms.append(_x_term(n, 2 * e + 1, -(8.0 / 3.0) * w))
        terms.append(_xtilde_term(n, 2 * e, (1.0 / 3.0) * w))

    for e in range(1, n_el - 1):
        c_id += 5.0 * c[e] / h[e]
        add_internal(e)

    e = n_el - 1
    w = c[e] / h[e]
    if bc.right.eliminated:
        c_id += 2.5 * w
        terms.append(_z_term(n, nt - 2, 1.5 * w, e))
        terms.append(_x_term(n, 2 * e, -(8.0 / 3.0) * w, boundary=True))
        terms.append(_iminus_term(n, [nt - 2, nt - 1], -(4.0 / 3.0) * w, 2 * e))
        # auxiliary degree of freedom: (1/2)(I - Iminus on the last state)
        terms.append(_identity_term(n, 0.5))
        terms.append(_iminus_term(n, [N - 1], -0.5, 2 * n_el))
    else:
        c_id += 5.0 * w
        add_internal(e)
        if bc.right.kind == "dirichlet":
            c_id += bc.right.penalty / 2.0
            terms.append(
                _iminus_term(n, [N - 1], -bc.right.penalty / 2.0, 2 * n_el)
            )
    return LcuDecomposition(n, [_identity_term(n, c_id)] + terms)


# ---------------------------------------------------------------------------
# unique-element concatenation
# ---------------------------------------------------------------------------

def _term_support(term: UnitaryTerm) -> frozenset:
    """Basis states the term acts on (swap pair or -1 diagonal entries)."""
    if term.label.kind == "x":
        return frozenset((term.label.index - 1, term.label.index))
    if term.label.kind == "xtilde":
        return frozenset((term.label.index - 1, term.label.index + 1))
    m = term.reference_matrix
    return frozenset(np.where(np.diag(m) < 0)[0].tolist())


def concat_unique(
    decomp: LcuDecomposition, groups: Sequence[Sequence[int]]
) -> LcuDecomposition:
    """Merge groups of terms (given by index into ``decomp.terms``) into
    single concatenated-circuit terms with the shared coefficient.

    Group members must share their coefficient and act on disjoint basis
    states; indices not mentioned in any group pass through unchanged.
    For such terms (involutions that are the identity off their support)
    the sum of k members equals their product plus (k-1) identities, so
    the identity coefficient absorbs coeff * (k-1) per merged group; all
    identity terms are folded into one.  The reconstruction property is
    preserved exactly.
    """
    used = [i for g in groups for i in g]
    if len(set(used)) != len(used):
        raise ValueError("groups overlap")
    out: List[Optional[UnitaryTerm]] = list(decomp.terms)
    identity_shift = 0.0
    for g in groups:
        members = [decomp.terms[i] for i in g]
        if any(t.label.kind == "identity" for t in members) and len(g) > 1:
            raise ValueError("identity terms are merged automatically, not grouped")
        if members[0].label.kind == "identity":
            continue
        coeff = members[0].coefficient
        if any(abs(t.coefficient - coeff) > 1e-12 * max(1.0, abs(coeff)) for t in members):
            raise ValueError("group members have mismatched coefficients")
        support: set = set()
        for t in members:
            s = _term_support(t)
            if support & s:
                raise ValueError("group members act on overlapping states")
            support |= s
        gates = [gate for t in members for gate in t.circuit.gates]
        ref = np.eye(decomp.N)
        for t in members:
            ref = t.reference_matrix @ ref
        label = TermLabel(
            members[0].label.kind + "_uq",
            members[0].label.index,
            members[0].label.boundary,
        )
        merged_term = UnitaryTerm(coeff, Circuit(decomp.n, gates), label, ref)
        identity_shift += coeff * (len(members) - 1)
        out[g[0]] = merged_term
        for i in g[1:]:
            out[i] = None
    terms = [t for t in out if t is not None]
    if identity_shift != 0.0:
        identity_coeff = identity_shift + sum(
            t.coefficient for t in terms if t.label.kind == "identity"
        )
        terms = [t for t in terms if t.label.kind != "identity"]
        terms = [_identity_term(decomp.n, identity_coeff)] + terms
    return LcuDecomposition(decomp.n, terms)


def auto_unique_groups(decomp: LcuDecomposition) -> List[List[int]]:
    """Greedy grouping of non-identity terms that share coefficient and kind,
    packing disjoint supports; boundary-derived terms only merge with other
    boundary-derived terms.  Terms are kept in element order inside a group."""
    buckets = {}
    for idx, term in enumerate(decomp.terms):
        if term.label.kind == "identity":
            continue
        key = (term.label.kind, term.label.boundary, round(term.coefficient, 12))
        buckets.setdefault(key, []).append(idx)
    groups: List[List[int]] = []
    for key, indices in buckets.items():
        open_groups: List[Tuple[List[int], set]] = []
        for idx in indices:
            s = _term_support(decomp.terms[idx])
            for g, sup in open_groups:
                if not (sup & s):
                    g.append(idx)
                    sup |= s
                    break
            else:
                open_groups.append(([idx], set(s)))
        groups.extend(g for g, _ in open_groups if len(g) > 1)
    return groups
