"""Expressibility and entanglement-capability measures."""

import numpy as np

from vqheat.ansatz import AnsatzSpec, build_ansatz
from vqheat.metrics import (
    _haar_bin_mass,
    ent_capability,
    expressibility,
    fidelity_samples,
    haar_pdf,
    meyer_wallach_q,
)
from vqheat.qsim import Circuit, Gate, apply_circuit, zero_state


def random_state(n, rng):
    psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return psi / np.linalg.norm(psi)


def mw_brute_force(state):
    """Meyer-Wallach Q via explicit density matrices and partial traces."""
    n = state.shape[0].bit_length() - 1
    rho = np.outer(state, state.conj())
    total = 0.0
    for k in range(n):
        # reorder axes so qubit k is first, then trace out the rest
        psi = state.reshape([2] * n)            # axes: qubit n-1 ... qubit 0
        psi = np.moveaxis(psi, n - 1 - k, 0).reshape(2, -1)
        rho_k = psi @ psi.conj().T
        total += float(np.real(np.trace(rho_k @ rho_k)))
    return 2.0 * (1.0 - total / n)


def test_haar_pdf_normalization_and_shape():
    grid = np.linspace(0.0, 1.0, 200_001)
    for dim in (4, 8, 16):
        pdf = haar_pdf(grid, dim)
        assert abs(np.trapezoid(pdf, grid) - 1.0) < 1e-6
        assert pdf[-1] == 0.0 if dim > 2 else True
        assert np.all(pdf >= 0.0)


def test_haar_bin_mass_sums_to_one():
    for bins in (10, 75):
        edges = np.linspace(0.0, 1.0, bins + 1)
        for dim in (4, 16):
            mass = _haar_bin_mass(edges, dim)
            assert abs(np.sum(mass) - 1.0) < 1e-12
            assert np.all(mass > 0.0)


def test_meyer_wallach_range_and_known_states():
    # product state
    assert abs(meyer_wallach_q(zero_state(3))) < 1e-14
    # GHZ and Bell states are maximally entangled under Q
    ghz = np.zeros(8, dtype=complex)
    ghz[0] = ghz[7] = 1.0 / np.sqrt(2.0)
    assert abs(meyer_wallach_q(ghz) - 1.0) < 1e-14
    bell = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / np.sqrt(2.0)
    assert abs(meyer_wallach_q(bell) - 1.0) < 1e-14


def test_meyer_wallach_matches_brute_force():
    rng = np.random.default_rng(61)
    for _ in range(50):
        n = int(rng.integers(2, 6))
        psi = random_state(n, rng)
        assert abs(meyer_wallach_q(psi) - mw_brute_force(psi)) < 1e-10


def test_meyer_wallach_invariant_under_local_rotations():
    rng = np.random.default_rng(62)
    for _ in range(10):
        psi = random_state(4, rng)
        gates = [Gate("ry", (q,), (), float(rng.uniform(0, 2 * np.pi)))
                 for q in range(4)]
        rotated = apply_circuit(psi, Circuit(4, gates))
        assert abs(meyer_wallach_q(psi) - meyer_wallach_q(rotated)) < 1e-10


def test_purity_equals_squared_singular_values():
    rng = np.random.default_rng(63)
    psi = random_state(4, rng)
    n = 4
    total = 0.0
    for k in range(n):
        m = np.moveaxis(psi.reshape([2] * n), n - 1 - k, 0).reshape(2, -1)
        sv = np.linalg.svd(m, compute_uv=False)
        total += float(np.sum(sv**4))
    assert abs(meyer_wallach_q(psi) - 2.0 * (1.0 - total / n)) < 1e-12


def test_entangler_free_circuit_has_zero_ent():
    # Ry-only product circuit: Q vanishes for every parameter draw
    rng = np.random.default_rng(64)
    for _ in range(100):
        gates = [Gate("ry", (q,), (), float(rng.uniform(0, 2 * np.pi)))
                 for q in range(4)]
        psi = apply_circuit(zero_state(4), Circuit(4, gates))
        assert abs(meyer_wallach_q(psi)) < 1e-12


def test_identity_ansatz_expressibility_is_large():
    # all fidelities equal 1: KL against Haar concentrates in the last bin
    bins, dim, pairs = 75, 16, 1000
    edges = np.linspace(0.0, 1.0, bins + 1)
    counts, _ = np.histogram(np.ones(pairs), bins=edges)
    p = counts / pairs
    q = _haar_bin_mass(edges, dim)
    mask = p > 0
    kl = float(np.sum(p[mask] * np.log(p[mask] / q[mask])))
    assert kl >= 3.0


def test_expressibility_deterministic_and_positive():
    spec = AnsatzSpec("A1", 3, 2)
    a = expressibility(spec, pairs=300, bins=40, seed=5)
    b = expressibility(spec, pairs=300, bins=40, seed=5)
    assert a == b
    assert a >= 0.0


def test_fidelity_samples_in_unit_interval():
    spec = AnsatzSpec("A2", 3, 2)
    fids = fidelity_samples(spec, pairs=200, seed=6)
    assert fids.shape == (200,)
    assert np.all(fids >= 0.0) and np.all(fids <= 1.0 + 1e-12)


def test_ent_capability_deterministic_and_bounded():
    spec = AnsatzSpec("A4", 3, 2)
    a = ent_capability(spec, samples=300, seed=7)
    b = ent_capability(spec, samples=300, seed=7)
    assert a == b
    assert 0.0 <= a <= 1.0
