"""Unitary decomposition checks against the dense assembly oracle."""

import numpy as np
import pytest

from vqheat.decomp import (
    auto_unique_groups,
    build_x_circuit,
    build_xtilde_circuit,
    concat_unique,
    decompose,
    diag_matrix,
    generator_indices,
    swap_matrix,
)
from vqheat.fem import (
    BoundaryCondition,
    BoundarySpec,
    Forcing,
    Mesh1D,
    assemble_direct,
    dirichlet0_bc,
    element_count,
    uniform_mesh,
)
from vqheat.qsim import circuit_unitary

D0 = BoundaryCondition("dirichlet0")


def random_mesh(n, order, bc, rng):
    n_el = element_count(n, order, bc)
    h = rng.uniform(0.5, 2.0, n_el)
    c = rng.uniform(0.5, 2.0, n_el)
    return Mesh1D(0.0, float(np.sum(h)), order, tuple(h), tuple(c), n)


def test_generator_indices_roundtrip():
    for e in range(1, 64):
        i, j = generator_indices(e)
        assert e == (1 << j) * (2 * i + 1)
    with pytest.raises(ValueError):
        generator_indices(0)


def test_x_circuit_swaps_adjacent_states():
    for n in (2, 3, 4):
        for e in range(1, 1 << n):
            i, j = generator_indices(e)
            u = circuit_unitary(build_x_circuit(n, i, j))
            assert np.max(np.abs(u - swap_matrix(1 << n, e - 1, e))) < 1e-12


def test_x_circuit_swap_as_layers_variant():
    u_a = circuit_unitary(build_x_circuit(4, 1, 1))
    u_b = circuit_unitary(build_x_circuit(4, 1, 1, swap_as_layers=True))
    assert np.max(np.abs(u_a - u_b)) < 1e-12


def test_xtilde_circuit_swaps_next_nearest_states():
    for n in (3, 4):
        for j in range(1, n):
            for i in range(1 << (n - j - 1)):
                a = (1 << j) * (2 * i + 1)
                u = circuit_unitary(build_xtilde_circuit(n, i, j))
                assert np.max(np.abs(u - swap_matrix(1 << n, a - 1, a + 1))) < 1e-12


def test_reconstruction_small_cases():
    rng = np.random.default_rng(31)
    bcs = [
        dirichlet0_bc(),
        BoundarySpec(D0, BoundaryCondition("neumann", 0.0)),
        BoundarySpec(BoundaryCondition("dirichlet", 1.0, 100.0), D0),
        BoundarySpec(
            BoundaryCondition("dirichlet", 0.5, 40.0),
            BoundaryCondition("neumann", 0.0),
        ),
    ]
    for order in ("linear", "quadratic"):
        for bc in bcs:
            if order == "quadratic" and not bc.left.eliminated:
                continue
            for n in (2, 3):
                mesh = random_mesh(n, order, bc, rng)
                k_ref = assemble_direct(mesh, bc, Forcing((1.0,))).K
                dec = decompose(mesh, bc)
                assert np.max(np.abs(dec.reconstruct() - k_ref)) < 1e-12


def test_term_counts_linear_dirichlet():
    for n in (2, 3, 4):
        mesh = random_mesh(n, "linear", dirichlet0_bc(), np.random.default_rng(n))
        dec = decompose(mesh, dirichlet0_bc())
        assert len(dec.terms) == (1 << n) + 2


def test_term_counts_quadratic_dirichlet():
    for n in (2, 3, 4):
        mesh = random_mesh(n, "quadratic", dirichlet0_bc(), np.random.default_rng(n))
        dec = decompose(mesh, dirichlet0_bc())
        n_el = mesh.n_el
        # 3 n_el + 1 volume terms plus the auxiliary-dof pair
        assert len(dec.terms) == 3 * n_el + 1 + 2


def test_concat_unique_counts_on_uniform_meshes():
    bc = dirichlet0_bc()
    mesh = uniform_mesh(4, "linear", bc)
    dec = decompose(mesh, bc)
    grouped = concat_unique(dec, auto_unique_groups(dec))
    assert len(grouped.terms) == 4
    mesh_q = uniform_mesh(4, "quadratic", bc)
    dec_q = decompose(mesh_q, bc)
    grouped_q = concat_unique(dec_q, auto_unique_groups(dec_q))
    assert len(grouped_q.terms) == 8 + 1


def test_concat_unique_preserves_reconstruction():
    rng = np.random.default_rng(32)
    bc = dirichlet0_bc()
    for order in ("linear", "quadratic"):
        # uniform h and c within each of two halves: partial grouping
        n_el = element_count(4, order, bc)
        h = np.concatenate([np.full(n_el // 2, 0.8), np.full(n_el - n_el // 2, 1.2)])
        c = np.concatenate([np.full(n_el // 2, 1.5), np.full(n_el - n_el // 2, 2.0)])
        mesh = Mesh1D(0.0, float(np.sum(h)), order, tuple(h), tuple(c), 4)
        dec = decompose(mesh, bc)
        grouped = concat_unique(dec, auto_unique_groups(dec))
        assert len(grouped.terms) < len(dec.terms)
        assert np.max(np.abs(grouped.reconstruct() - dec.reconstruct())) < 1e-12


def test_concat_unique_rejects_bad_groups():
    bc = dirichlet0_bc()
    dec = decompose(uniform_mesh(3, "linear", bc), bc)
    x_terms = [i for i, t in enumerate(dec.terms) if t.label.kind == "x"]
    with pytest.raises(ValueError):
        concat_unique(dec, [[x_terms[0], x_terms[0]]])
    with pytest.raises(ValueError):
        # adjacent elements share a basis state
        concat_unique(dec, [[x_terms[0], x_terms[1]]])


def test_quadratic_left_penalty_rejected():
    bc = BoundarySpec(BoundaryCondition("dirichlet", 1.0, 100.0), D0)
    mesh = random_mesh(3, "quadratic", bc, np.random.default_rng(33))
    with pytest.raises(ValueError):
        decompose(mesh, bc)


def test_helper_matrices():
    s = swap_matrix(4, 1, 2)
    assert np.allclose(s @ s, np.eye(4))
    assert s[1, 2] == 1.0 and s[2, 1] == 1.0 and s[0, 0] == 1.0
    d = diag_matrix(4, [0, 3])
    assert np.allclose(np.diag(d), [-1.0, 1.0, 1.0, -1.0])
