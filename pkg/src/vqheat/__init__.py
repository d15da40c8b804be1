"""Hybrid quantum/classical finite-element solver for 1-D steady-state heat problems.

Pipeline: assemble the FEM system (fem), decompose the stiffness matrix into
a linear combination of explicit circuits (decomp), minimize the projective
VQLS cost on a statevector simulator (qsim, ansatz, vqls), and report ansatz
quality metrics (metrics).  The cli module wires everything into runnable
experiments.
"""

from .ansatz import FAMILIES, AnsatzSpec, build_ansatz, prepare_state
from .decomp import LcuDecomposition, auto_unique_groups, concat_unique, decompose
from .fem import (
    BoundaryCondition,
    BoundarySpec,
    Forcing,
    Mesh1D,
    assemble_direct,
    classical_solve,
    condition_number,
    dirichlet0_bc,
    uniform_mesh,
)
from .metrics import (
    ent_capability,
    expressibility,
    fidelity_samples,
    haar_pdf,
    meyer_wallach_q,
)
from .qsim import Circuit, Gate, apply_circuit, circuit_unitary, hadamard_test, zero_state
from .vqls import (
    VqlsProblem,
    VqlsResult,
    cost_breakdown,
    cost_dense,
    extract_solution,
    optimize,
    solution_fidelity,
    warm_start_theta,
)

__version__ = "0.1.0"

__all__ = [
    "FAMILIES",
    "AnsatzSpec",
    "build_ansatz",
    "prepare_state",
    "LcuDecomposition",
    "auto_unique_groups",
    "concat_unique",
    "decompose",
    "BoundaryCondition",
    "BoundarySpec",
    "Forcing",
    "Mesh1D",
    "assemble_direct",
    "classical_solve",
    "condition_number",
    "dirichlet0_bc",
    "uniform_mesh",
    "ent_capability",
    "expressibility",
    "fidelity_samples",
    "haar_pdf",
    "meyer_wallach_q",
    "Circuit",
    "Gate",
    "apply_circuit",
    "circuit_unitary",
    "hadamard_test",
    "zero_state",
    "VqlsProblem",
    "VqlsResult",
    "cost_breakdown",
    "cost_dense",
    "extract_solution",
    "optimize",
    "solution_fidelity",
    "warm_start_theta",
]
