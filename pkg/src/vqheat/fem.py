"""Classical 1-D FEM for the steady-state heat equation c(x) u'' + b(x) = 0.

Meshing, element stiffness, direct-stiffness assembly, consistent load
vectors, boundary-condition treatment (homogeneous/penalty Dirichlet and
Neumann), a dense solver used as the verification oracle, and
condition-number analysis.

System size is always N = 2^n unknowns.  Node-to-row bookkeeping:
a node eliminated by a homogeneous Dirichlet condition is dropped; a
penalty-Dirichlet or Neumann boundary node stays among the unknowns.  For
quadratic elements with homogeneous Dirichlet conditions on both ends an
auxiliary degree of freedom (diagonal 1, load 0) pads the system to 2^n.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

DEFAULT_PENALTY = 100.0

_GAUSS_2 = (np.array([-1.0, 1.0]) / np.sqrt(3.0), np.array([1.0, 1.0]))
_GAUSS_3 = (
    np.array([-np.sqrt(3.0 / 5.0), 0.0, np.sqrt(3.0 / 5.0)]),
    np.array([5.0, 8.0, 5.0]) / 9.0,
)


@dataclass(frozen=True)
class BoundaryCondition:
    """One side of the domain: 'dirichlet0', 'dirichlet' (penalty) or 'neumann'."""

    kind: str
    value: float = 0.0       # prescribed u for 'dirichlet', flux for 'neumann'
    penalty: float = DEFAULT_PENALTY

    def __post_init__(self):
        if self.kind not in ("dirichlet0", "dirichlet", "neumann"):
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "dirichlet" and self.penalty <= 0:
            raise ValueError("penalty must be positive")

    @property
    def eliminated(self) -> bool:
        """True when the boundary node is condensed out of the unknowns."""
        return self.kind == "dirichlet0"


@dataclass(frozen=True)
class BoundarySpec:
    left: BoundaryCondition
    right: BoundaryCondition

    def __post_init__(self):
        if self.left.kind == "neumann" and self.right.kind == "neumann":
            raise ValueError("at least one side must be Dirichlet")


def dirichlet0_bc() -> BoundarySpec:
    return BoundarySpec(BoundaryCondition("dirichlet0"), BoundaryCondition("dirichlet0"))


@dataclass(frozen=True)
class Forcing:
    """Polynomial source b(x) = sum_k a_k x^k, degree <= 4."""

    coeffs: Tuple[float, ...]

    def __post_init__(self):
        if len(self.coeffs) > 5:
            raise ValueError("forcing degree is limited to 4")
        if not all(np.isfinite(self.coeffs)):
            raise ValueError("forcing coefficients must be finite")

    def __call__(self, x):
        return sum(a * x**k for k, a in enumerate(self.coeffs))


def element_count(n: int, order: str, bc: BoundarySpec) -> int:
    """Number of elements producing exactly 2^n unknowns."""
    if order == "linear":
        n_el = (1 << n) + 1
        if not bc.left.eliminated:
            n_el -= 1
        if not bc.right.eliminated:
            n_el -= 1
        return n_el
    if order == "quadratic":
        # 2^{n-1} elements; a non-eliminated boundary node replaces the
        # auxiliary degree of freedom, the element count does not change.
        return 1 << (n - 1)
    raise ValueError(f"unknown element order {order!r}")


@dataclass(frozen=True)
class Mesh1D:
    """1-D mesh: endpoints, element order, per-element lengths and diffusivities."""

    x1: float
    x2: float
    order: str                    # 'linear' | 'quadratic'
    lengths: Tuple[float, ...]    # h^e > 0, summing to x2 - x1
    coeffs: Tuple[float, ...]     # c^e > 0
    n: int                        # main-register qubit count

    def __post_init__(self):
        if self.order not in ("linear", "quadratic"):
            raise ValueError(f"unknown element order {self.order!r}")
        if not 1 <= self.n <= 12:
            raise ValueError("qubit count out of range")
        if len(self.lengths) != len(self.coeffs):
            raise ValueError("lengths/coeffs size mismatch")
        if any(h <= 0 for h in self.lengths):
            raise ValueError("element lengths must be positive")
        if any(c <= 0 for c in self.coeffs):
            raise ValueError("diffusivities must be positive")
        if abs(sum(self.lengths) - (self.x2 - self.x1)) > 1e-12 * max(
            1.0, abs(self.x2 - self.x1)
        ):
            raise ValueError("element lengths do not cover the domain")

    @property
    def n_el(self) -> int:
        return len(self.lengths)

    @property
    def nodes_per_element(self) -> int:
        return 2 if self.order == "linear" else 3

    def node_coords(self) -> np.ndarray:
        """Coordinates of every node (including boundary nodes)."""
        ends = self.x1 + np.concatenate(([0.0], np.cumsum(self.lengths)))
        if self.order == "linear":
            return ends
        coords = [self.x1]
        for e in range(self.n_el):
            coords.append(0.5 * (ends[e] + ends[e + 1]))
            coords.append(ends[e + 1])
        return np.array(coords)

    def validate_against(self, bc: BoundarySpec) -> None:
        expected = element_count(self.n, self.order, bc)
        if self.n_el != expected:
            raise ValueError(
                f"{self.order} mesh with these boundary conditions needs "
                f"{expected} elements for n={self.n}, got {self.n_el}"
            )


def uniform_mesh(
    n: int,
    order: str = "linear",
    bc: Optional[BoundarySpec] = None,
    x1: float = 0.0,
    x2: float = 1.0,
    coeff: float = 1.0,
) -> Mesh1D:
    bc = bc or dirichlet0_bc()
    n_el = element_count(n, order, bc)
    h = (x2 - x1) / n_el
    return Mesh1D(x1, x2, order, (h,) * n_el, (coeff,) * n_el, n)


@dataclass
class AssembledSystem:
    K: np.ndarray
    f: np.ndarray
    mesh: Mesh1D
    bc: BoundarySpec
    row_coords: np.ndarray = field(default=None)  # x of each unknown (nan for aux)

    @property
    def N(self) -> int:
        return self.K.shape[0]


def element_stiffness(order: str, h: float, c: float) -> np.ndarray:
    if h <= 0 or c <= 0:
        raise ValueError("element length and diffusivity must be positive")
    if order == "linear":
        return (c / h) * np.array([[1.0, -1.0], [-1.0, 1.0]])
    if order == "quadratic":
        return (c / (3.0 * h)) * np.array(
            [[7.0, -8.0, 1.0], [-8.0, 16.0, -8.0], [1.0, -8.0, 7.0]]
        )
    raise ValueError(f"unknown element order {order!r}")


def _node_rows(mesh: Mesh1D, bc: BoundarySpec) -> Tuple[np.ndarray, int, bool]:
    """Map global node index -> system row (-1 if eliminated).

    Returns (rows, N, has_aux)."""
    npe = mesh.nodes_per_element
    n_nodes = (npe - 1) * mesh.n_el + 1
    rows = np.arange(n_nodes)
    if bc.left.eliminated:
        rows -= 1
        rows[0] = -1
    if bc.right.eliminated:
        rows[-1] = -1
    n_unknown = int(np.sum(rows >= 0))
    N = 1 << mesh.n
    has_aux = n_unknown == N - 1
    if not (n_unknown == N or has_aux):
        raise ValueError("unknown count does not fit the qubit register")
    return rows, N, has_aux


def _element_nodes(mesh: Mesh1D, e: int) -> np.ndarray:
    k = mesh.nodes_per_element - 1
    return np.arange(k * e, k * e + k + 1)


def _element_load(mesh: Mesh1D, e: int, forcing: Forcing) -> np.ndarray:
    """Consistent load integral of b(x) * shape functions over element e."""
    ends = mesh.x1 + np.concatenate(([0.0], np.cumsum(mesh.lengths)))
    xa, xb = ends[e], ends[e + 1]
    half = 0.5 * (xb - xa)
    mid = 0.5 * (xa + xb)
    if mesh.order == "linear":
        pts, wts = _GAUSS_2
        x = mid + half * pts
        shapes = np.stack([(1.0 - pts) / 2.0, (1.0 + pts) / 2.0])
    else:
        pts, wts = _GAUSS_3
        x = mid + half * pts
        shapes = np.stack(
            [pts * (pts - 1.0) / 2.0, 1.0 - pts**2, pts * (pts + 1.0) / 2.0]
        )
    return half * (shapes * (forcing(x) * wts)).sum(axis=1)


def assemble_direct(
    mesh: Mesh1D, bc: BoundarySpec, forcing: Forcing
) -> AssembledSystem:
    """Assemble K and f by summing full-size global element matrices."""
    mesh.validate_against(bc)
    rows, N, has_aux = _node_rows(mesh, bc)
    K = np.zeros((N, N))
    f = np.zeros(N)
    for e in range(mesh.n_el):
        ke = element_stiffness(mesh.order, mesh.lengths[e], mesh.coeffs[e])
        fe = _element_load(mesh, e, forcing)
        r = rows[_element_nodes(mesh, e)]
        keep = r >= 0
        Ke = np.zeros((N, N))
        ix = np.ix_(r[keep], r[keep])
        Ke[ix] = ke[np.ix_(keep, keep)]
        K += Ke
        f[r[keep]] += fe[keep]
    for side, node in ((bc.left, 0), (bc.right, -1)):
        row = rows[node]
        if side.kind == "dirichlet":
            K[row, row] += side.penalty
            f[row] += side.penalty * side.value
        elif side.kind == "neumann":
            f[row] += side.value
    if has_aux:
        K[N - 1, N - 1] = 1.0
        f[N - 1] = 0.0
    coords = mesh.node_coords()
    row_coords = np.full(N, np.nan)
    keep = rows >= 0
    row_coords[rows[keep]] = coords[keep]
    return AssembledSystem(K, f, mesh, bc, row_coords)


def assemble_scatter(mesh: Mesh1D, bc: BoundarySpec, forcing: Forcing) -> AssembledSystem:
    """Independent assembly by per-element scatter-add (oracle for tests)."""
    mesh.validate_against(bc)
    rows, N, has_aux = _node_rows(mesh, bc)
    K = np.zeros((N, N))
    f = np.zeros(N)
    for e in range(mesh.n_el):
        ke = element_stiffness(mesh.order, mesh.lengths[e], mesh.coeffs[e])
        fe = _element_load(mesh, e, forcing)
        r = rows[_element_nodes(mesh, e)]
        for a, ra in enumerate(r):
            if ra < 0:
                continue
            f[ra] += fe[a]
            for b, rb in enumerate(r):
                if rb >= 0:
                    K[ra, rb] += ke[a, b]
    for side, node in ((bc.left, 0), (bc.right, -1)):
        row = rows[node]
        if side.kind == "dirichlet":
            K[row, row] += side.penalty
            f[row] += side.penalty * side.value
        elif side.kind == "neumann":
            f[row] += side.value
    if has_aux:
        K[N - 1, N - 1] = 1.0
    coords = mesh.node_coords()
    row_coords = np.full(N, np.nan)
    keep = rows >= 0
    row_coords[rows[keep]] = coords[keep]
    return AssembledSystem(K, f, mesh, bc, row_coords)


def classical_solve(sys: AssembledSystem) -> Tuple[np.ndarray, float]:
    """Dense factorization solve; returns (u, relative residual)."""
    if np.linalg.cond(sys.K) > 1e14:
        raise np.linalg.LinAlgError("stiffness matrix is numerically singular")
    u = np.linalg.solve(sys.K, sys.f)
    denom = np.linalg.norm(sys.f)
    residual = np.linalg.norm(sys.K @ u - sys.f) / (denom if denom > 0 else 1.0)
    return u, float(residual)


def condition_number(sys: AssembledSystem) -> float:
    """2-norm condition number (eigenvalue ratio) of the SPD stiffness matrix."""
    if not np.allclose(sys.K, sys.K.T, atol=1e-12):
        raise ValueError("stiffness matrix is not symmetric")
    eig = np.linalg.eigvalsh(sys.K)
    if eig[0] <= 0:
        raise ValueError("stiffness matrix is not positive definite")
    return float(eig[-1] / eig[0])
