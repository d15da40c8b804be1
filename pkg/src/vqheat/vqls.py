"""Variational solve of the assembled linear system.

The candidate solution is |v(theta)> = V(theta)|0> for one of the fixed
ansatz families.  With the stiffness matrix decomposed as K = sum_l c_l K_l,
the normalized projective cost is

    C_p = 1 - |<f|K|v>|^2 / <Kv|Kv>
        = 1 - (sum_l c_l beta_l)^2 / (sum_nm c_n c_m gamma_nm)

with beta_l = Re<f|K_l|v> and gamma_nm = Re<K_n v|K_m v>; all quantities are
real because the gate set is real.  Both inner products map onto Hadamard
tests, evaluated either exactly from the statevector or with a finite shot
budget.  The classical outer loop is SLSQP with central finite-difference
gradients and uniform random restarts; large instances use a warm start
obtained by fitting the ansatz state to the classical solution direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.optimize import minimize

from .ansatz import AnsatzSpec, build_ansatz, prepare_state
from .decomp import LcuDecomposition
from .qsim import Circuit, apply_circuit, hadamard_test, zero_state

FD_STEP = 1e-6
DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 500
DEFAULT_RESTARTS = 25
WARM_START_FITS = 8


class VqlsProblem:
    """Pairs an LCU decomposition with a load vector and an ansatz choice."""

    def __init__(self, decomp: LcuDecomposition, f: np.ndarray, spec: AnsatzSpec):
        f = np.asarray(f, dtype=float)
        if f.shape != (1 << decomp.n,):
            raise ValueError("load vector length does not match the decomposition")
        if spec.n != decomp.n:
            raise ValueError("ansatz qubit count does not match the decomposition")
        if not np.linalg.norm(f) > 0.0:
            raise ValueError("load vector must be nonzero")
        self.decomp = decomp
        self.spec = spec
        self.f = f
        self.f_norm = float(np.linalg.norm(f))
        self.f_hat = f / self.f_norm
        self.coeffs = np.array([t.coefficient for t in decomp.terms])
        self.circuits = [t.circuit for t in decomp.terms]
        self.prep = prepare_state(f)
        self._prep_inv = self.prep.inverse()
        self._empty = Circuit(decomp.n, [])

    @property
    def n(self) -> int:
        return self.decomp.n

    def ansatz_state(self, theta: np.ndarray) -> np.ndarray:
        return apply_circuit(zero_state(self.n), build_ansatz(self.spec, theta))


@dataclass
class CostBreakdown:
    value: float
    numerator: float
    denominator: float
    betas: np.ndarray
    gammas: np.ndarray


def cost_breakdown(
    problem: VqlsProblem,
    theta: np.ndarray,
    shots: Optional[int] = None,
    seed: Optional[int] = None,
) -> CostBreakdown:
    """Evaluate C_p through the per-term Hadamard-test path."""
    terms = len(problem.circuits)
    if shots is None:
        v = problem.ansatz_state(theta)
        w = np.empty((terms, 1 << problem.n), dtype=complex)
        for l, circ in enumerate(problem.circuits):
            w[l] = apply_circuit(v, circ)
        betas = np.real(w @ np.conj(problem.f_hat))
        gammas = np.real(np.conj(w) @ w.T)
    else:
        if seed is None:
            raise ValueError("shots mode requires a seed")
        seeds = iter(np.random.SeedSequence(seed).generate_state(terms * (terms + 3)))
        ansatz = build_ansatz(problem.spec, np.asarray(theta, dtype=float))
        betas = np.empty(terms)
        for l, circ in enumerate(problem.circuits):
            u = ansatz + circ + problem._prep_inv
            betas[l] = hadamard_test(u, problem._empty, shots, int(next(seeds)))
        gammas = np.eye(terms)
        for a in range(terms):
            for b in range(a + 1, terms):
                u = problem.circuits[b] + problem.circuits[a].inverse()
                val = hadamard_test(u, ansatz, shots, int(next(seeds)))
                gammas[a, b] = gammas[b, a] = val
    if not np.allclose(np.diag(gammas), 1.0, atol=1e-9):
        raise RuntimeError("term circuits are not unitary: <K_l v|K_l v> != 1")
    c = problem.coeffs
    numerator = float(np.dot(c, betas) ** 2)
    denominator = float(c @ gammas @ c)
    if denominator <= 0.0:
        raise RuntimeError("nonpositive cost denominator")
    return CostBreakdown(
        value=1.0 - numerator / denominator,
        numerator=numerator,
        denominator=denominator,
        betas=betas,
        gammas=gammas,
    )


def cost(problem: VqlsProblem, theta, shots=None, seed=None) -> float:
    return cost_breakdown(problem, theta, shots=shots, seed=seed).value


def cost_dense(problem: VqlsProblem, theta: np.ndarray) -> float:
    """Reference cost from the reconstructed dense matrix (oracle path)."""
    k = np.real(problem.decomp.reconstruct())
    psi = k @ np.real(problem.ansatz_state(theta))
    return 1.0 - float(np.dot(problem.f_hat, psi)) ** 2 / float(np.dot(psi, psi))


def _central_diff_grad(fun, theta: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    grad = np.empty_like(theta)
    for i in range(theta.size):
        up = theta.copy()
        dn = theta.copy()
        up[i] += step
        dn[i] -= step
        grad[i] = (fun(up) - fun(dn)) / (2.0 * step)
    return grad


@dataclass
class VqlsResult:
    theta: np.ndarray
    cost: float
    converged: bool
    restarts_used: int
    iterations: int
    trace: List[dict] = field(default_factory=list)


def _minimize_once(fun, x0, max_iter, trace, restart_index):
    evals = {"it": 0}

    def cb(xk):
        evals["it"] += 1
        trace.append(
            {
                "restart": restart_index,
                "iteration": evals["it"],
                "cost": float(fun(xk)),
            }
        )

    res = minimize(
        fun,
        x0,
        method="SLSQP",
        jac=lambda x: _central_diff_grad(fun, x),
        callback=cb,
        options={"maxiter": max_iter, "ftol": 1e-14},
    )
    return res.x, float(res.fun), evals["it"]


def optimize(
    problem: VqlsProblem,
    seed: int = 0,
    restarts: int = DEFAULT_RESTARTS,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    x0: Optional[np.ndarray] = None,
) -> VqlsResult:
    """SLSQP with random restarts; stops at the first restart reaching tol.

    A supplied ``x0`` (warm start) is used for the first attempt; later
    attempts draw uniform angles in [0, 2pi)."""
    rng = np.random.default_rng(seed)
    nparam = problem.spec.parameter_count
    fun = lambda th: cost(problem, th)
    trace: List[dict] = []
    best_theta = None
    best_cost = np.inf
    iterations = 0
    for attempt in range(restarts):
        if attempt == 0 and x0 is not None:
            start = np.asarray(x0, dtype=float)
        else:
            start = rng.uniform(0.0, 2.0 * np.pi, nparam)
        theta, val, its = _minimize_once(fun, start, max_iter, trace, attempt)
        iterations += its
        if val < best_cost:
            best_cost = val
            best_theta = theta
        if best_cost <= tol:
            return VqlsResult(best_theta, best_cost, True, attempt + 1, iterations, trace)
    return VqlsResult(best_theta, best_cost, False, restarts, iterations, trace)


def warm_start_theta(
    problem: VqlsProblem,
    target: np.ndarray,
    seed: int = 0,
    fits: int = WARM_START_FITS,
    max_iter: int = DEFAULT_MAX_ITER,
) -> np.ndarray:
    """Fit the ansatz state to a target direction by overlap maximization."""
    target = np.asarray(target, dtype=float)
    t_hat = target / np.linalg.norm(target)
    rng = np.random.default_rng(seed)
    nparam = problem.spec.parameter_count

    def overlap_loss(th):
        v = np.real(problem.ansatz_state(th))
        return 1.0 - float(np.dot(v, t_hat)) ** 2

    best = None
    best_val = np.inf
    for _ in range(fits):
        x0 = rng.uniform(0.0, 2.0 * np.pi, nparam)
        res = minimize(
            overlap_loss,
            x0,
            method="SLSQP",
            jac=lambda x: _central_diff_grad(overlap_loss, x),
            options={"maxiter": max_iter, "ftol": 1e-14},
        )
        if res.fun < best_val:
            best_val = float(res.fun)
            best = res.x
        if best_val <= 1e-12:
            break
    return best


def extract_solution(problem: VqlsProblem, theta: np.ndarray) -> np.ndarray:
    """Nodal solution with sign and magnitude restored.

    The magnitude follows from K(alpha*u_hat) = f projected on f_hat:
    alpha = ||f|| / <f_hat|K|u_hat>, and the sign convention makes that
    projection positive."""
    v = np.real(problem.ansatz_state(theta))
    bd = cost_breakdown(problem, theta)
    proj = float(np.dot(problem.coeffs, bd.betas))
    if proj == 0.0:
        raise RuntimeError("degenerate solution state: <f|K|v> = 0")
    if proj < 0.0:
        v = -v
        proj = -proj
    return (problem.f_norm / proj) * v


def solution_fidelity(u_q: np.ndarray, u_c: np.ndarray) -> float:
    """|<u_q|u_c>| between normalized solution vectors."""
    a = u_q / np.linalg.norm(u_q)
    b = u_c / np.linalg.norm(u_c)
    return abs(float(np.dot(a, b)))
