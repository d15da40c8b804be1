"""Expressibility and entangling-capability metrics for the ansatz families.

Expressibility is the KL divergence between the sampled distribution of pair
fidelities |<psi(a)|psi(b)>|^2 and the Haar-random fidelity distribution
P_Haar(F) = (N-1)(1-F)^(N-2). Lower is better (closer to Haar).

Entangling capability is the mean Meyer-Wallach measure
Q = 2 - (2/n) * sum_k Tr(rho_k^2) over randomly sampled parameter sets.
"""

from __future__ import annotations

import numpy as np

from .ansatz import AnsatzSpec, build_ansatz
from .qsim import apply_circuit, zero_state

DEFAULT_BINS = 75
DEFAULT_PAIRS = 4000
DEFAULT_ENT_SAMPLES = 10000


def haar_pdf(fidelity: np.ndarray, dim: int) -> np.ndarray:
    """Density of |<a|b>|^2 for Haar-random states in a dim-dimensional space."""
    fidelity = np.asarray(fidelity, dtype=float)
    return (dim - 1) * (1.0 - fidelity) ** (dim - 2)


def _haar_bin_mass(edges: np.ndarray, dim: int) -> np.ndarray:
    # integral of the Haar pdf over each bin, in closed form; written as a
    # difference of survival functions so narrow bins near F = 1 keep their
    # tiny but nonzero mass instead of underflowing to zero
    sf = (1.0 - edges) ** (dim - 1)
    return sf[:-1] - sf[1:]


def _sample_state(spec: AnsatzSpec, rng: np.random.Generator) -> np.ndarray:
    theta = rng.uniform(0.0, 2.0 * np.pi, spec.parameter_count)
    return apply_circuit(zero_state(spec.n), build_ansatz(spec, theta))


def fidelity_samples(
    spec: AnsatzSpec, pairs: int = DEFAULT_PAIRS, seed: int = 0
) -> np.ndarray:
    """|<psi_a|psi_b>|^2 over pairs of uniformly sampled parameter vectors."""
    rng = np.random.default_rng(seed)
    fids = np.empty(pairs)
    for i in range(pairs):
        a = _sample_state(spec, rng)
        b = _sample_state(spec, rng)
        fids[i] = abs(np.vdot(a, b)) ** 2
    return fids


def expressibility(
    spec: AnsatzSpec,
    pairs: int = DEFAULT_PAIRS,
    bins: int = DEFAULT_BINS,
    seed: int = 0,
) -> float:
    """KL divergence between sampled and Haar fidelity histograms.

    Empty sample bins contribute zero to the sum (the 0*log(0) limit)."""
    dim = 1 << spec.n
    fids = fidelity_samples(spec, pairs, seed)
    edges = np.linspace(0.0, 1.0, bins + 1)
    counts, _ = np.histogram(fids, bins=edges)
    p = counts / pairs
    q = _haar_bin_mass(edges, dim)
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def meyer_wallach_q(state: np.ndarray) -> float:
    """Meyer-Wallach global entanglement of a pure n-qubit state."""
    dim = state.shape[0]
    n = dim.bit_length() - 1
    if 1 << n != dim:
        raise ValueError("state length must be a power of two")
    total = 0.0
    for k in range(n):
        # reshape so qubit k is its own axis, then trace out the rest
        psi = state.reshape((1 << (n - 1 - k), 2, 1 << k))
        m = np.moveaxis(psi, 1, 0).reshape(2, -1)
        rho = m @ m.conj().T
        total += float(np.real(np.trace(rho @ rho)))
    return 2.0 - (2.0 / n) * total


def ent_capability(
    spec: AnsatzSpec,
    samples: int = DEFAULT_ENT_SAMPLES,
    seed: int = 0,
) -> float:
    """Mean Meyer-Wallach Q over uniformly sampled parameter vectors."""
    rng = np.random.default_rng(seed)
    acc = 0.0
    for _ in range(samples):
        acc += meyer_wallach_q(_sample_state(spec, rng))
    return acc / samples
