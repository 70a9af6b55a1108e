"""Shared helpers and reference data for the test suite."""

from __future__ import annotations

import numpy as np

from rolekit import Adjacency, Assignment

# the 6-node signed checkerboard reference graph (3-cycle role structure,
# sizes (2,1,3), block signs (+,-,-,+,-,-))
SIGNED_EXAMPLE = np.array([
    [0, 0, -1, 0, 0, 0],
    [0, 0, 1, 0, 0, 0],
    [0, 0, 0, -1, 1, 1],
    [1, -1, 0, 0, 0, 0],
    [-1, 1, 0, 0, 0, 0],
    [-1, 1, 0, 0, 0, 0],
], dtype=float)

SIGNED_EXAMPLE_Q = np.array([1, -1, -1, 1, -1, -1], dtype=float)

# the rank-deficient 3-role counterexample: minimal B with rank[B B^T] = 2
RANK_DEFICIENT = np.array([
    [0, 0, 0],
    [1, 0, 1],
    [1, 0, 1],
], dtype=float)

RANK_DEFICIENT_S1 = np.array([
    [2, 0, 2],
    [0, 2, 2],
    [2, 2, 4],
], dtype=float)

# 5-node bipartite clique (parts of size 2 and 3)
BIPARTITE_CLIQUE = np.array([
    [0, 0, 1, 1, 1],
    [0, 0, 1, 1, 1],
    [1, 1, 0, 0, 0],
    [1, 1, 0, 0, 0],
    [1, 1, 0, 0, 0],
], dtype=float)


def random_digraph(rng: np.random.Generator, n_max: int = 20,
                   n_min: int = 2) -> Adjacency:
    """Random nonzero binary digraph with size and density drawn at random."""
    n = int(rng.integers(n_min, n_max + 1))
    density = float(rng.uniform(0.08, 0.5))
    M = (rng.random((n, n)) < density).astype(float)
    if not M.any():
        M[0, int(rng.integers(0, n))] = 1.0
    return Adjacency.from_matrix(M)


def kron_rho(A) -> float:
    """Dense oracle for the similarity-operator spectral radius:
    largest |eigenvalue| of kron(A, A) + kron(A^T, A^T)."""
    M = A.entries if isinstance(A, Adjacency) else np.asarray(A, dtype=float)
    K = np.kron(M, M) + np.kron(M.T, M.T)
    return float(np.abs(np.linalg.eigvalsh(K)).max())


def orth_basis(M: np.ndarray, rank: int | None = None) -> np.ndarray:
    """Orthonormal basis of the column space, rank from SVD threshold unless given."""
    U, s, _ = np.linalg.svd(M)
    if rank is None:
        if s.size == 0 or s[0] == 0:
            return U[:, :0]
        rank = int((s > max(M.shape) * np.finfo(float).eps * s[0]).sum())
    return U[:, :rank]


def sin_max_angle(X: np.ndarray, Y: np.ndarray) -> float:
    """Sine of the largest principal angle between two column spaces.

    Computed from the residual of projecting one basis on the other, which
    stays accurate for angles near zero (unlike arccos of the smallest
    singular value).
    """
    Qx = orth_basis(X)
    Qy = orth_basis(Y)
    if Qx.shape[1] != Qy.shape[1]:
        return 1.0
    if Qx.shape[1] == 0:
        return 0.0
    R = Qy - Qx @ (Qx.T @ Qy)
    return float(np.linalg.svd(R, compute_uv=False)[0])


def canonicalize(assignment: Assignment):
    """Relabel roles by first node occurrence; returns (sigma, role_order)."""
    sigma = assignment.sigma
    order: list[int] = []
    seen = set()
    for v in sigma:
        if v >= 0 and v not in seen:
            seen.add(int(v))
            order.append(int(v))
    relabel = {old: new for new, old in enumerate(order)}
    out = np.array([relabel[v] if v >= 0 else -1 for v in sigma], dtype=int)
    return out, order


def same_partition_and_B(result, truth_B, truth_assignment) -> bool:
    """Ground-truth comparison up to role relabeling."""
    got_sigma, got_order = canonicalize(result.assignment)
    want_sigma, want_order = canonicalize(truth_assignment)
    if not np.array_equal(got_sigma, want_sigma):
        return False
    got_B = result.B.entries[np.ix_(got_order, got_order)]
    want_B = truth_B.entries[np.ix_(want_order, want_order)]
    return np.array_equal(got_B, want_B)
