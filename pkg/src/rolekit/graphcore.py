"""Graph data types, ideal block-structured graphs, and benchmark generators.

A directed graph on ``n`` nodes is held as a dense ``n x n`` real matrix.
Graphs whose permuted adjacency matrix is exactly block-constant factor as
``(PZ) B (PZ)^T`` for a small binary role matrix ``B`` and a (possibly signed)
role-indicator matrix ``Z``; such graphs are called ideal, because all nodes
sharing a role are structurally equivalent.  This module builds ideal graphs,
reduces redundant role structure to a minimal one, recognizes checkerboard
sign patterns, applies rank-one edge weights, and generates the standard
benchmark structures (communities, overlapping communities, bipartite
communities, block cycles, and a signed checkerboard example).

Everything here is a pure function of its inputs; values are safe to share
across threads read-only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

UNWEIGHTED = "unweighted"
SIGNED = "signed"
WEIGHTED = "weighted"

STRUCTURE_KINDS = (
    "community",
    "overlapping",
    "bipartite_communities",
    "block_cycle",
    "signed_example",
)


class EdgeListFormatError(ValueError):
    """Unreadable edge-list input; carries the offending 1-based line number."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class Adjacency:
    """Square real matrix of a directed graph plus a value-range tag.

    ``kind`` is one of ``"unweighted"`` (entries in {0,1}), ``"signed"``
    (entries in {-1,0,1}) or ``"weighted"`` (arbitrary reals).  The kind is
    validated at construction; use :meth:`from_matrix` to infer the narrowest
    kind that fits the values.
    """

    entries: np.ndarray
    kind: str

    def __post_init__(self):
        M = np.asarray(self.entries, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("adjacency matrix must be square")
        object.__setattr__(self, "entries", M)
        if self.kind == UNWEIGHTED:
            if not np.isin(M, (0.0, 1.0)).all():
                raise ValueError("unweighted adjacency entries must be 0 or 1")
        elif self.kind == SIGNED:
            if not np.isin(M, (-1.0, 0.0, 1.0)).all():
                raise ValueError("signed adjacency entries must be -1, 0 or 1")
        elif self.kind != WEIGHTED:
            raise ValueError(f"unknown adjacency kind: {self.kind!r}")

    @classmethod
    def from_matrix(cls, M) -> "Adjacency":
        """Wrap a matrix, inferring the narrowest kind that fits its values."""
        M = np.asarray(M, dtype=float)
        if np.isin(M, (0.0, 1.0)).all():
            kind = UNWEIGHTED
        elif np.isin(M, (-1.0, 0.0, 1.0)).all():
            kind = SIGNED
        else:
            kind = WEIGHTED
        return cls(M, kind)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def disconnected_nodes(self) -> list[int]:
        """Nodes whose row and column are both entirely zero."""
        zero = self.entries == 0
        return [int(i) for i in np.flatnonzero(zero.all(axis=0) & zero.all(axis=1))]

    def __abs__(self) -> "Adjacency":
        return Adjacency.from_matrix(np.abs(self.entries))


def as_adjacency(obj) -> Adjacency:
    """Coerce an :class:`Adjacency` or a plain matrix to :class:`Adjacency`."""
    if isinstance(obj, Adjacency):
        return obj
    return Adjacency.from_matrix(obj)


@dataclass(frozen=True, eq=False)
class RoleMatrix:
    """``q x q`` binary matrix describing which roles point at which."""

    entries: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.entries, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("role matrix must be square")
        if not np.isin(M, (0.0, 1.0)).all():
            raise ValueError("role matrix entries must be 0 or 1")
        object.__setattr__(self, "entries", M)

    @property
    def q(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class SignMatrix:
    """Diagonal sign matrix Q with entries in {-1,+1}, so Q @ Q = I."""

    diag: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float).ravel()
        if not np.isin(d, (-1.0, 1.0)).all():
            raise ValueError("sign matrix diagonal entries must be -1 or +1")
        object.__setattr__(self, "diag", d)

    def conjugate(self, M: np.ndarray) -> np.ndarray:
        """Return Q M Q."""
        d = self.diag
        return d[:, None] * np.asarray(M, dtype=float) * d[None, :]


@dataclass(frozen=True, eq=False)
class Assignment:
    """Node-to-role map.

    ``sigma[i]`` is the 0-based role of node ``i``, or -1 when the node is
    left unassigned (e.g. disconnected nodes).  Every role index 0..q-1 must
    own at least one node.  ``signs`` optionally holds a per-node factor in
    {-1,+1} for signed block structure; the row of the indicator matrix for
    node ``i`` is then ``signs[i] * e_{sigma[i]}``.
    """

    sigma: np.ndarray
    signs: np.ndarray | None = None

    def __post_init__(self):
        sig = np.asarray(self.sigma, dtype=int).ravel()
        object.__setattr__(self, "sigma", sig)
        assigned = sig[sig >= 0]
        if assigned.size == 0:
            raise ValueError("assignment must place at least one node in a role")
        q = int(assigned.max()) + 1
        counts = np.bincount(assigned, minlength=q)
        if (counts == 0).any():
            raise ValueError("every role index 0..q-1 must own at least one node")
        if self.signs is not None:
            s = np.asarray(self.signs, dtype=float).ravel()
            if s.shape[0] != sig.shape[0]:
                raise ValueError("signs must have one entry per node")
            if not np.isin(s, (-1.0, 1.0)).all():
                raise ValueError("signs entries must be -1 or +1")
            object.__setattr__(self, "signs", s)

    @property
    def n(self) -> int:
        return self.sigma.shape[0]

    @property
    def q(self) -> int:
        return int(self.sigma.max()) + 1

    def sizes(self) -> np.ndarray:
        """Number of nodes per role."""
        assigned = self.sigma[self.sigma >= 0]
        return np.bincount(assigned, minlength=self.q)

    def unassigned(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.sigma < 0)]

    def perm(self) -> np.ndarray:
        """Assigned node ids in block order: sorted by (role, node id)."""
        nodes = np.flatnonzero(self.sigma >= 0)
        order = np.lexsort((nodes, self.sigma[nodes]))
        return nodes[order]

    def membership(self) -> np.ndarray:
        """The ``n x q`` indicator matrix PZ (signed when signs are present)."""
        W = np.zeros((self.n, self.q))
        nodes = np.flatnonzero(self.sigma >= 0)
        vals = np.ones(nodes.size) if self.signs is None else self.signs[nodes]
        W[nodes, self.sigma[nodes]] = vals
        return W

    @classmethod
    def from_blocks(cls, sizes, perm=None, signs=None) -> "Assignment":
        """Build an assignment from per-role block sizes.

        ``perm[t]`` names the node placed at block position ``t``; identity
        when omitted.  ``signs`` is given in block order and is carried over
        to the nodes.
        """
        sizes = [int(s) for s in np.atleast_1d(sizes)]
        if len(sizes) == 0 or any(s < 1 for s in sizes):
            raise ValueError("every role size must be at least 1")
        n = sum(sizes)
        if perm is None:
            perm = np.arange(n)
        perm = np.asarray(perm, dtype=int).ravel()
        if perm.shape[0] != n or not np.array_equal(np.sort(perm), np.arange(n)):
            raise ValueError("perm must be a permutation of 0..n-1")
        block_role = np.repeat(np.arange(len(sizes)), sizes)
        sigma = np.empty(n, dtype=int)
        sigma[perm] = block_role
        node_signs = None
        if signs is not None:
            signs = np.asarray(signs, dtype=float).ravel()
            if signs.shape[0] != n:
                raise ValueError("signs must have one entry per node")
            node_signs = np.empty(n)
            node_signs[perm] = signs
        return cls(sigma, node_signs)


def ideal_adjacency(B: RoleMatrix, assignment: Assignment) -> Adjacency:
    """Return (PZ) B (PZ)^T for the given role matrix and assignment.

    Unassigned nodes contribute zero rows and columns.
    """
    sig = assignment.sigma
    n = assignment.n
    A = np.zeros((n, n))
    nodes = np.flatnonzero(sig >= 0)
    vals = B.entries[np.ix_(sig[nodes], sig[nodes])]
    if assignment.signs is not None:
        s = assignment.signs[nodes]
        vals = vals * np.outer(s, s)
    A[np.ix_(nodes, nodes)] = vals
    return Adjacency.from_matrix(A)


def build_ideal(B: RoleMatrix, sizes, perm=None, signs=None) -> Adjacency:
    """Build the ideal adjacency matrix (PZ) B (PZ)^T.

    ``sizes`` gives the node count of each role (all >= 1), ``perm[t]`` the
    node placed at block position ``t``, and ``signs`` an optional per-block-
    position factor in {-1,+1} producing a signed ideal graph.
    """
    return ideal_adjacency(B, Assignment.from_blocks(sizes, perm, signs))


def _parallel_rows(u: np.ndarray, v: np.ndarray, rtol: float = 1e-12) -> bool:
    # linear dependence as parallelism; for binary rows this is equality
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return True
    return abs(float(u @ v)) >= (1.0 - rtol) * nu * nv


def is_minimal_role_matrix(B: RoleMatrix) -> bool:
    """True iff no two rows of [B B^T] are linearly dependent and none is zero."""
    C = np.hstack([B.entries, B.entries.T])
    if (C == 0).all(axis=1).any():
        return False
    for i in range(C.shape[0]):
        for j in range(i + 1, C.shape[0]):
            if _parallel_rows(C[i], C[j]):
                return False
    return True


def _merge_equivalent_roles(B: RoleMatrix, assignment: Assignment):
    """Merge roles whose rows of [B B^T] coincide; returns (B, assignment)."""
    C = np.hstack([B.entries, B.entries.T])
    group_of: dict[tuple, int] = {}
    rep: list[int] = []
    relabel = np.empty(B.q, dtype=int)
    for r in range(B.q):
        key = tuple(C[r])
        if key not in group_of:
            group_of[key] = len(rep)
            rep.append(r)
        relabel[r] = group_of[key]
    if len(rep) == B.q:
        return B, assignment
    new_B = RoleMatrix(B.entries[np.ix_(rep, rep)])
    sigma = assignment.sigma.copy()
    mask = sigma >= 0
    sigma[mask] = relabel[sigma[mask]]
    return new_B, Assignment(sigma, assignment.signs)


def minimalize(B: RoleMatrix, assignment: Assignment):
    """Reduce (B, Z) to a minimal role structure with the same ideal matrix.

    Roles whose row and column of B are both zero are removed (their nodes
    become unassigned; they are disconnected in the ideal graph), and roles
    with identical rows of [B B^T] are merged, summing their sizes.  The
    product (PZ) B (PZ)^T is unchanged and the result is a fixed point of
    this reduction.
    """
    C = np.hstack([B.entries, B.entries.T])
    alive = ~(C == 0).all(axis=1)
    if not alive.all():
        keep = np.flatnonzero(alive)
        relabel = -np.ones(B.q, dtype=int)
        relabel[keep] = np.arange(keep.size)
        sigma = assignment.sigma.copy()
        mask = sigma >= 0
        sigma[mask] = relabel[sigma[mask]]
        B = RoleMatrix(B.entries[np.ix_(keep, keep)])
        assignment = Assignment(sigma, assignment.signs)
    return _merge_equivalent_roles(B, assignment)


def checkerboard_signature(A: Adjacency) -> SignMatrix | None:
    """Find a diagonal sign matrix Q with |A| = Q A Q, if one exists.

    Each edge (i, j) forces sign(q_i q_j) = sign(A_ij); the constraint graph
    is 2-colored by breadth-first search, the first node of every connected
    component receiving +1.  Returns None when a sign cycle is inconsistent
    (the graph is not checkerboard).
    """
    if A.kind == WEIGHTED:
        raise ValueError("checkerboard signature is defined for unweighted graphs")
    M = A.entries
    n = A.n
    sgn = np.sign(M)
    q = np.zeros(n)
    for start in range(n):
        if q[start] != 0:
            continue
        q[start] = 1.0
        stack = [start]
        while stack:
            i = stack.pop()
            for j in np.flatnonzero(sgn[i] != 0):
                want = sgn[i, j] * q[i]
                if q[j] == 0:
                    q[j] = want
                    stack.append(int(j))
                elif q[j] != want:
                    return None
            for j in np.flatnonzero(sgn[:, i] != 0):
                want = sgn[j, i] * q[i]
                if q[j] == 0:
                    q[j] = want
                    stack.append(int(j))
                elif q[j] != want:
                    return None
    return SignMatrix(q)


def apply_rank_one_weights(A: Adjacency, d) -> Adjacency:
    """Scale an unweighted graph by a rank-one weight pattern: D A D."""
    if A.kind != UNWEIGHTED:
        raise ValueError("rank-one weighting expects an unweighted graph")
    d = np.asarray(d, dtype=float).ravel()
    if d.shape[0] != A.n:
        raise ValueError("weight vector length must equal the node count")
    if (d <= 0).any():
        raise ValueError("weights must be strictly positive")
    return Adjacency.from_matrix(d[:, None] * A.entries * d[None, :])


def structure_role_matrix(kind: str, q: int) -> RoleMatrix:
    """Role matrix of a named benchmark structure with q roles (q pairs for
    bipartite communities)."""
    if kind == "community":
        if q < 1:
            raise ValueError("community structure needs at least 1 role")
        return RoleMatrix(np.eye(q))
    if kind == "overlapping":
        if q < 3:
            raise ValueError("overlapping communities need at least 3 roles")
        B = np.eye(q)
        B[:, -1] = 1.0
        B[-1, :] = 1.0
        return RoleMatrix(B)
    if kind == "bipartite_communities":
        if q < 1:
            raise ValueError("bipartite communities need at least 1 pair")
        B = np.zeros((2 * q, 2 * q))
        B[:q, q:] = np.eye(q)
        B[q:, :q] = np.eye(q)
        return RoleMatrix(B)
    if kind == "block_cycle":
        if q < 1:
            raise ValueError("block cycle needs at least 1 role")
        B = np.zeros((q, q))
        for i in range(q):
            B[i, (i + 1) % q] = 1.0
        return RoleMatrix(B)
    raise ValueError(f"unknown structure kind: {kind!r}")


# The fixed signed checkerboard example: a 3-cycle role graph on 6 nodes
# with mixed-sign role indicators.
_SIGNED_EXAMPLE_SIZES = (2, 1, 3)
_SIGNED_EXAMPLE_SIGNS = (1, -1, -1, 1, -1, -1)


def generate_structure(kind: str, sizes=None, perm=None):
    """Generate a ground-truth triple (Adjacency, RoleMatrix, Assignment).

    ``kind`` is one of ``community``, ``overlapping``, ``bipartite_communities``
    (sizes lists all 2q roles), ``block_cycle`` or ``signed_example`` (fixed
    6-node instance; sizes ignored).  The returned role matrix is minimal for
    every kind.
    """
    if kind not in STRUCTURE_KINDS:
        raise ValueError(f"unknown structure kind: {kind!r}")
    if kind == "signed_example":
        B = structure_role_matrix("block_cycle", 3)
        asg = Assignment.from_blocks(_SIGNED_EXAMPLE_SIZES, perm, _SIGNED_EXAMPLE_SIGNS)
        return ideal_adjacency(B, asg), B, asg
    if sizes is None:
        raise ValueError(f"structure kind {kind!r} requires role sizes")
    sizes = [int(s) for s in np.atleast_1d(sizes)]
    if kind == "bipartite_communities":
        if len(sizes) % 2 != 0:
            raise ValueError("bipartite communities need an even number of role sizes")
        B = structure_role_matrix(kind, len(sizes) // 2)
    else:
        B = structure_role_matrix(kind, len(sizes))
    asg = Assignment.from_blocks(sizes, perm)
    return ideal_adjacency(B, asg), B, asg


# ---------------------------------------------------------------------------
# edge-list and ground-truth file formats
# ---------------------------------------------------------------------------

def _format_weight(w: float) -> str:
    if w == int(w):
        return str(int(w))
    return format(w, ".9g")


def write_edge_list(path, A: Adjacency) -> int:
    """Write one "src<TAB>dst[<TAB>weight]" line per nonzero entry, row-major.

    The weight column is omitted for weight 1.  Node ids are 0-based.
    Returns the number of edges written.
    """
    A = as_adjacency(A)
    lines = []
    rows, cols = np.nonzero(A.entries)
    for i, j in zip(rows, cols):
        w = A.entries[i, j]
        if w == 1.0:
            lines.append(f"{i}\t{j}")
        else:
            lines.append(f"{i}\t{j}\t{_format_weight(w)}")
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))
    return len(lines)


def read_edge_list(path, n: int | None = None) -> Adjacency:
    """Read the edge-list format back into an Adjacency.

    The node count is inferred as 1 + the largest id seen unless given.
    Raises :class:`EdgeListFormatError` (with a line number) on malformed
    lines, and when the file holds no edges at all.
    """
    edges = []
    max_id = -1
    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) not in (2, 3):
                raise EdgeListFormatError(
                    "expected 'src<TAB>dst' or 'src<TAB>dst<TAB>weight'", line_no)
            try:
                src, dst = int(parts[0]), int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError:
                raise EdgeListFormatError("could not parse node ids / weight", line_no)
            if src < 0 or dst < 0:
                raise EdgeListFormatError("node ids must be non-negative", line_no)
            edges.append((src, dst, w))
            max_id = max(max_id, src, dst)
    if not edges:
        raise EdgeListFormatError("no edges found")
    n = (max_id + 1) if n is None else int(n)
    if n <= max_id:
        raise EdgeListFormatError(f"node id {max_id} exceeds declared count {n}")
    M = np.zeros((n, n))
    for src, dst, w in edges:
        M[src, dst] = w
    return Adjacency.from_matrix(M)


def write_ground_truth(path, B: RoleMatrix, assignment: Assignment,
                       extra: dict | None = None) -> None:
    """Serialize a ground-truth triple as JSON: {n, q, B row-major, sigma, signs?}."""
    doc = {
        "n": assignment.n,
        "q": B.q,
        "B": [int(v) for v in B.entries.ravel()],
        "sigma": [int(v) for v in assignment.sigma],
    }
    if assignment.signs is not None:
        doc["signs"] = [int(v) for v in assignment.signs]
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n")


def read_ground_truth(path):
    """Read a ground-truth JSON document; returns (RoleMatrix, Assignment)."""
    doc = json.loads(Path(path).read_text())
    q = int(doc["q"])
    B = RoleMatrix(np.asarray(doc["B"], dtype=float).reshape(q, q))
    signs = doc.get("signs")
    asg = Assignment(np.asarray(doc["sigma"], dtype=int),
                     None if signs is None else np.asarray(signs, dtype=float))
    return B, asg
