"""Sparse operators on pointed edges and their node-level reductions.

Two orientations of the nonbacktracking operator appear here.
``build_B`` follows the pointed line graph: ``b[iQ, jR] = 1`` iff
``j in Q - {i}`` and ``R != Q``. Its transpose, the *message* orientation,
is what belief-propagation linearizes to: a message out of ``iR`` collects
messages ``jQ`` from other edges ``Q`` through ``i``. The reduced matrices
``B'`` and ``J'`` are exact reductions of the message orientation: the
aggregates ``x1[k, i] = sum_{Q in E_k(i)} u[iQ]`` and
``x2[k, i] = sum_{Q in E_k(i)} sum_{j in Q - i} u[jQ]`` of a message-side
eigenvector are eigenvectors of the reduced matrix. Eigenvalues are shared
by both orientations.

Basis orders:

* pointed edges: see :func:`hypernb.hypergraph.pointed_edges`;
* ``B'``: (block 1|2, size k ascending, node i);
* ``J``: (group s, pointed edge);
* ``J'``: (block 1|2, group s, size k ascending, node i).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .hypergraph import Hypergraph, adjacency_operator, degree_operator

__all__ = [
    "GroupMatrixSet",
    "build_B",
    "build_Bk",
    "build_Bprime",
    "build_G",
    "build_J",
    "build_Jprime",
    "reduce_pointed_vector",
    "ihara_bass_sides",
    "ihara_bass_residual",
    "jacobian_edge_maps",
    "export_triplets",
    "load_triplets",
    "DENSE_LIMIT",
]

# Matrices are materialized densely only up to this dimension.
DENSE_LIMIT = 600


@dataclass(frozen=True)
class GroupMatrixSet:
    """Per-size ``ell x ell`` parameter matrices ``G_k``."""

    ell: int
    G: dict[int, np.ndarray]

    def __post_init__(self):
        for k, g in self.G.items():
            if np.shape(g) != (self.ell, self.ell):
                raise ValueError(f"G_{k} has shape {np.shape(g)}, expected {(self.ell, self.ell)}")

    def get(self, k: int) -> np.ndarray:
        return self.G.get(k, np.zeros((self.ell, self.ell)))

    @property
    def sizes(self) -> list[int]:
        return sorted(self.G)


def _node_pointed_index(H: Hypergraph):
    """CSR-style map node -> pointed-edge indices with that point."""
    points = np.concatenate([H.edges[k].ravel() for k in H.K]) if H.K else np.zeros(0, int)
    order = np.argsort(points, kind="stable")
    ptr = np.zeros(H.n + 1, dtype=np.int64)
    np.cumsum(np.bincount(points, minlength=H.n), out=ptr[1:])
    return ptr, order


def _sibling_pairs(H: Hypergraph):
    """All (iQ, jQ) pairs of distinct pointed edges on the same edge."""
    rows, cols = [], []
    for k in H.K:
        m = H.edges[k].shape[0]
        base = H.pointed_offset(k) + k * np.arange(m)[:, None]
        a, b = np.nonzero(~np.eye(k, dtype=bool))
        rows.append((base + a).ravel())
        cols.append((base + b).ravel())
    if not rows:
        return np.zeros(0, int), np.zeros(0, int)
    return np.concatenate(rows), np.concatenate(cols)


def build_B(H: Hypergraph, transpose: bool = False) -> sp.csr_array:
    """Nonbacktracking operator on pointed edges (``m̌ x m̌``).

    With ``transpose=True`` the message orientation ``B.T`` is returned.
    """
    mc = H.num_pointed
    if mc == 0:
        return sp.csr_array((0, 0))
    points = np.concatenate([H.edges[k].ravel() for k in H.K])
    ptr, order = _node_pointed_index(H)
    src, via = _sibling_pairs(H)
    # iQ -> jR for every jR with point j = point(via), jR != via
    j = points[via]
    counts = ptr[j + 1] - ptr[j]
    rows = np.repeat(src, counts)
    starts = np.repeat(ptr[j], counts)
    within = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    cols = order[starts + within]
    keep = cols != np.repeat(via, counts)
    rows, cols = rows[keep], cols[keep]
    if transpose:
        rows, cols = cols, rows
    data = np.ones(rows.size)
    return sp.csr_array((data, (rows, cols)), shape=(mc, mc))


def _size_mask(H: Hypergraph, k: int) -> np.ndarray:
    mask = np.zeros(H.num_pointed, dtype=bool)
    if k in H.edges:
        off = H.pointed_offset(k)
        mask[off : off + H.edges[k].size] = True
    return mask


def build_Bk(H: Hypergraph, k: int, transpose: bool = False) -> sp.csr_array:
    """``B`` (or ``B.T``) with columns restricted to size-``k`` pointed edges."""
    B = build_B(H, transpose=transpose)
    return (B @ sp.diags_array(_size_mask(H, k).astype(float))).tocsr()


def _block_rows(H: Hypergraph, op) -> sp.csr_array:
    """``kappa x kappa`` block matrix whose row block k repeats ``op(k)``."""
    return sp.block_array([[op(k)] * H.kappa for k in H.K], format="csr")


def build_Bprime(H: Hypergraph) -> sp.csr_array:
    """Reduced ``2 kappa n`` matrix carrying the nontrivial spectrum of B.

    Block form ``[[0, D - I], [(I - K) (x) I_n, A + (2I - K) (x) I_n]]`` where
    row block ``k`` of ``A`` (``D``) repeats ``A_k`` (``D_k``) across all
    column blocks.
    """
    n, kap = H.n, H.kappa
    if kap == 0:
        return sp.csr_array((0, 0))
    N = kap * n
    Ks = np.array(H.K, dtype=float)
    A = _block_rows(H, lambda k: adjacency_operator(H, k))
    D = _block_rows(H, lambda k: degree_operator(H, k))
    I = sp.eye_array(N, format="csr")
    lower_left = sp.diags_array(np.repeat(1.0 - Ks, n))
    lower_right = A + sp.diags_array(np.repeat(2.0 - Ks, n))
    return sp.block_array([[None, D - I], [lower_left, lower_right]], format="csr")


def reduce_pointed_vector(H: Hypergraph, u) -> np.ndarray:
    """Aggregate a pointed-edge vector to ``(x1, x2)`` in the ``B'`` basis.

    ``x1[k, i]`` sums ``u[iQ]`` over size-``k`` edges at ``i``;
    ``x2[k, i]`` sums ``u[jQ]`` over the other points ``j`` of those edges.
    """
    u = np.asarray(u)
    if u.shape[0] != H.num_pointed:
        raise ValueError(f"vector length {u.shape[0]} != {H.num_pointed} pointed edges")
    n = H.n
    x1 = np.zeros((H.kappa, n), dtype=u.dtype)
    x2 = np.zeros((H.kappa, n), dtype=u.dtype)
    for a, k in enumerate(H.K):
        arr = H.edges[k]
        off = H.pointed_offset(k)
        block = u[off : off + arr.size].reshape(arr.shape)
        totals = block.sum(axis=1, keepdims=True)
        np.add.at(x1[a], arr.ravel(), block.ravel())
        np.add.at(x2[a], arr.ravel(), (totals - block).ravel())
    return np.concatenate([x1.ravel(), x2.ravel()])


def _pole_factors(H: Hypergraph, mu):
    """Split ``f_H(mu)`` into the parts with positive and negative exponents.

    Returns ``(num, den)`` with ``f_H = num / den``, both polynomials in mu.
    """
    num = 1.0 + 0j
    den = 1.0 + 0j
    n = H.n
    for k in H.K:
        m = H.m_k(k)
        for base, e in ((1 - mu, m * (k - 1) - n), (1 + mu * (k - 1), m - n)):
            if e >= 0:
                num *= base**e
            else:
                den *= base ** (-e)
    return num, den


def ihara_bass_sides(H: Hypergraph, mu: complex):
    """Both sides of the determinant identity, cleared of negative powers.

    Returns ``(lhs, rhs)`` with
    ``lhs = det(I - mu B) * den(mu)`` and ``rhs = num(mu) * det(M(mu))`` where
    ``f_H = num / den`` and
    ``M(mu) = I + mu((K - 2I) (x) I - A) + mu^2 ((K - I) (x) I)(D - I)``.
    """
    n = H.n
    mc = H.num_pointed
    B = build_B(H).toarray()
    lhs = np.linalg.det(np.eye(mc) - mu * B) if mc else 1.0
    if H.kappa == 0:
        return complex(lhs), 1.0 + 0j
    N = H.kappa * n
    Ks = np.repeat(np.array(H.K, dtype=float), n)
    A = _block_rows(H, lambda k: adjacency_operator(H, k)).toarray()
    D = _block_rows(H, lambda k: degree_operator(H, k)).toarray()
    M = (
        np.eye(N)
        + mu * (np.diag(Ks - 2.0) - A)
        + mu**2 * (np.diag(Ks - 1.0) @ (D - np.eye(N)))
    )
    num, den = _pole_factors(H, mu)
    return complex(lhs * den), complex(num * np.linalg.det(M))


def ihara_bass_residual(H: Hypergraph, mu: complex, dense_limit: int = 16, pole_margin: float = 1e-3) -> float:
    """Relative mismatch ``|L - R| / (1 + |L| + |R|)`` of the determinant identity."""
    if H.n > dense_limit:
        raise ValueError(f"n={H.n} exceeds dense limit {dense_limit}")
    poles = [1.0] + [-1.0 / (k - 1) for k in H.K]
    if any(abs(mu - p) < pole_margin for p in poles):
        raise ValueError(f"mu={mu} within {pole_margin} of a pole")
    lhs, rhs = ihara_bass_sides(H, mu)
    return abs(lhs - rhs) / (1.0 + abs(lhs) + abs(rhs))


def build_G(params) -> GroupMatrixSet:
    """``g[k; s, t] = q_s (c_k(s, t) / ((k - 1) c_k(s)) - 1)``.

    ``params`` needs ``q`` (length ell), ``pair_degrees`` mapping size to the
    ``ell x ell`` matrix ``c_k(s, t)``, and ``mean_degrees`` mapping size to
    the vector ``c_k(s)``; both :class:`hypernb.hsbm.BlockmodelParams` and the
    estimator output provide them.
    """
    q = np.asarray(params.q, dtype=float)
    ell = q.shape[0]
    G = {}
    for k, C in params.pair_degrees.items():
        ck = np.asarray(params.mean_degrees[k], dtype=float)
        if np.any(ck <= 0):
            raise ValueError(f"zero expected {k}-degree for some group")
        G[k] = q[:, None] * (np.asarray(C) / ((k - 1) * ck[:, None]) - 1.0)
    return GroupMatrixSet(ell, G)


def build_J(H: Hypergraph, G: GroupMatrixSet) -> sp.csr_array:
    """Linearized BP operator ``sum_k G_k (x) B_k`` in message orientation.

    ``B_k`` here is ``B.T`` with columns restricted to size ``k``.
    """
    mc = H.num_pointed
    J = sp.csr_array((G.ell * mc, G.ell * mc))
    for k in H.K:
        g = G.get(k)
        if not np.any(g):
            continue
        J = J + sp.kron(sp.csr_array(g), build_Bk(H, k, transpose=True), format="csr")
    return J.tocsr()


def build_Jprime(H: Hypergraph, G: GroupMatrixSet) -> sp.csr_array:
    """Reduced ``2 ell kappa n`` matrix of :func:`build_J`.

    With ``x1, x2`` the aggregates of :func:`reduce_pointed_vector` applied
    per group, the rows read

    * ``x1'[s,k,i] = d_k(i) sum_{k',t} g[k';s,t] x2[t,k',i] - sum_t g[k;s,t] x2[t,k,i]``
    * ``x2'[s,k,i] = sum_{k',t} g[k';s,t] sum_j a_k(i,j) x2[t,k',j]
      - sum_t g[k;s,t] ((k-1) x1[t,k,i] + (k-2) x2[t,k,i])``.
    """
    n, kap, ell = H.n, H.kappa, G.ell
    if kap == 0:
        return sp.csr_array((0, 0))
    Ks = H.K
    Gs = [G.get(k) for k in Ks]
    # (s,k) x (t,k') coefficient matrices; row k selects D_k / A_k
    Hfull = np.zeros((ell * kap, ell * kap))  # entry g[k'; s, t]
    Hdiag = np.zeros((ell * kap, ell * kap))  # entry delta_{kk'} g[k; s, t]
    for s in range(ell):
        for a in range(kap):
            for t in range(ell):
                for b in range(kap):
                    Hfull[s * kap + a, t * kap + b] = Gs[b][s, t]
                Hdiag[s * kap + a, t * kap + a] = Gs[a][s, t]
    Dk = [degree_operator(H, k) for k in Ks]
    Ak = [adjacency_operator(H, k) for k in Ks]
    I_n = sp.eye_array(n, format="csr")

    def blocks(node_op):
        # row block (s, k) gets Hfull[(s,k), :] (x) node_op[k]
        out = sp.csr_array((ell * kap * n, ell * kap * n))
        for a in range(kap):
            rowsel = np.zeros(ell * kap)
            rowsel[a::kap] = 1.0
            out = out + sp.kron(sp.csr_array(rowsel[:, None] * Hfull), node_op[a])
        return out.tocsr()

    km1 = np.tile(np.array(Ks, dtype=float) - 1.0, ell)
    km2 = np.tile(np.array(Ks, dtype=float) - 2.0, ell)
    upper_right = blocks(Dk) - sp.kron(sp.csr_array(Hdiag), I_n)
    lower_left = -sp.kron(sp.csr_array(Hdiag * km1[None, :]), I_n)
    lower_right = blocks(Ak) - sp.kron(sp.csr_array(Hdiag * km2[None, :]), I_n)
    N = ell * kap * n
    return sp.block_array(
        [[sp.csr_array((N, N)), upper_right], [lower_left, lower_right]], format="csr"
    )


def jacobian_edge_maps(H: Hypergraph, G: GroupMatrixSet):
    """Edge-level maps for the second alternative of the J -> J' reduction.

    Returns ``(Msum, N)``: ``Msum`` sums a ``(group, pointed edge)`` vector
    over the points of each edge, giving ``t[s, Q]``; ``N`` maps
    ``t[s, Q] -> (1 - |Q|) sum_t g[|Q|; s, t] t[t, Q]``. Edges are indexed in
    canonical (size, index) order.
    """
    ell = G.ell
    m = H.m
    rows = np.concatenate(
        [np.repeat(np.arange(H.m_k(k)) + sum(H.m_k(j) for j in H.K if j < k), k) for k in H.K]
    ) if H.K else np.zeros(0, int)
    S = sp.csr_array((np.ones(rows.size), (rows, np.arange(rows.size))), shape=(m, H.num_pointed))
    Msum = sp.kron(sp.eye_array(ell), S, format="csr")
    sizes = np.concatenate([np.full(H.m_k(k), k) for k in H.K]) if H.K else np.zeros(0)
    N = sp.csr_array((ell * m, ell * m))
    for k in H.K:
        sel = sp.diags_array((sizes == k).astype(float))
        N = N + (1 - k) * sp.kron(sp.csr_array(G.get(k)), sel)
    return Msum, N.tocsr()


def export_triplets(M, path) -> None:
    """Write ``M`` as coordinate triplets.

    Format: first line ``# nrows ncols nnz``, then one ``row col value`` line
    per stored entry (0-based indices, row-major order, ``repr`` floats).
    """
    C = sp.coo_array(sp.csr_array(M))
    C.sum_duplicates()
    lines = [f"# {C.shape[0]} {C.shape[1]} {C.nnz}"]
    lines += [f"{r} {c} {v!r}" for r, c, v in zip(C.row, C.col, C.data.tolist())]
    Path(path).write_text("\n".join(lines) + "\n")


def load_triplets(path) -> sp.csr_array:
    text = Path(path).read_text().splitlines()
    nrows, ncols, _ = (int(v) for v in text[0].lstrip("#").split())
    body = np.loadtxt(text[1:], ndmin=2) if len(text) > 1 else np.zeros((0, 3))
    return sp.csr_array(
        (body[:, 2], (body[:, 0].astype(int), body[:, 1].astype(int))), shape=(nrows, ncols)
    )
