"""From eigenvectors to node labels.

The nonbacktracking pipeline (:func:`nbhsc`) embeds each node by the signs of
its aggregated entries in the leading eigenvectors of ``B'``. The
belief-propagation pipeline (:func:`bphsc`) alternates between estimating the
group matrices from the current labels and clustering the leading real
eigenvectors of the reduced Jacobian ``J'``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .eigen import ConvergenceError, leading_eigenpairs, select_real_eigenpairs
from .hsbm import estimate_parameters
from .hypergraph import Hypergraph
from .operators import GroupMatrixSet, build_Bprime, build_Jprime

log = logging.getLogger(__name__)

__all__ = [
    "Clustering",
    "node_sums",
    "aggregate_B_eigvec",
    "aggregate_J_eigvec",
    "aggregate_Jprime_eigvec",
    "kmeans",
    "adjusted_rand_index",
    "nbhsc",
    "bphsc_step",
    "bphsc",
    "metrics_row",
]

KMEANS_RESTARTS = 20


@dataclass
class Clustering:
    """Labels plus the k-means fit that produced them.

    ``embedding`` is the sign matrix that was clustered and ``eigenvalues``
    the eigenvalues behind its columns. ``warning`` is set when a step found
    no usable eigenvectors and handed back its input labels, or when its
    embedding was too degenerate to compare against other rounds.
    """

    labels: np.ndarray
    objective: float
    variance_explained: float = 0.0
    ari: float | None = None
    embedding: np.ndarray | None = None
    eigenvalues: np.ndarray | None = None
    history: list = field(default_factory=list)
    warning: bool = False


def node_sums(H: Hypergraph, u) -> np.ndarray:
    """``x[i] = sum over pointed edges iQ of u[iQ]`` (all sizes)."""
    u = np.asarray(u)
    if u.shape[0] != H.num_pointed:
        raise ValueError(f"vector length {u.shape[0]} != {H.num_pointed} pointed edges")
    x = np.zeros(H.n, dtype=u.dtype)
    for k in H.K:
        off = H.pointed_offset(k)
        arr = H.edges[k]
        np.add.at(x, arr.ravel(), u[off : off + arr.size])
    return x


def aggregate_B_eigvec(H: Hypergraph, u) -> np.ndarray:
    """Sign of the real part of :func:`node_sums`."""
    return np.sign(np.real(node_sums(H, u)))


def aggregate_J_eigvec(H: Hypergraph, u, ell: int) -> np.ndarray:
    """``n x ell`` signs of per-group node sums of a ``(group, pointed edge)`` vector."""
    u = np.asarray(u)
    mc = H.num_pointed
    if u.shape[0] != ell * mc:
        raise ValueError(f"vector length {u.shape[0]} != {ell} x {mc}")
    return np.column_stack([aggregate_B_eigvec(H, u[s * mc : (s + 1) * mc]) for s in range(ell)])


def aggregate_Jprime_eigvec(H: Hypergraph, w, ell: int) -> np.ndarray:
    """Same signs read off block 1 of a ``J'`` vector, summed over sizes."""
    w = np.asarray(w)
    n, kap = H.n, H.kappa
    if w.shape[0] != 2 * ell * kap * n:
        raise ValueError(f"vector length {w.shape[0]} != 2 x {ell} x {kap} x {n}")
    x1 = w[: ell * kap * n].reshape(ell, kap, n).sum(axis=1)
    return np.sign(np.real(x1)).T


def _bprime_node_signs(H: Hypergraph, w) -> np.ndarray:
    n, kap = H.n, H.kappa
    return np.sign(np.real(w[: kap * n].reshape(kap, n).sum(axis=0)))


# k-means


def _sq_dists(X, C):
    return (
        np.sum(X * X, axis=1)[:, None] - 2.0 * X @ C.T + np.sum(C * C, axis=1)[None, :]
    ).clip(min=0.0)


def _plusplus(X, ell, rng):
    n = X.shape[0]
    C = np.empty((ell, X.shape[1]))
    C[0] = X[rng.integers(n)]
    d = _sq_dists(X, C[:1])[:, 0]
    for j in range(1, ell):
        tot = d.sum()
        idx = rng.choice(n, p=d / tot) if tot > 0 else rng.integers(n)
        C[j] = X[idx]
        d = np.minimum(d, _sq_dists(X, C[j : j + 1])[:, 0])
    return C


def _lloyd(X, ell, rng, max_iter):
    C = _plusplus(X, ell, rng)
    labels = np.full(X.shape[0], -1)
    history = []
    for _ in range(max_iter):
        D = _sq_dists(X, C)
        new = np.argmin(D, axis=1)
        history.append(float(D[np.arange(len(new)), new].sum()))
        if np.array_equal(new, labels):
            break
        labels = new
        for j in range(ell):
            members = labels == j
            if members.any():
                C[j] = X[members].mean(axis=0)
        for j in range(ell):
            if not np.any(labels == j):
                # reseed an empty cluster at the point worst served by its centre
                far = int(np.argmax(np.sum((X - C[labels]) ** 2, axis=1)))
                labels[far] = j
                C[j] = X[far]
                for i in np.unique(labels):
                    C[i] = X[labels == i].mean(axis=0)
    obj = float(np.sum((X - C[labels]) ** 2))
    history.append(obj)
    return labels, obj, history


def kmeans(points, ell: int, restarts: int = KMEANS_RESTARTS, seed=0, max_iter: int = 300) -> Clustering:
    """Lloyd's algorithm from k-means++ seeds, best of ``restarts`` runs.

    ``objective`` is the within-group sum of squares and ``history`` the
    objective after each assignment of the winning run.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if ell < 1 or ell > n:
        raise ValueError(f"need 1 <= ell <= n, got ell={ell}, n={n}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        labels, obj, hist = _lloyd(X, ell, rng, max_iter)
        if best is None or obj < best[1]:
            best = (labels, obj, hist)
    labels, obj, hist = best
    total = float(np.sum((X - X.mean(axis=0)) ** 2))
    ve = 1.0 - obj / total if total > 0 else 0.0
    return Clustering(labels.astype(np.int64), obj, ve, embedding=X, history=hist)


def adjusted_rand_index(z1, z2) -> float:
    """Hubert-Arabie adjusted Rand index; 0 when it is undefined (0/0)."""
    z1, z2 = np.asarray(z1), np.asarray(z2)
    if z1.shape != z2.shape or z1.ndim != 1:
        raise ValueError("label vectors must have equal length")
    n = z1.size
    if n < 2:
        return 0.0
    _, a = np.unique(z1, return_inverse=True)
    _, b = np.unique(z2, return_inverse=True)
    table = np.zeros((a.max() + 1, b.max() + 1))
    np.add.at(table, (a, b), 1.0)

    def pairs(x):
        return float(np.sum(x * (x - 1)) / 2.0)

    index = pairs(table)
    ra, rb = pairs(table.sum(axis=1)), pairs(table.sum(axis=0))
    expected = ra * rb / (n * (n - 1) / 2.0)
    denom = 0.5 * (ra + rb) - expected
    if denom == 0:
        return 0.0
    return (index - expected) / denom


def _score(result: Clustering, reference):
    if reference is not None:
        reference = np.asarray(reference)
        if reference.shape != result.labels.shape:
            raise ValueError("reference labels have the wrong length")
        result.ari = adjusted_rand_index(result.labels, reference)
    return result


def nbhsc(H: Hypergraph, ell: int, h: int, seed=0, reference=None, restarts: int = KMEANS_RESTARTS) -> Clustering:
    """Cluster by signs of the leading ``h`` eigenvectors of ``B'``."""
    if H.m == 0:
        raise ValueError("hypergraph has no edges")
    if h < 1:
        raise ValueError("h must be >= 1")
    if ell == 1:
        return _score(Clustering(np.zeros(H.n, np.int64), 0.0), reference)
    Bp = build_Bprime(H)
    S = leading_eigenpairs(Bp, min(h, Bp.shape[0] - 1), seed=seed)
    S = S.subset(np.arange(min(h, len(S))))
    X = np.column_stack([_bprime_node_signs(H, S.vectors[:, j]) for j in range(len(S))])
    out = kmeans(X, ell, restarts, seed)
    out.eigenvalues = S.values
    return _score(out, reference)


def bphsc_step(
    H: Hypergraph,
    z0,
    ell: int,
    h: int,
    seed=0,
    *,
    G: GroupMatrixSet | None = None,
    pseudocount: float = 1.0,
    restarts: int = KMEANS_RESTARTS,
    reference=None,
    magnitude_floor: float = 0.0,
) -> Clustering:
    """One estimate-and-cluster round.

    ``G`` (known group matrices) skips the estimation from ``z0``. Only real
    eigenpairs of ``J'`` with ``|lambda| > magnitude_floor`` among the
    leading ``h`` are used; if none qualify ``z0`` comes back with
    ``warning`` set.  ``warning`` is also set when the embedding has no more
    than ``ell`` distinct rows, since any partition of it then explains all
    of the variance and the round carries no evidence.
    """
    z0 = np.asarray(z0, dtype=np.int64)
    if z0.shape != (H.n,):
        raise ValueError("initial labels have the wrong length")
    if G is None:
        G = estimate_parameters(H, z0, ell, pseudocount=pseudocount).G
    Jp = build_Jprime(H, G)
    S = None
    if Jp.nnz:
        S = leading_eigenpairs(Jp, min(h, Jp.shape[0] - 1), seed=seed)
        S = select_real_eigenpairs(S, h, magnitude_floor=magnitude_floor)
        S = S.subset(np.flatnonzero(np.abs(S.values) > magnitude_floor))
    if S is None or len(S) == 0:
        log.warning("no real eigenvalues above the magnitude floor; keeping the input labels")
        res = Clustering(z0.copy(), np.inf, 0.0, eigenvalues=np.zeros(0), warning=True)
        return _score(res, reference)
    X = np.hstack([aggregate_Jprime_eigvec(H, S.vectors[:, j], ell) for j in range(len(S))])
    out = kmeans(X, ell, restarts, seed)
    out.eigenvalues = S.values
    distinct = len(np.unique(X, axis=0))
    if distinct <= ell:
        log.info("embedding has only %d distinct rows", distinct)
        out.warning = True
    return _score(out, reference)


def bphsc(
    H: Hypergraph,
    ell: int,
    h: int,
    rounds: int = 10,
    seed=0,
    init="random",
    *,
    G: GroupMatrixSet | None = None,
    pseudocount: float = 1.0,
    restarts: int = KMEANS_RESTARTS,
    reference=None,
    magnitude_floor: float = 0.0,
) -> Clustering:
    """Alternate estimation and clustering for ``rounds`` rounds.

    ``init`` is ``"random"`` (uniform labels), a label vector, or
    ``"known_params"`` which requires ``G`` and uses it in every round.
    The returned round is the one whose embedding is best explained by its
    clustering (largest share of variance between groups).
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    rng = np.random.default_rng(seed)
    known = isinstance(init, str) and init == "known_params"
    if known and G is None:
        raise ValueError("known_params mode needs the group matrices G")
    if isinstance(init, str):
        if init not in ("random", "known_params"):
            raise ValueError(f"unknown init {init!r}")
        z = rng.integers(0, ell, size=H.n)
    else:
        z = np.asarray(init, dtype=np.int64)
    best = None
    history = []
    for r in range(rounds):
        step = bphsc_step(
            H, z, ell, h, seed=int(rng.integers(2**31)),
            G=G if known else None, pseudocount=pseudocount, restarts=restarts,
            magnitude_floor=magnitude_floor,
        )
        history.append(step.variance_explained)
        if not step.warning and (best is None or step.variance_explained > best.variance_explained):
            best = step
        z = step.labels
    if best is None:
        best = step
    best.history = history
    return _score(best, reference)


def metrics_row(seed, ell, h, result: Clustering) -> str:
    ari = "" if result.ari is None else repr(float(result.ari))
    return f"{seed},{ell},{h},{result.objective!r},{result.variance_explained!r},{ari}"
