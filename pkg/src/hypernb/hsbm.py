"""Hypergraph stochastic blockmodel in the ball-dropping parameterization.

For every edge size ``k`` the model has a mean ``k``-degree ``c_k`` and a
within-cluster fraction ``p_k``. A sample draws ``Poisson(n c_k / k)``
edges of size ``k``; each is, with probability ``p_k``, a uniform
monochromatic ``k``-subset (cluster chosen proportionally to its number of
``k``-subsets) and otherwise a uniform ``k``-subset carrying at least two
labels.

Closed forms for the balanced two-group case live in :func:`theory_report`:
expected pair degrees, eigenvalue predictions, and the detectability
boundaries (hyperplanes for the nonbacktracking embedding, an ellipsoid for
the linearized BP embedding).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .hypergraph import Hypergraph, pointed_edges
from .operators import GroupMatrixSet, build_Bk, build_G

__all__ = [
    "BlockmodelParams",
    "TheoryReport",
    "EstimatedParameters",
    "r_k",
    "sample_labels",
    "sample_hypergraph",
    "ckin_ckout",
    "beta_parameterized",
    "theory_report",
    "theory_report_to_csv",
    "estimate_parameters",
    "pair_count_matrix",
    "expectation_eigvec_residual",
]


def r_k(k: int) -> float:
    """Share of same-label node pairs in a random bichromatic k-edge, halved."""
    t = 2.0 ** (2 - k)
    return (1.0 - t) / (2.0 - t)


@dataclass(frozen=True)
class BlockmodelParams:
    n: int
    ell: int
    c: dict[int, float]
    p: dict[int, float]
    q: tuple[float, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        q = np.full(self.ell, 1.0 / self.ell) if self.q is None else np.asarray(self.q, float)
        if q.shape != (self.ell,):
            raise ValueError(f"q must have length {self.ell}")
        if abs(q.sum() - 1.0) > 1e-12 or np.any(q < 0):
            raise ValueError("q must be a probability vector")
        object.__setattr__(self, "q", tuple(float(v) for v in q))
        c = {int(k): float(v) for k, v in self.c.items() if float(v) > 0}
        p = {int(k): float(self.p.get(k, 1.0 / self.ell)) for k in c}
        for k in c:
            if k < 2:
                raise ValueError("edge sizes must be >= 2")
            if not 0.0 <= p[k] <= 1.0:
                raise ValueError(f"p_{k} must lie in [0, 1]")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "p", p)

    @property
    def sizes(self) -> list[int]:
        return sorted(self.c)

    @property
    def pair_degrees(self) -> dict[int, np.ndarray]:
        """Expected ``c_k(s, t)``: cluster-``t`` neighbours of a cluster-``s`` node."""
        q = np.asarray(self.q)
        out = {}
        for k in self.sizes:
            ck, pk = self.c[k], self.p[k]
            qk = q**k
            mono = qk.sum()
            within = np.diag(qk / mono) * k * (k - 1) * pk
            between = np.zeros((self.ell, self.ell))
            if mono < 1.0:
                between = (1 - pk) * k * (k - 1) * (np.outer(q, q) - np.diag(qk)) / (1.0 - mono)
            # expected ordered-pair count per edge, scaled to degrees
            pairs = (within + between) * ck / k
            with np.errstate(divide="ignore", invalid="ignore"):
                C = np.where(np.outer(q, q) > 0, pairs / np.outer(q, q), 0.0)
            out[k] = C
        return out

    @property
    def mean_degrees(self) -> dict[int, np.ndarray]:
        q = np.asarray(self.q)
        return {k: C @ q / (k - 1) for k, C in self.pair_degrees.items()}

    def group_matrices(self) -> GroupMatrixSet:
        return build_G(self)


def sample_labels(n: int, q, ell: int, seed) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (ell,) or abs(q.sum() - 1) > 1e-12:
        raise ValueError("invalid group proportions")
    return np.random.default_rng(seed).choice(ell, size=n, p=q)


def _distinct_rows(rng, high: int, count: int, k: int, accept=None) -> np.ndarray:
    """``count`` rows of ``k`` distinct integers in ``[0, high)``, by rejection."""
    out = np.empty((0, k), dtype=np.int64)
    while out.shape[0] < count:
        need = count - out.shape[0]
        draw = rng.integers(0, high, size=(int(need * 1.3) + 8, k))
        s = np.sort(draw, axis=1)
        ok = np.all(s[:, 1:] != s[:, :-1], axis=1)
        if accept is not None:
            ok &= accept(draw)
        out = np.vstack([out, draw[ok][:need]])
    return out


def sample_hypergraph(params: BlockmodelParams, z, fixed_count: bool = False) -> Hypergraph:
    """Draw a hypergraph given labels ``z``; deterministic in ``params.seed``."""
    z = np.asarray(z, dtype=np.int64)
    n = params.n
    if z.shape != (n,):
        raise ValueError("label vector length must equal n")
    rng = np.random.default_rng([params.seed, 0x4853424D])
    members = [np.flatnonzero(z == s) for s in range(params.ell)]
    sizes = np.array([len(m) for m in members])
    kbar = max(params.sizes, default=2)
    if np.any(sizes < kbar):
        raise ValueError(f"every group needs at least {kbar} members, got sizes {sizes.tolist()}")
    edges = {}
    for k in params.sizes:
        mean = n * params.c[k] / k
        total = int(round(mean)) if fixed_count else int(rng.poisson(mean))
        n_within = int(rng.binomial(total, params.p[k]))
        weights = np.array([comb(int(m), k) for m in sizes], dtype=float)
        groups = rng.choice(params.ell, size=n_within, p=weights / weights.sum())
        rows = []
        for s in range(params.ell):
            cnt = int(np.sum(groups == s))
            if cnt:
                rows.append(members[s][_distinct_rows(rng, sizes[s], cnt, k)])
        n_between = total - n_within
        if n_between:
            rows.append(
                _distinct_rows(
                    rng, n, n_between, k,
                    accept=lambda d: np.any(z[d] != z[d[:, :1]], axis=1),
                )
            )
        if rows:
            arr = np.vstack(rows)
            edges[k] = arr[rng.permutation(arr.shape[0])]
    return Hypergraph(n, edges)


def ckin_ckout(k: int, c_k: float, p_k: float) -> tuple[float, float]:
    """Balanced two-group within/between pair degrees for size ``k``."""
    if k < 2:
        raise ValueError("k must be >= 2")
    rk = r_k(k)
    cin = 2.0 * (k - 1) * c_k * (p_k + (1.0 - p_k) * rk)
    return cin, 2.0 * (k - 1) * c_k - cin


def beta_parameterized(c: dict, p: dict) -> float:
    """Community eigenvalue as an affine function of the ``p_k``."""
    return sum(
        (k - 1) * c[k] * (2 * (1 - r_k(k)) * p[k] + 2 * r_k(k) - 1) for k in c
    )


@dataclass(frozen=True)
class TheoryReport:
    """Balanced two-group predictions.

    ``ellipse_center``/``ellipse_radii`` describe the surface ``lam = 1`` in
    ``p``-coordinates; ``collision_center``/``collision_radii`` the surface
    ``lam = nu``. ``hyperplanes`` holds ``(normal, offsets)`` with
    ``beta = normal @ p + offset0`` so that ``beta = +-sqrt(alpha)`` reads
    ``normal @ p = +-sqrt(alpha) - offset0``.
    """

    sizes: list[int]
    alpha_k: dict[int, float]
    beta_k: dict[int, float]
    gamma_k: dict[int, float]
    r: dict[int, float]
    c_in: dict[int, float]
    c_out: dict[int, float]
    alpha: float
    beta: float
    lam: float
    nu: float
    ellipse_center: dict[int, float]
    ellipse_radii: dict[int, float]
    collision_center: dict[int, float]
    collision_radii: dict[int, float]
    hyperplane_normal: dict[int, float] = field(default_factory=dict)
    hyperplane_offset: float = 0.0

    @property
    def detect_vanilla(self) -> bool:
        return self.beta**2 > self.alpha

    @property
    def detect_bp(self) -> bool:
        return abs(self.lam) > 1.0


def theory_report(params: BlockmodelParams) -> TheoryReport:
    if params.ell != 2 or not np.allclose(params.q, (0.5, 0.5), atol=1e-12):
        raise ValueError("closed forms hold only for two balanced groups")
    sizes = params.sizes
    if not sizes:
        raise ValueError("no edge sizes with positive mean degree")
    a_k, b_k, g_k, r, cin, cout = {}, {}, {}, {}, {}, {}
    xc, xa, cc, ca, normal = {}, {}, {}, {}, {}
    offset = 0.0
    for k in sizes:
        ck, pk = params.c[k], params.p[k]
        r[k] = r_k(k)
        cin[k], cout[k] = ckin_ckout(k, ck, pk)
        a_k[k] = (k - 1) * ck
        b_k[k] = (cin[k] - cout[k]) / 2.0
        g_k[k] = cin[k] / ((k - 1) * ck) - 1.0
        scale = 2.0 - 2.0 * r[k]  # dp = dy / scale, y = beta_k / alpha_k
        xc[k] = (1.0 - 2.0 * r[k]) / scale
        xa[k] = 1.0 / (scale * np.sqrt(a_k[k]))
        normal[k] = a_k[k] * scale
        offset += a_k[k] * (2 * r[k] - 1)
    alpha = sum(a_k.values())
    beta = sum(b_k.values())
    beta_affine = beta_parameterized(params.c, params.p)
    if abs(beta - beta_affine) > 1e-12 * max(1.0, abs(beta)):
        raise AssertionError(f"beta cross-check failed: {beta} vs {beta_affine}")
    lam = sum(g_k[k] * b_k[k] for k in sizes)
    nu = sum(g_k[k] * a_k[k] for k in sizes)
    for k in sizes:
        scale = 2.0 - 2.0 * r[k]
        cc[k] = (1.5 - 2.0 * r[k]) / scale
        ca[k] = np.sqrt(alpha / (4.0 * a_k[k])) / scale
    return TheoryReport(
        sizes, a_k, b_k, g_k, r, cin, cout, alpha, beta, lam, nu,
        xc, xa, cc, ca, normal, offset,
    )


def theory_report_to_csv(T: TheoryReport) -> str:
    head = "k,alpha_k,beta_k,gamma_k,r_k,c_in,c_out,ellipse_center,ellipse_radius,collision_center,collision_radius"
    lines = [head]
    for k in T.sizes:
        vals = [T.alpha_k[k], T.beta_k[k], T.gamma_k[k], T.r[k], T.c_in[k], T.c_out[k],
                T.ellipse_center[k], T.ellipse_radii[k], T.collision_center[k], T.collision_radii[k]]
        lines.append(f"{k}," + ",".join(repr(float(v)) for v in vals))
    # both candidate bulk radii: sqrt of the leading eigenvalue and sqrt(|beta|)
    lines.append("aggregate,alpha,beta,lambda,nu,detect_vanilla,detect_bp,sqrt_alpha,sqrt_beta")
    lines.append(
        f"all,{T.alpha!r},{T.beta!r},{T.lam!r},{T.nu!r},{int(T.detect_vanilla)},{int(T.detect_bp)},"
        f"{float(np.sqrt(T.alpha))!r},{float(np.sqrt(abs(T.beta)))!r}"
    )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class EstimatedParameters:
    """Plug-in estimates from a labelled hypergraph.

    ``pair_counts[k][s, t]`` counts ordered node pairs (one node labelled
    ``s``, a different node labelled ``t``) inside size-``k`` edges.
    """

    q: np.ndarray
    pair_counts: dict[int, np.ndarray]
    pair_degrees: dict[int, np.ndarray]
    mean_degrees: dict[int, np.ndarray]
    G: GroupMatrixSet


def pair_count_matrix(H: Hypergraph, z, ell: int, k: int) -> np.ndarray:
    """Multiplicity-counted ``m_k(s, t)`` for size-``k`` edges."""
    arr = H.edges.get(k)
    if arr is None:
        return np.zeros((ell, ell))
    lab = np.asarray(z)[arr]
    counts = np.zeros((arr.shape[0], ell))
    for s in range(ell):
        counts[:, s] = np.sum(lab == s, axis=1)
    return counts.T @ counts - np.diag(counts.sum(axis=0))


def estimate_parameters(H: Hypergraph, z, ell: int, pseudocount: float = 1.0) -> EstimatedParameters:
    z = np.asarray(z, dtype=np.int64)
    if z.shape != (H.n,):
        raise ValueError("label vector length must equal n")
    if z.size and (z.min() < 0 or z.max() >= ell):
        raise ValueError(f"labels must lie in [0, {ell})")
    n = H.n
    q = (np.bincount(z, minlength=ell) + pseudocount) / (n + ell * pseudocount)
    counts, C, cs, G = {}, {}, {}, {}
    for k in H.K:
        m = pair_count_matrix(H, z, ell, k)
        counts[k] = m
        C[k] = m / (np.outer(q, q) * n)
        cs[k] = C[k] @ q / (k - 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = q[:, None] * (C[k] / ((k - 1) * cs[k][:, None]) - 1.0)
        g[cs[k] <= 0] = 0.0  # group with no k-edges carries no signal
        G[k] = g
    return EstimatedParameters(q, counts, C, cs, GroupMatrixSet(ell, G))


def expectation_eigvec_residual(H: Hypergraph, z, k: int, alpha_k: float, beta_k: float):
    """Signed per-entry residual means of the two in-expectation eigen relations.

    With ``u[iQ] = |Q| - 1`` and ``v[iQ] = sum_{j in Q - i} sigma_j`` (sigma =
    +1 for label 0, -1 otherwise) returns
    ``(mean(B_k u - alpha_k u), mean(B_k v - beta_k v))`` over pointed edges.
    Only ensemble averages are expected to vanish.
    """
    z = np.asarray(z)
    sigma = np.where(z == 0, 1.0, -1.0)
    P = pointed_edges(H)
    if P.shape[0] == 0:
        return 0.0, 0.0
    u = P[:, 1] - 1.0
    v = np.zeros(P.shape[0])
    for kk in H.K:
        arr = H.edges[kk]
        off = H.pointed_offset(kk)
        s = sigma[arr]
        v[off : off + arr.size] = (s.sum(axis=1, keepdims=True) - s).ravel()
    Bk = build_Bk(H, k)
    ru = Bk @ u - alpha_k * u
    rv = Bk @ v - beta_k * v
    return float(ru.mean()), float(rv.mean())
