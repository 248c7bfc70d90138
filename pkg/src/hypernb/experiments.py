"""Phase-diagram sweeps over the within-cluster fractions ``p_k``.

A sweep samples ``trials`` hypergraphs per grid cell, clusters each one and
records the mean adjusted Rand index. Every trial gets its own seed derived
from ``(master seed, cell index, trial index)`` so rows do not depend on the
order or the number of workers.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .clustering import bphsc, nbhsc
from .hsbm import BlockmodelParams, beta_parameterized, r_k, sample_hypergraph, sample_labels
from .hypergraph import clique_projection

__all__ = [
    "ALGORITHMS",
    "SweepSpec",
    "trial_seed",
    "run_trial",
    "run_sweep",
    "sweep_to_csv",
    "band_distance",
    "ellipse_distance",
    "boundary_curves",
    "boundary_to_csv",
]

ALGORITHMS = ("nbhsc", "bphsc", "bphsc_known", "bpgsc_projection")


@dataclass(frozen=True)
class SweepSpec:
    """Grid of ``p_k`` values for the sizes in ``axes``.

    ``axes[k] = (p_min, p_max, steps)``. Sizes with a mean degree but no axis
    use ``fixed_p``. ``h`` is the eigenvector count handed to the clustering.
    """

    n: int
    c: dict[int, float]
    axes: dict[int, tuple[float, float, int]]
    ell: int = 2
    trials: int = 20
    algo: str = "nbhsc"
    seed: int = 0
    h: int = 2
    rounds: int = 1
    fixed_p: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algo!r}; choose from {ALGORITHMS}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.axes:
            raise ValueError("need at least one grid axis")
        for k, (lo, hi, steps) in self.axes.items():
            if steps < 1:
                raise ValueError(f"axis {k}: steps must be >= 1")
            if not 0.0 <= lo <= hi <= 1.0:
                raise ValueError(f"axis {k}: need 0 <= p_min <= p_max <= 1")
        for k in self.c:
            if self.c[k] > 0 and k not in self.axes and k not in self.fixed_p:
                raise ValueError(f"size {k} has a mean degree but neither an axis nor a fixed p")

    @property
    def axis_sizes(self) -> list[int]:
        return sorted(self.axes)

    def cells(self) -> list[dict[int, float]]:
        grids = [np.linspace(lo, hi, steps) for lo, hi, steps in (self.axes[k] for k in self.axis_sizes)]
        out = []
        for combo in itertools.product(*grids):
            p = dict(self.fixed_p)
            p.update({k: float(v) for k, v in zip(self.axis_sizes, combo)})
            out.append(p)
        return out


def trial_seed(master: int, cell: int, trial: int) -> int:
    return int(np.random.SeedSequence([master, cell, trial]).generate_state(1)[0])


def run_trial(spec: SweepSpec, p: dict, seed: int) -> float:
    """ARI of one sampled hypergraph at parameters ``p``."""
    params = BlockmodelParams(n=spec.n, ell=spec.ell, c=spec.c, p=p, seed=seed)
    z = sample_labels(spec.n, params.q, spec.ell, seed)
    H = sample_hypergraph(params, z)
    if H.m == 0:
        return 0.0
    if spec.algo == "nbhsc":
        res = nbhsc(H, spec.ell, spec.h, seed=seed, reference=z)
    elif spec.algo == "bphsc":
        res = bphsc(H, spec.ell, spec.h, spec.rounds, seed=seed, reference=z)
    elif spec.algo == "bphsc_known":
        res = bphsc(
            H, spec.ell, spec.h, spec.rounds, seed=seed, init="known_params",
            G=params.group_matrices(), reference=z,
        )
    else:
        res = bphsc(clique_projection(H), spec.ell, spec.h, spec.rounds, seed=seed, reference=z)
    return float(res.ari)


def _cell(args):
    spec, idx, p = args
    return [run_trial(spec, p, trial_seed(spec.seed, idx, t)) for t in range(spec.trials)]


def run_sweep(spec: SweepSpec, workers: int = 1, progress=None):
    """Rows ``(p, mean_ari, std_ari, trials)`` in grid order."""
    cells = spec.cells()
    jobs = [(spec, i, p) for i, p in enumerate(cells)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_cell, jobs))
    else:
        results = []
        for job in jobs:
            results.append(_cell(job))
            if progress is not None:
                progress(len(results), len(jobs))
    return [(p, float(np.mean(a)), float(np.std(a)), len(a)) for p, a in zip(cells, results)]


def sweep_to_csv(spec: SweepSpec, rows) -> str:
    ks = spec.axis_sizes
    lines = [",".join([f"p_{k}" for k in ks] + ["mean_ari", "std_ari", "trials"])]
    for p, mean, std, t in rows:
        lines.append(",".join([repr(p[k]) for k in ks] + [repr(mean), repr(std), str(t)]))
    return "\n".join(lines) + "\n"


# boundaries, in p-coordinates, for two balanced groups


def _affine_beta(c: dict, axes: list[int]):
    """``beta = w @ p_axes + b``; only axis sizes may vary."""
    w = np.array([2 * (k - 1) * c[k] * (1 - r_k(k)) for k in axes])
    return w


def band_distance(c: dict, p: dict, axes: list[int]) -> float:
    """Signed L-infinity distance to the boundary of ``beta**2 < alpha``.

    Positive outside the band (where the nonbacktracking embedding detects),
    negative inside.
    """
    alpha = sum((k - 1) * v for k, v in c.items())
    beta = beta_parameterized(c, p)
    w1 = np.abs(_affine_beta(c, axes)).sum()
    root = np.sqrt(alpha)
    if abs(beta) >= root:
        return (abs(beta) - root) / w1
    return -min(root - beta, beta + root) / w1


def _lam_y(c, p):
    # lambda = sum_k alpha_k y_k**2 with y_k = gamma_k
    return sum(
        (k - 1) * c[k] * (2 * (1 - r_k(k)) * p[k] + 2 * r_k(k) - 1) ** 2 for k in c
    )


def _ellipse_points(c: dict, p: dict, axes: list[int], level: float, count: int):
    """Points of ``lambda(p) = level`` in the plane of two axis sizes."""
    a, b = axes
    fixed = sum(
        (k - 1) * c[k] * (2 * (1 - r_k(k)) * p[k] + 2 * r_k(k) - 1) ** 2
        for k in c if k not in axes
    )
    rest = level - fixed
    if rest <= 0:
        return np.zeros((0, 2))
    th = np.linspace(0.0, 2 * np.pi, count, endpoint=False)
    pts = []
    for k, trig in ((a, np.cos(th)), (b, np.sin(th))):
        al, r = (k - 1) * c[k], r_k(k)
        y = np.sqrt(rest / al) * trig
        pts.append((y + 1 - 2 * r) / (2 - 2 * r))
    return np.column_stack(pts)


def ellipse_distance(c: dict, p: dict, axes: list[int], count: int = 20000) -> float:
    """Signed L-infinity distance to ``|lambda| = 1``; positive outside.

    Two grid axes only; the boundary is sampled at ``count`` points.
    """
    if len(axes) != 2:
        raise ValueError("ellipse distance is implemented for two axes")
    pts = _ellipse_points(c, p, axes, 1.0, count)
    x = np.array([p[k] for k in axes])
    d = float(np.min(np.max(np.abs(pts - x), axis=1))) if len(pts) else np.inf
    return d if _lam_y(c, p) >= 1.0 else -d


def boundary_curves(c: dict, axes: list[int], fixed_p: dict | None = None, count: int = 200):
    """Curves for plotting: hyperplanes, the ``lambda = 1`` ellipse and the
    ``lambda = nu`` collision ellipse, each as an array of ``(p_a, p_b)``."""
    if len(axes) != 2:
        raise ValueError("boundary curves are drawn for two axes")
    fixed_p = dict(fixed_p or {})
    a, b = axes
    alpha = sum((k - 1) * v for k, v in c.items())
    w = _affine_beta(c, axes)
    base = dict(fixed_p)
    base.update({a: 0.0, b: 0.0})
    b0 = beta_parameterized(c, base)
    out = {}
    pa = np.linspace(0.0, 1.0, count)
    for name, t in (("hyperplane_plus", np.sqrt(alpha)), ("hyperplane_minus", -np.sqrt(alpha))):
        if w[1] != 0:
            out[name] = np.column_stack([pa, (t - b0 - w[0] * pa) / w[1]])
    out["ellipse"] = _ellipse_points(c, base, axes, 1.0, count)
    # lambda = nu: sum alpha_k (y_k - 1/2)^2 = sum alpha_k / 4
    th = np.linspace(0.0, 2 * np.pi, count, endpoint=False)
    cols = []
    for k, trig in ((a, np.cos(th)), (b, np.sin(th))):
        al, r = (k - 1) * c[k], r_k(k)
        y = 0.5 + np.sqrt(alpha / (4 * al)) * trig
        cols.append((y + 1 - 2 * r) / (2 - 2 * r))
    if all(k in axes for k in c):
        out["collision"] = np.column_stack(cols)
    return out


def boundary_to_csv(curves: dict, axes: list[int]) -> str:
    a, b = axes
    lines = [f"curve,index,p_{a},p_{b}"]
    for name, pts in curves.items():
        lines += [f"{name},{i},{x!r},{y!r}" for i, (x, y) in enumerate(pts.tolist())]
    return "\n".join(lines) + "\n"
