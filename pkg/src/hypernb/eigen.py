"""Leading eigenpairs of sparse nonsymmetric real operators.

Small operators (dimension <= ``dense_limit``) go through LAPACK's dense
Hessenberg-QR (``numpy.linalg.eig``). Larger ones use a Krylov-Schur
restarted Arnoldi iteration kept in real arithmetic: the projected
Hessenberg matrix is brought to real Schur form, the wanted (largest
modulus) part is moved to the top-left and kept, the rest is discarded.
Complex Ritz pairs come out of the 2x2 blocks of the kept Schur factor.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .operators import DENSE_LIMIT

log = logging.getLogger(__name__)

__all__ = [
    "Spectrum",
    "ConvergenceError",
    "leading_eigenpairs",
    "select_real_eigenpairs",
    "canonicalize",
    "spectrum_to_csv",
]


class ConvergenceError(RuntimeError):
    """The iterative solver ran out of restarts.

    ``residuals`` holds the best residuals reached for the wanted pairs.
    """

    def __init__(self, msg, residuals=None):
        super().__init__(msg)
        self.residuals = residuals


@dataclass(frozen=True)
class Spectrum:
    """Eigenpairs sorted by descending modulus.

    ``vectors[:, j]`` belongs to ``values[j]``; ``residuals[j]`` is
    ``||M v - lambda v|| / ||v||``.
    """

    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray

    @property
    def bulk_radius(self) -> float:
        return float(np.sqrt(abs(self.values[0]))) if len(self.values) else 0.0

    @property
    def pairs(self):
        return list(zip(self.values, self.vectors.T, self.residuals))

    def __len__(self):
        return len(self.values)

    def subset(self, idx) -> "Spectrum":
        idx = np.asarray(idx, dtype=int)
        return Spectrum(self.values[idx], self.vectors[:, idx], self.residuals[idx])


def canonicalize(v: np.ndarray) -> np.ndarray:
    """Unit 2-norm, first largest-magnitude entry rotated onto the positive reals."""
    v = np.asarray(v, dtype=complex)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        return v
    v = v / nrm
    mags = np.abs(v)
    j = int(np.argmax(mags >= mags.max() * (1 - 1e-12)))
    return v * (abs(v[j]) / v[j])


def _order(values: np.ndarray) -> np.ndarray:
    # descending modulus, then real part, then imaginary part
    return np.lexsort((-values.imag, -values.real, -np.round(np.abs(values), 12)))


def _take_leading(values: np.ndarray, h: int, tol: float) -> np.ndarray:
    """Indices of the ``h`` largest, extended so no conjugate pair is split."""
    order = _order(values)
    cut = min(h, len(order))
    if 0 < cut < len(order):
        last = values[order[cut - 1]]
        nxt = values[order[cut]]
        if abs(last.imag) > tol and abs(nxt - np.conj(last)) <= tol * max(1.0, abs(last)):
            cut += 1
    return order[:cut]


def _finish(M, values, vectors, tol_imag) -> Spectrum:
    """Canonicalize vectors, enforce conjugate symmetry, compute residuals."""
    vals = np.array(values, dtype=complex)
    vecs = np.array(vectors, dtype=complex)
    for j in range(len(vals)):
        vecs[:, j] = canonicalize(vecs[:, j])
    # real eigenvalues: snap to the real axis; conjugate partners share a vector
    done = set()
    for j in range(len(vals)):
        if j in done:
            continue
        lam = vals[j]
        if abs(lam.imag) <= tol_imag * max(1.0, abs(lam)):
            continue
        partner = [
            i for i in range(len(vals))
            if i != j and i not in done and abs(vals[i] - np.conj(lam)) <= 1e3 * tol_imag * max(1.0, abs(lam))
        ]
        if partner:
            i = partner[0]
            pos, neg = (j, i) if lam.imag > 0 else (i, j)
            v = vecs[:, pos]
            vals[neg] = np.conj(vals[pos])
            vecs[:, neg] = np.conj(v)
            done.update((i, j))
    R = M @ vecs - vecs * vals[None, :]
    res = np.linalg.norm(R, axis=0) if vecs.size else np.zeros(len(vals))
    order = _order(vals)
    return Spectrum(vals[order], vecs[:, order], res[order])


def _as_matvec(M):
    if sp.issparse(M):
        M = sp.csr_array(M)
        return M, M.shape[0]
    if isinstance(M, np.ndarray):
        return M, M.shape[0]
    # any object with shape and matmul (e.g. scipy LinearOperator)
    return M, M.shape[0]


def _dense_eig(M, h):
    Md = M.toarray() if sp.issparse(M) else np.asarray(M)
    if not isinstance(Md, np.ndarray) or Md.dtype == object:
        Md = np.column_stack([M @ e for e in np.eye(M.shape[0])])
    w, V = np.linalg.eig(Md)
    idx = _take_leading(w, h, 1e-9)
    return w[idx], V[:, idx]


def _arnoldi(matvec, V, H, start, stop, rng):
    """Extend an Arnoldi factorization from column ``start`` to ``stop``."""
    n = V.shape[0]
    for j in range(start, stop):
        w = matvec(V[:, j])
        # classical Gram-Schmidt with one reorthogonalization pass
        h = V[:, : j + 1].T @ w
        w = w - V[:, : j + 1] @ h
        h2 = V[:, : j + 1].T @ w
        w = w - V[:, : j + 1] @ h2
        h += h2
        H[: j + 1, j] = h
        beta = np.linalg.norm(w)
        if beta <= 1e-12 * max(1.0, np.linalg.norm(h)):
            # invariant subspace: continue with a fresh orthogonal direction
            H[j + 1, j] = 0.0
            for _ in range(3):
                w = rng.standard_normal(n)
                w -= V[:, : j + 1] @ (V[:, : j + 1].T @ w)
                w -= V[:, : j + 1] @ (V[:, : j + 1].T @ w)
                nw = np.linalg.norm(w)
                if nw > 1e-8:
                    break
            V[:, j + 1] = w / nw
        else:
            H[j + 1, j] = beta
            V[:, j + 1] = w / beta


def _krylov_schur(M, n, h, tol, max_iter, ncv, seed):
    matvec = (lambda x: M @ x)
    rng = np.random.default_rng(seed)
    m = ncv
    V = np.zeros((n, m + 1))
    H = np.zeros((m + 1, m))
    v0 = rng.standard_normal(n)
    V[:, 0] = v0 / np.linalg.norm(v0)
    k = 0
    best = None
    for it in range(max_iter):
        _arnoldi(matvec, V, H, k, m, rng)
        Hm = H[:m, :m]
        theta = np.linalg.eigvals(Hm)
        order = _order(theta)
        # keep wanted plus a buffer; never split a 2x2 block at the cut
        p_target = min(max(h + (m - h) // 2, h + 2), m - 2)
        thr = np.abs(theta[order[p_target - 1]])
        T, Z, sdim = sla.schur(
            Hm, output="real", sort=lambda re, im: np.hypot(re, im) >= thr * (1 - 1e-12)
        )
        p = int(sdim)
        if p >= m - 1 or p < 1:
            p = min(max(p, 1), m - 2)
            if p < m and p > 0 and abs(T[p, p - 1]) > 0:
                p -= 1
        b = H[m, m - 1] * Z[m - 1, :]
        # residuals of the h wanted Ritz pairs from the kept block
        Tk = T[:p, :p]
        w, Y = np.linalg.eig(Tk)
        want = _take_leading(w, h, 1e-9)
        res = np.abs(b[:p] @ Y[:, want])
        if best is None or res.max() < best.max():
            best = res
        if np.all(res <= tol * 0.5):
            X = V[:, :m] @ Z[:, :p] @ Y[:, want]
            return w[want], X, it + 1
        V[:, :p] = V[:, :m] @ Z[:, :p]
        V[:, p] = V[:, m]
        H[:] = 0.0
        H[:p, :p] = Tk
        H[p, :p] = b[:p]
        k = p
    raise ConvergenceError(
        f"Krylov-Schur did not converge in {max_iter} restarts (best residual {best.max():.2e})",
        residuals=best,
    )


def leading_eigenpairs(
    M,
    h: int,
    tol: float = 1e-8,
    max_iter: int = 500,
    *,
    seed: int = 0,
    ncv: int | None = None,
    dense_limit: int = DENSE_LIMIT,
    imag_tol: float = 1e-6,
) -> Spectrum:
    """Largest-modulus eigenpairs of a square real operator.

    Returns at least ``h`` pairs (one more when the ``h``-th value has its
    conjugate just past the cut), each with residual ``<= tol``.
    """
    M, n = _as_matvec(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError("operator must be square")
    if not 1 <= h < n:
        raise ValueError(f"need 1 <= h < dim, got h={h}, dim={n}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if n <= dense_limit:
        w, V = _dense_eig(M, h)
    else:
        if ncv is None:
            ncv = max(2 * h + 10, 30)
        ncv = min(ncv, n - 1)
        w, V, iters = _krylov_schur(M, n, h, tol, max_iter, ncv, seed)
        log.debug("Krylov-Schur converged after %d restarts", iters)
    S = _finish(M, w, V, imag_tol)
    bad = S.residuals > tol
    if np.any(bad):
        raise ConvergenceError(
            f"{bad.sum()} eigenpairs above residual tolerance {tol:g}", residuals=S.residuals
        )
    return S


def select_real_eigenpairs(
    S: Spectrum,
    h: int,
    imag_tol: float = 1e-6,
    magnitude_floor: float | str = 1.0,
) -> Spectrum:
    """Real eigenpairs with ``|lambda| >= magnitude_floor``, at most ``h``.

    ``magnitude_floor="bulk"`` uses ``sqrt(|lambda_1|)`` instead of a number.
    Vectors come back real (imaginary residue dropped, renormalized).
    """
    floor = S.bulk_radius if magnitude_floor == "bulk" else float(magnitude_floor)
    vals = S.values
    real = np.abs(vals.imag) <= imag_tol * np.maximum(1.0, np.abs(vals))
    keep = np.flatnonzero(real & (np.abs(vals) >= floor))[:h]
    vecs = S.vectors[:, keep].real.copy()
    nrm = np.linalg.norm(vecs, axis=0)
    nrm[nrm == 0] = 1.0
    return Spectrum(vals[keep].real.astype(complex), vecs / nrm, S.residuals[keep])


def spectrum_to_csv(S: Spectrum, path=None, bulk_line: bool = False) -> str:
    """CSV with columns ``index,re,im,residual``; optional ``# bulk_radius`` line."""
    lines = ["index,re,im,residual"]
    lines += [
        f"{j},{v.real!r},{v.imag!r},{r!r}"
        for j, (v, r) in enumerate(zip(S.values.tolist(), S.residuals.tolist()))
    ]
    if bulk_line:
        lines.append(f"# bulk_radius,{S.bulk_radius!r}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
