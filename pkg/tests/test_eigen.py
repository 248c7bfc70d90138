import numpy as np
import pytest
import scipy.sparse as sp

from hypernb.eigen import (
    ConvergenceError,
    Spectrum,
    canonicalize,
    leading_eigenpairs,
    select_real_eigenpairs,
    spectrum_to_csv,
)
from hypernb.hsbm import BlockmodelParams, sample_hypergraph, sample_labels
from hypernb.operators import build_Bprime


def random_sparse(seed, n=50, density=0.1):
    return sp.random_array((n, n), density=density, random_state=seed, format="csr")


def test_diagonal():
    S = leading_eigenpairs(sp.diags_array([3.0, 2.0, 1.0]), 2)
    assert np.allclose(S.values, [3, 2])
    assert np.all(S.residuals <= 1e-8)
    assert S.bulk_radius == pytest.approx(np.sqrt(3))


def test_argument_checks():
    M = sp.diags_array([3.0, 2.0, 1.0])
    with pytest.raises(ValueError):
        leading_eigenpairs(M, 3)
    with pytest.raises(ValueError):
        leading_eigenpairs(M, 0)
    with pytest.raises(ValueError):
        leading_eigenpairs(sp.csr_array((3, 4)), 1)


@pytest.mark.parametrize("seed", range(10))
def test_iterative_matches_dense(seed):
    M = random_sparse(seed)
    it = leading_eigenpairs(M, 4, dense_limit=0, ncv=20)
    de = leading_eigenpairs(M, 4)
    w = np.linalg.eigvals(M.toarray())
    w = w[np.argsort(-np.abs(w))]
    assert np.allclose(np.sort_complex(it.values[:4]), np.sort_complex(de.values[:4]), atol=1e-6)
    assert np.allclose(np.abs(de.values[:4]), np.abs(w[:4]))
    for j in range(min(len(it), len(de))):
        if abs(it.values[j] - de.values[j]) < 1e-8 and abs(abs(de.values[j]) - abs(de.values[min(j + 1, len(de) - 1)])) > 1e-3:
            assert abs(abs(np.vdot(it.vectors[:, j], de.vectors[:, j])) - 1) <= 1e-4


def test_residuals_and_conjugate_closure():
    for seed in range(5):
        M = random_sparse(100 + seed, n=300, density=0.02)
        for limit in (0, 600):
            S = leading_eigenpairs(M, 6, dense_limit=limit)
            A = M.toarray()
            for lam, v, r in S.pairs:
                assert np.linalg.norm(A @ v - lam * v) <= 1e-8
                assert r <= 1e-8
                if abs(lam.imag) > 1e-6:
                    j = np.argmin(np.abs(S.values - np.conj(lam)))
                    assert abs(S.values[j] - np.conj(lam)) <= 1e-8
                    assert np.allclose(S.vectors[:, j], np.conj(v))


def test_canonical_phase():
    S = leading_eigenpairs(random_sparse(3), 4, dense_limit=0)
    for v in S.vectors.T:
        assert np.linalg.norm(v) == pytest.approx(1.0)
        j = np.argmax(np.abs(v) >= np.abs(v).max() * (1 - 1e-12))
        assert v[j].imag == pytest.approx(0.0, abs=1e-14) and v[j].real > 0
    u = canonicalize(np.array([0, -2.0, 1j]))
    assert np.allclose(u, [0, 2 / np.sqrt(5), -1j / np.sqrt(5)])


def test_deterministic():
    M = random_sparse(21, n=400, density=0.02)
    a = leading_eigenpairs(M, 5, dense_limit=0, seed=4)
    b = leading_eigenpairs(M, 5, dense_limit=0, seed=4)
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.vectors, b.vectors)


def test_non_convergence_reports_residuals():
    M = random_sparse(1, n=400, density=0.02)
    with pytest.raises(ConvergenceError) as err:
        leading_eigenpairs(M, 10, dense_limit=0, max_iter=1, ncv=22, tol=1e-14)
    assert err.value.residuals is not None


def test_leading_eigenvalue_of_blockmodel():
    lams = []
    for seed in range(20):
        P = BlockmodelParams(n=200, ell=2, c={2: 5, 3: 5}, p={2: 0.7, 3: 0.7}, seed=seed)
        H = sample_hypergraph(P, sample_labels(200, P.q, 2, seed))
        lams.append(leading_eigenpairs(build_Bprime(H), 1).values[0].real)
    assert abs(np.median(lams) - 15) <= 1.5


def test_select_real():
    vals = np.array([5.0, 2 + 1j, 2 - 1j, -1.5, 0.5], dtype=complex)
    vecs = np.eye(5, dtype=complex)
    S = Spectrum(vals, vecs, np.zeros(5))
    sel = select_real_eigenpairs(S, 10)
    assert np.allclose(sel.values, [5.0, -1.5])
    assert sel.vectors.dtype == float
    assert np.allclose(select_real_eigenpairs(S, 10, magnitude_floor=0).values, [5, -1.5, 0.5])
    assert np.allclose(select_real_eigenpairs(S, 1, magnitude_floor=0).values, [5])
    assert np.allclose(select_real_eigenpairs(S, 10, magnitude_floor="bulk").values, [5])
    pair = Spectrum(vals[1:3], vecs[:, 1:3], np.zeros(2))
    assert len(select_real_eigenpairs(pair, 2, magnitude_floor=0)) == 0


def test_csv(tmp_path):
    S = leading_eigenpairs(sp.diags_array([4.0, -2.0, 1.0]), 2)
    text = spectrum_to_csv(S, tmp_path / "s.csv", bulk_line=True)
    lines = text.splitlines()
    assert lines[0] == "index,re,im,residual"
    assert lines[1].startswith("0,4.0,0.0,")
    assert lines[-1] == "# bulk_radius,2.0"
    assert (tmp_path / "s.csv").read_text() == text
