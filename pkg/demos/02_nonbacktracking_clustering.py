"""Nonbacktracking clustering on either side of the detectability threshold.

The community eigenvalue beta is affine in the within-group fractions p_k.
Clustering succeeds once beta**2 exceeds alpha and fails below that line,
so we sweep p (the same for both edge sizes) across it.  At p = 1 the
hypergraph falls apart into one component per group and the two leading
eigenvalues coincide, which is a different story, so the sweep stops short.
"""

import numpy as np

from hypernb import BlockmodelParams, nbhsc, sample_hypergraph, sample_labels, theory_report

c = {2: 5.0, 3: 5.0}
for p in (0.5, 0.6, 0.7, 0.8, 0.9, 0.95):
    aris = []
    for seed in range(5):
        params = BlockmodelParams(n=300, ell=2, c=c, p={2: p, 3: p}, seed=seed)
        z = sample_labels(params.n, params.q, 2, seed)
        H = sample_hypergraph(params, z)
        aris.append(nbhsc(H, 2, 2, seed=seed, reference=z).ari)
    T = theory_report(params)
    print(f"p = {p:.2f}  beta^2 / alpha = {T.beta ** 2 / T.alpha:5.2f}  mean ARI = {np.mean(aris):.3f}")
