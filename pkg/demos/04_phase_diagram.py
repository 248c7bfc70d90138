"""A coarse phase diagram over the within-group fractions (p_2, p_3).

Each cell averages the ARI of several clustering runs; the boundary file
holds the predicted detectability curves for plotting on top.  The full
11 x 11, 20-trial version is the same call with larger numbers and takes a
few minutes per algorithm on one core.
"""

import sys

from hypernb.experiments import SweepSpec, boundary_curves, boundary_to_csv, run_sweep, sweep_to_csv

algo = sys.argv[1] if len(sys.argv) > 1 else "nbhsc"
spec = SweepSpec(n=200, c={2: 5.0, 3: 5.0}, axes={2: (0, 1, 6), 3: (0, 1, 6)}, trials=4, algo=algo, seed=0)
rows = run_sweep(spec)
with open(f"phase_{algo}_heatmap.csv", "w") as f:
    f.write(sweep_to_csv(spec, rows))
with open(f"phase_{algo}_boundary.csv", "w") as f:
    f.write(boundary_to_csv(boundary_curves(spec.c, [2, 3]), [2, 3]))

# print the grid with p_3 increasing upwards
grid = {(round(p[2], 2), round(p[3], 2)): mean for p, mean, _, _ in rows}
ticks = sorted({k[0] for k in grid})
for y in reversed(ticks):
    print(f"p_3={y:.1f} " + " ".join(f"{grid[(x, y)]:5.2f}" for x in ticks))
print("       " + " ".join(f"{x:5.1f}" for x in ticks) + "  (p_2)")
