"""The bulk law: semicircle free-convolved with a standard Gaussian.

Builds the density grid, checks it against a Stieltjes inversion and a
sampled histogram, and writes the CSV used by external plotters.
Run with ``python3 demos/03_bulk_density.py [out.csv]``.
"""
# %%
import sys

import numpy as np

from lapspec.eigensolve import eigenvalues
from lapspec.freeconv import density_grid, solve_m
from lapspec.rand_models import sample_surrogate

grid = density_grid(-8, 8, 2001)
print(f"mass = {grid.mass():.8f}, p(0) = {grid(0.0):.6f}")

# %%
xs = np.linspace(-4, 4, 9)
inversion = solve_m(xs + 1e-3j).imag / np.pi
for x, p, q in zip(xs, grid(xs), inversion):
    print(f"x = {x:+.1f}  p = {p:.5f}  Im m(x + 0.001i)/pi = {q:.5f}")

# %%
n = 1500
_, _, L = sample_surrogate(n, 5)
lam = eigenvalues(L, backend="lapack").values
edges = np.arange(-3, 3.0001, 0.25)
hist, _ = np.histogram(lam, edges)
mid = 0.5 * (edges[1:] + edges[:-1])
print("histogram vs density at bin centres:")
for m_, h in zip(mid, hist / (n * 0.25)):
    print(f"  {m_:+.3f}  {h:.4f}  {grid(m_):.4f}")

# %%
if len(sys.argv) > 1:
    print("wrote", grid.write_csv(sys.argv[1]))
