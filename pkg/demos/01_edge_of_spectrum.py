"""Where the largest eigenvalue of a Gaussian Laplacian sits.

Run with ``python3 demos/01_edge_of_spectrum.py``. Takes a few seconds.
"""
# %%
import math

import numpy as np

from lapspec import constants, predict_location, sample_goe, laplacian_of, sample_surrogate
from lapspec.eigensolve import top_k_eigenvalues

n = 800
c = constants(n)
print(f"n = {n}: a_n = {c.a_n:.4f}, eigen centering b_n = {c.b_n:.4f}, iid centering b_n' = {c.b_n_prime:.4f}")

# %%
# The Laplacian of a GOE matrix and the surrogate diag(D) - A with an
# independent Gaussian diagonal have the same top of the spectrum.
lap = laplacian_of(sample_goe(n, 1))
D, A, L = sample_surrogate(n, 2)
print("Laplacian top 3:", np.round(top_k_eigenvalues(lap, 3, "lapack").values, 4))
print("surrogate top 3:", np.round(top_k_eigenvalues(L, 3, "lapack").values, 4))

# %%
# Each large diagonal entry pushes out one eigenvalue. Its position is the
# root E of X - E - Re m(E + i eta) = 0 with X the diagonal entry.
eta = n ** -0.25
d_sorted = np.sort(D.values)[::-1]
lam = top_k_eigenvalues(L, 3, "lapack").values
for j in range(3):
    E = predict_location(d_sorted[j], eta)
    print(f"D_({j + 1}) = {d_sorted[j]:.4f}  predicted {E:.4f}  actual {lam[j]:.4f}  "
          f"|error| = {abs(E - lam[j]):.4f} (eta = {eta:.4f})")

# %%
# The outward push is close to 1/D_(1), which is why the eigenvalue
# centering exceeds the iid one by about 1/a_n.
print(f"E_(1) - D_(1) = {predict_location(d_sorted[0], eta) - d_sorted[0]:.4f}, "
      f"1/D_(1) = {1 / d_sorted[0]:.4f}, 1/a_n = {1 / c.a_n:.4f}, "
      f"b_n - b_n' = {c.b_n - c.b_n_prime:.4f}")
print(f"sqrt(2 log n) = {math.sqrt(2 * math.log(n)):.4f}")
