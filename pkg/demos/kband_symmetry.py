"""
Symmetric k-band weights
========================

phi is constant exactly when w^2 is symmetric about 1/2.  Four thin
bands placed symmetrically pass; removing any one of them breaks it.
"""

# %%
import numpy as np

from bandlaw.limitlaw import QuadGrid, phi, is_semicircle, limit_moments
from bandlaw.structure import WeightFunction

bands = [(0.1, 0.2), (0.3, 0.4), (0.6, 0.7), (0.8, 0.9)]
grid = QuadGrid(2048)
xs = np.linspace(0, 1, 5)

w = WeightFunction.indicator_union(bands)
print("all four bands: phi =", np.round(phi(w, xs), 4), is_semicircle(w, grid))

# %%
for i in range(4):
    wi = WeightFunction.indicator_union(bands[:i] + bands[i + 1:])
    v = is_semicircle(wi, grid)
    print(f"drop band {i + 1}: verdict={v.verdict}  phi range={v.phi_range:.3f}  "
          f"m4/phi0^2={limit_moments(wi, 4, grid).normalized(4):.4f}")
