"""L_{e_m} acting as an approximate identity as the mollifier index grows.

Run: python3 demos/mollifier_convergence.py
"""
import numpy as np

from deformquant import MollifierFamily, SkewForm, TorusGrid, approx_identity_test, norm_E
from deformquant.experiments import gaussian
from deformquant.mollifier import default_m_sweep, resolved_max_m

grid = TorusGrid(1, 512, 128 * np.pi)
fam = MollifierFamily(grid)
g = gaussian(grid, 3.0, k=2)
ms = default_m_sweep(fam)
print(f"grid N={grid.N} L={grid.L:.1f}, resolved m up to {resolved_max_m(fam)}")
print("     m   ||L_{e_m} g - g|| / ||g||")
for row in approx_identity_test(g, fam, ms, SkewForm.zero(1)):
    print(f"{row['m']:6d}   {row['residual'] / norm_E(g):.3e}")
