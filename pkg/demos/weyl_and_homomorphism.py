"""Deformed products of plane waves and the map f -> L_f.

Run: python3 demos/weyl_and_homomorphism.py
"""
import numpy as np

from deformquant import GridFunction, SkewForm, TorusGrid, deformed_product, op_L
from deformquant.experiments import random_band_limited

grid = TorusGrid(2, 32, 8 * np.pi)
J = SkewForm.from_theta(2, 2.0)
x = grid.points()


def wave(mode):
    return GridFunction.scalar(grid, np.exp(1j * x @ (grid.dxi * np.asarray(mode))))


# two lattice plane waves multiply up to a constant phase
a, b = np.array([1, 3]), np.array([-2, 1])
prod = deformed_product(wave(a), wave(b), J)
ratio = prod.values[..., 0, 0] / wave(a + b).values[..., 0, 0]
want = np.exp(1j * (grid.dxi * b) @ J.matrix @ (grid.dxi * a) / (2 * np.pi))
print(f"phase of e_a x_J e_b / e_(a+b): {ratio.mean():.6f}  closed form: {want:.6f}")
print(f"spread of the ratio over the grid: {np.ptp(np.abs(ratio - want)):.1e}")

# the deformed product is non-commutative, and L turns it into composition
rng = np.random.default_rng(0)
f, g, h = (random_band_limited(grid, 2, rng, band=3) for _ in range(3))
fg, gf = deformed_product(f, g, J), deformed_product(g, f, J)
print(f"||f x g - g x f|| / ||f x g|| = {np.linalg.norm(fg.values - gf.values) / np.linalg.norm(fg.values):.3f}")
lhs = op_L(fg, J).apply(h).values
rhs = op_L(f, J).apply(op_L(g, J).apply(h)).values
print(f"L_(f x g) h vs L_f L_g h: {np.max(np.abs(lhs - rhs)):.1e}")
