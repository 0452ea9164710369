"""Classify operators as left multiplications or commutant outsiders.

Run: python3 demos/conjecture_verdicts.py
"""
import numpy as np

from deformquant import SkewForm, TorusGrid, op_L, verify_conjecture
from deformquant.experiments import modulation_ensemble, probe_set, rank_one_ensemble, random_band_limited, translation_ensemble

grid = TorusGrid(2, 32, 8 * np.pi)
J = SkewForm.from_theta(2, 2.0)
rng = np.random.default_rng(0)
probes = probe_set(grid, 2, J, rng)

ops = [("left_mult", op_L(random_band_limited(grid, 2, rng), J))]
ops += translation_ensemble(grid, 2)[:1] + modulation_ensemble(grid, 2)[:1]
ops += rank_one_ensemble(grid, 2, rng, count=1)
for name, A in ops:
    v = verify_conjecture(A, J, probes)
    print(f"{name:16s} {v.kind:16s} commutant residual {v.residual:.2e}")
