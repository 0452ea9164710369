"""Shrinking frequency bumps and the approximate identity they generate.

psi_m(xi) = m^n psi(m xi) with psi(xi) = exp(-1 / (1 - |xi|^2)) on the unit
ball, sampled on the frequency lattice and renormalized to unit discrete mass.
The functions e_m = (2 pi)^{n/2} F^{-1}(psi_m) satisfy L_{e_m} -> identity.
"""
from dataclasses import dataclass

import numpy as np

from .algebra import identity
from .deform import LeftMult, _skew, generator_direction
from .fourier import inverse_array
from .grid import FREQUENCY, POSITION, GridFunction, TorusGrid, norm_E, norm_L2


def bump(r2):
    """exp(-1 / (1 - r^2)) inside the unit ball and exactly 0 outside."""
    r2 = np.asarray(r2, dtype=float)
    out = np.zeros_like(r2)
    inside = r2 < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return out


@dataclass(frozen=True)
class MollifierFamily:
    grid: TorusGrid
    profile: object = bump

    def modes_per_axis(self, m):
        """Lattice points on one frequency axis strictly inside B(0, 1/m)."""
        return int(np.sum(np.abs(self.grid.xi) < 1.0 / m))

    def admissible(self, m):
        return m >= 1 and self.modes_per_axis(m) >= 3

    def admissible_ms(self, m_list):
        return [m for m in m_list if self.admissible(m)]

    def max_m(self):
        """Largest integer m with at least 3 resolved modes per axis."""
        m = int(np.floor(1.0 / self.grid.dxi))
        while m >= 1 and not self.admissible(m):
            m -= 1
        return m

    def psi_m(self, m):
        """psi_m on the frequency lattice as a scalar frequency-space function."""
        if not self.admissible(m):
            raise ValueError(
                f"m = {m} leaves fewer than 3 frequency modes per axis inside B(0, 1/m) "
                f"(need m < {1.0 / self.grid.dxi:g})"
            )
        g = self.grid
        xi = g.frequencies()
        vals = m ** g.n * self.profile(np.sum((m * xi) ** 2, axis=-1))
        vals = vals / (g.cell(FREQUENCY) * vals.sum())
        return GridFunction(g, vals, FREQUENCY)


# Largest m * dxi used by default sweeps.  Closer to 1 the sampled bump keeps
# only its centre value (its neighbours fall below exp(-20)) and e_m collapses
# to the constant 1, which says nothing about the approximation.
RESOLVED_RADIUS = 0.8


def resolved_max_m(family):
    """Largest admissible m whose nearest off-centre lattice modes keep real weight."""
    m = int(np.floor(RESOLVED_RADIUS / family.grid.dxi))
    return m if family.admissible(m) else family.max_m()


def default_m_sweep(family, start=1, num=8):
    """Roughly geometric admissible sweep ending at :func:`resolved_max_m`."""
    top = resolved_max_m(family)
    if top < start:
        return []
    ms = np.unique(np.round(np.geomspace(start, top, num=num)).astype(int))
    return [int(m) for m in ms if family.admissible(m)]


def e_m_spectrum(family, m, k=1):
    """F(e_m 1_C) = (2 pi)^{n/2} psi_m 1_C, exactly zero off the bump."""
    g = family.grid
    hat = (2 * np.pi) ** (g.n / 2) * family.psi_m(m).values[..., 0, 0]
    return hat[..., None, None] * identity(k)


def make_e_m(family, m, k=1):
    """e_m 1_C with F(e_m) = (2 pi)^{n/2} psi_m."""
    return GridFunction(family.grid, inverse_array(e_m_spectrum(family, m, k), family.grid))


def mollifier_operator(family, m, J=None, k=1):
    """L_{e_m} with the exact bump spectrum (no FFT round-off in the sparse loop)."""
    return LeftMult(make_e_m(family, m, k), J, spectrum=e_m_spectrum(family, m, k))


def _check_list(family, m_list):
    bad = [m for m in m_list if not family.admissible(m)]
    if bad:
        raise ValueError(f"inadmissible m for this grid: {bad}")


def approx_identity_test(g, family, m_list, J=None):
    """Rows (m, residual, N) with residual = ||L_{e_m} g - g||_2."""
    _check_list(family, m_list)
    rows = []
    for m in m_list:
        res = norm_E(mollifier_operator(family, m, J, g.k).apply(g) - g)
        rows.append({"m": int(m), "residual": res, "N": family.grid.N})
    return rows


def polynomial_multiplier(D0, grid, J):
    """Spectral multiplier sum_beta c_beta prod_i (i <v_i, xi>)^{beta_i}.

    ``D0`` lists ``(coefficient, beta)`` with beta a 2n-tuple of exponents of
    the generators d_1 .. d_2n.  Applying it to F(e) yields the transform of
    sum_beta c_beta d_v^beta e, the symbol of D0 applied to L_e.
    """
    J = _skew(J, grid)
    n = grid.n
    xi = grid.frequencies()
    dirs = [generator_direction(i + 1, J) for i in range(2 * n)]
    lin = [1j * (xi @ v) for v in dirs]
    total = np.zeros(grid.shape, dtype=np.complex128)
    for c, beta in D0:
        beta = tuple(int(b) for b in beta)
        if len(beta) != 2 * n or min(beta) < 0:
            raise ValueError(f"multi-index {beta} must have {2 * n} nonnegative entries")
        if sum(beta) == 0:
            if c != 0:
                raise ValueError("D0 must not contain an order-zero term")
            continue
        term = np.ones(grid.shape, dtype=np.complex128)
        for b, l in zip(beta, lin):
            if b:
                term = term * l ** b
        total += c * term
    return total


def derivative_operator(D0, family, m, J=None, k=1):
    """D0(L_{e_m}) = L_phi with F(phi) = p F(e_m), built spectrally."""
    p = polynomial_multiplier(D0, family.grid, J)
    hat = e_m_spectrum(family, m, k) * p[..., None, None]
    phi = GridFunction(family.grid, inverse_array(hat, family.grid), POSITION)
    return LeftMult(phi, J, spectrum=hat)


def derivation_decay_test(D0, g, family, m_list, J=None):
    """Rows (m, residual, N) with residual = ||D0(L_{e_m}) g||_{L2}."""
    _check_list(family, m_list)
    rows = []
    for m in m_list:
        res = norm_L2(derivative_operator(D0, family, m, J, g.k).apply(g))
        rows.append({"m": int(m), "residual": res, "N": family.grid.N})
    return rows

