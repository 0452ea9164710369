"""Symbols of grid operators, the pairing map, and the commutant test.

Two symbol maps live here.  ``extract_symbol`` reads the Kohn-Nirenberg
symbol a(x, xi) = exp(-i <xi, x>) A(e_xi 1_C)(x) off plane-wave probes and is
exact on the grid.  ``cordes_pairing`` evaluates the structural pairing

    (2 pi)^{n/2} <u 1_C, ((D Ad U(-x, -xi)(A)) o F^{-1}) (x) I) v 1_C>

with D = prod_j (1 + d_j)^2 (1 + d_{n+j})^2 and configurable probes u, v.
"""
from dataclasses import dataclass, field
from itertools import product
import json

import numpy as np

from .algebra import cstar_norm, identity
from .deform import (
    Composition,
    GridOperator,
    Heisenberg,
    LeftMult,
    LinearCombination,
    RightMult,
    _lattice_steps,
    _skew,
    generator_direction,
    power_norm,
)
from .fourier import forward_array, inverse_array
from .grid import FREQUENCY, POSITION, GridFunction, inner_product_E, norm_E
from .mollifier import mollifier_operator


class PhaseSpaceFunction:
    """Matrix values a(x, xi) for every grid point x and a list of lattice modes.

    ``values`` has shape ``grid.shape + (len(modes), k, k)``; ``modes`` holds
    integer mode vectors (xi = 2 pi j / L).
    """

    def __init__(self, grid, modes, values):
        modes = np.asarray(modes, dtype=int).reshape(-1, grid.n)
        values = np.asarray(values, dtype=np.complex128)
        if values.shape[: grid.n + 1] != grid.shape + (len(modes),) or values.ndim != grid.n + 3:
            raise ValueError("phase-space values do not match grid and mode list")
        values.setflags(write=False)
        self.grid, self.modes, self.values = grid, modes, values

    @property
    def k(self):
        return self.values.shape[-1]

    @property
    def is_full(self):
        return len(self.modes) == self.grid.size

    def column(self, mode):
        """The x-slice at lattice mode ``mode`` as a position-space function."""
        hit = np.flatnonzero((self.modes == np.asarray(mode, dtype=int)).all(axis=1))
        if not len(hit):
            raise KeyError(f"mode {tuple(mode)} not present")
        return GridFunction(self.grid, self.values[..., hit[0], :, :], POSITION)

    def at(self, x_index, mode):
        return self.column(mode).values[tuple(x_index)]


def all_modes(grid):
    return grid.mode_indices().reshape(-1, grid.n)


def plane_wave(grid, mode, k=1):
    xi = np.asarray(mode, dtype=float) * grid.dxi
    vals = np.exp(1j * grid.points() @ xi)
    return GridFunction(grid, vals[..., None, None] * identity(k), POSITION)


def extract_symbol(A, modes=None):
    """a(x, xi) = exp(-i <xi, x>) A(e_xi 1_C)(x), for all or selected modes."""
    grid = A.grid
    modes = all_modes(grid) if modes is None else np.asarray(modes, dtype=int).reshape(-1, grid.n)
    cols = []
    for j in modes:
        w = plane_wave(grid, j, A.k)
        out = A.apply(w).values
        cols.append(np.conj(w.values[..., :1, :1]) * out)
    return PhaseSpaceFunction(grid, modes, np.stack(cols, axis=grid.n))


def restrict(a):
    """The xi = 0 slice a(x, 0)."""
    return a.column(np.zeros(a.grid.n, dtype=int))


class SymbolOperator(GridOperator):
    """Op(a) g(x) = (2 pi)^{-n/2} dxi^n sum_xi a(x, xi) exp(i <xi, x>) F(g)(xi)."""

    kind = "Symbol"

    def __init__(self, a):
        if not a.is_full:
            raise ValueError("Op(a) needs the symbol on every lattice mode")
        super().__init__(a.grid, a.k)
        self.a = a
        g = a.grid
        flat = g.mode_indices().reshape(-1, g.n)
        # position of each lattice mode in the symbol's column order
        lookup = {tuple(m): i for i, m in enumerate(a.modes)}
        self._order = np.array([lookup[tuple(m)] for m in flat])

    def _apply(self, f):
        g = self.grid
        hat = forward_array(f.values, g).reshape((g.size, self.k, self.k))[np.argsort(self._order)]
        xi = self.a.modes * g.dxi
        wave = np.exp(1j * g.points() @ xi.T)
        scale = (2 * np.pi) ** (-g.n / 2) * g.cell(FREQUENCY)
        out = np.einsum("...qij,...q,qjl->...il", self.a.values, wave, hat)
        return GridFunction(g, scale * out, POSITION)

    def adjoint(self):
        raise NotImplementedError("materialize with to_dense for adjoints of Op(a)")


def op_from_symbol(a):
    return SymbolOperator(a)


# ---------------------------------------------------------------------------
# the pairing map

FIRST = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
SECOND = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
OFFSETS = np.arange(-2, 3)


def square_factor_weights(step):
    """Stencil of (1 + d)^2 on offsets -2..2, fourth-order accurate in ``step``."""
    w = 2 * FIRST / step + SECOND / step ** 2
    w[2] += 1.0
    return w


@dataclass(frozen=True)
class ProductProbe:
    """u(x, y) = first(x) second(y); ``first`` of v lives on the frequency lattice."""

    first: GridFunction
    second: GridFunction

    def norm(self):
        return _scalar_l2(self.first) * _scalar_l2(self.second)


def _scalar_l2(f):
    return float(np.sqrt(f.grid.cell(f.space) * np.sum(np.abs(f.values[..., 0, 0]) ** 2)))


def _gaussian(grid, width, space):
    pts = grid.points() if space == POSITION else grid.frequencies()
    vals = np.exp(-np.sum(pts ** 2, axis=-1) / (2 * width ** 2))
    f = GridFunction(grid, vals, space)
    return f / _scalar_l2(f)


def default_probes(grid):
    """Normalized Gaussians with position width sqrt(L / 2 pi) (frequency width its inverse)."""
    s = np.sqrt(grid.L / (2 * np.pi))
    u = ProductProbe(_gaussian(grid, s, POSITION), _gaussian(grid, s, POSITION))
    v = ProductProbe(_gaussian(grid, 1 / s, FREQUENCY), _gaussian(grid, s, POSITION))
    return u, v


def _spectral_D(A):
    """D(L_phi) = L_{D_v phi}: multiply F(phi) by prod_i (1 + i <v_i, xi>)^2."""
    g = A.grid
    xi = g.frequencies()
    mult = np.ones(g.shape, dtype=np.complex128)
    for i in range(1, 2 * g.n + 1):
        mult = mult * (1 + 1j * (xi @ generator_direction(i, A.J))) ** 2
    hat = A.spectrum * mult[..., None, None]
    return LeftMult(GridFunction(g, inverse_array(hat, g), POSITION), A.J, spectrum=hat)


def pairing_operator(A, x, xi, exact=True):
    """D(Ad U(-x, -xi)(A)) as an explicit operator.

    For left multiplications the derivations act exactly on the symbol;
    otherwise D is the tensor stencil of Ad U over lattice offsets -2..2 in
    each of the 2n directions.
    """
    g = A.grid
    n = g.n
    x = np.asarray(x, dtype=float).reshape(n)
    xi = np.asarray(xi, dtype=float).reshape(n)
    _lattice_steps(x, g.h, "position")
    _lattice_steps(xi, g.dxi, "frequency")
    if exact and isinstance(A, LeftMult):
        # Ad U(-x, -xi)(L_f) = L_{f(. + x - J xi / 2 pi)}, exact as a phase
        shift = x - A.J(xi) / (2 * np.pi)
        hat = A.spectrum * np.exp(1j * g.frequencies() @ shift)[..., None, None]
        moved = LeftMult(GridFunction(g, inverse_array(hat, g), POSITION), A.J, spectrum=hat)
        return _spectral_D(moved)
    wt = square_factor_weights(g.h)
    wm = square_factor_weights(g.dxi)
    terms = []
    for offs in product(range(5), repeat=2 * n):
        c = np.prod([wt[o] for o in offs[:n]]) * np.prod([wm[o] for o in offs[n:]])
        a = -(x + OFFSETS[list(offs[:n])] * g.h)
        b = -(xi + OFFSETS[list(offs[n:])] * g.dxi)
        U = Heisenberg(g, A.k, a, b)
        terms.append((c, Composition([U, A, U.inverse()])))
    return LinearCombination(terms)


def _apply_to_frequency_probe(B, v1, k):
    """B(F^{-1}(v1) 1_C) for a scalar frequency-space probe."""
    g = B.grid
    pos = inverse_array(v1.values[..., 0, 0][..., None, None] * identity(k), g)
    return B.apply(GridFunction(g, pos, POSITION))


def cordes_pairing(A, x, xi, u=None, v=None, exact=True):
    """S(A)(x, xi) as a k x k matrix.

    ``u`` and ``v`` are :class:`ProductProbe` pairs or full arrays of shape
    ``grid.shape * 2`` (first n axes are the variables the operator acts on;
    for ``v`` those are frequency variables).
    """
    g = A.grid
    if u is None or v is None:
        du, dv = default_probes(g)
        u = du if u is None else u
        v = dv if v is None else v
    B = pairing_operator(A, x, xi, exact)
    scale = (2 * np.pi) ** (g.n / 2)
    if isinstance(u, ProductProbe) and isinstance(v, ProductProbe):
        tail = g.cell(POSITION) * np.sum(np.conj(u.second.values[..., 0, 0]) * v.second.values[..., 0, 0])
        Tv = _apply_to_frequency_probe(B, v.first, A.k)
        u1 = GridFunction.scalar(g, u.first.values[..., 0, 0], A.k)
        return scale * tail * inner_product_E(u1, Tv)
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    if u.shape != g.shape * 2 or v.shape != g.shape * 2:
        raise ValueError("full probes must have shape grid.shape * 2")
    total = np.zeros((A.k, A.k), dtype=np.complex128)
    for y in np.ndindex(*g.shape):
        col = (Ellipsis,) + y
        Tv = _apply_to_frequency_probe(B, GridFunction(g, v[col], FREQUENCY), A.k)
        u1 = GridFunction.scalar(g, u[col], A.k)
        total += g.cell(POSITION) * inner_product_E(u1, Tv)
    return scale * total


def pairing_operator_norm(A, x, xi, exact=True):
    """Largest singular value of v -> D(Ad U(-x,-xi) A)(F^{-1}(v) 1_C), L2 to L2."""
    g = A.grid
    B = pairing_operator(A, x, xi, exact)
    cols = []
    for j in range(g.size):
        e = np.zeros(g.size, dtype=np.complex128)
        e[j] = 1.0
        Tv = _apply_to_frequency_probe(B, GridFunction(g, e.reshape(g.shape), FREQUENCY), A.k)
        cols.append(Tv.values.reshape(-1))
    M = np.stack(cols, axis=1) * np.sqrt(g.cell(POSITION) / g.cell(FREQUENCY))
    return float(np.linalg.norm(M, 2))


def pairing_bound(A, x, xi, u=None, v=None, exact=True):
    """(2 pi)^{n/2} ||u|| ||v|| times the operator norm of the braced operator."""
    g = A.grid
    if u is None or v is None:
        du, dv = default_probes(g)
        u = du if u is None else u
        v = dv if v is None else v

    def l2(p, first_space):
        if isinstance(p, ProductProbe):
            return p.norm()
        w = g.cell(first_space) * g.cell(POSITION)
        return float(np.sqrt(w * np.sum(np.abs(p) ** 2)))

    op = pairing_operator_norm(A, x, xi, exact)
    return (2 * np.pi) ** (g.n / 2) * l2(u, POSITION) * l2(v, FREQUENCY) * op


# ---------------------------------------------------------------------------
# commutant test and the reconstruction verdict


class ProbeSet:
    """Probe pairs (g, h) for the commutant test, with cached norms of R_g."""

    def __init__(self, pairs, J=None):
        self.pairs = list(pairs)
        if not self.pairs:
            raise ValueError("commutant_residual needs at least one probe pair")
        grid = self.pairs[0][0].grid
        self.J = _skew(J, grid)
        self.right = [RightMult(g, self.J) for g, _ in self.pairs]
        self._scales = None

    @property
    def scales(self):
        if self._scales is None:
            self._scales = [power_norm(R, iters=40, rtol=1e-8) for R in self.right]
        return self._scales

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self):
        return len(self.pairs)


def _probe_set(probes, J):
    if isinstance(probes, ProbeSet):
        grid = probes.pairs[0][0].grid
        if J is not None and not np.array_equal(_skew(J, grid).matrix, probes.J.matrix):
            raise ValueError("probe set was built for a different J")
        return probes
    return ProbeSet(probes, J)


def commutant_residual(A, probes, J=None):
    """max over (g, h) of ||(A R_g - R_g A) h||_2 / (||h||_2 ||R_g||).

    ``||R_g||`` is a power-iteration estimate, cached on a :class:`ProbeSet`.
    """
    probes = _probe_set(probes, J)
    worst = 0.0
    for (g, h), R, scale in zip(probes.pairs, probes.right, probes.scales):
        diff = A.apply(R.apply(h)) - R.apply(A.apply(h))
        worst = max(worst, norm_E(diff) / (norm_E(h) * scale))
    return worst


IS_LEFT_MULT = "IsLeftMult"
NOT_IN_COMMUTANT = "NotInCommutant"
RECONSTRUCTION_MISMATCH = "ReconstructionMismatch"


@dataclass
class Verdict:
    kind: str
    residual: float
    gap: float = float("nan")
    f: GridFunction = None
    params: dict = field(default_factory=dict)

    def to_dict(self):
        out = {"kind": self.kind, "commutant_residual": self.residual}
        if self.kind != NOT_IN_COMMUTANT:
            out["reconstruction_gap"] = self.gap
        out.update(self.params)
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def verify_conjecture(A, J, probes, tol=1e-8):
    """Classify A: outside the commutant, a left multiplication, or a mismatch.

    For a commutant member the candidate symbol is f = A(1_C) (the xi = 0
    column of its symbol) and A is compared with L_f on the probe inputs.
    """
    probes = _probe_set(probes, J)
    J = probes.J
    res = commutant_residual(A, probes)
    params = {"operator": A.kind, "n": A.grid.n, "N": A.grid.N, "k": A.k, "tol": tol}
    if res > tol:
        return Verdict(NOT_IN_COMMUTANT, res, params=params)
    f = restrict(extract_symbol(A, np.zeros((1, A.grid.n), dtype=int)))
    L = LeftMult(f, J)
    gap = 0.0
    for _, h in probes:
        gap = max(gap, norm_E(A.apply(h) - L.apply(h)) / norm_E(h))
    kind = IS_LEFT_MULT if gap <= tol else RECONSTRUCTION_MISMATCH
    return Verdict(kind, res, gap, f, params)


def symbol_convergence_test(A, family, samples, m_list, J=None, pairing=False):
    """Rows (m, max residual) comparing the symbol of A o L_{e_m} with that of A.

    ``samples`` lists (x_index, mode) pairs.  With ``pairing=True`` each row
    also reports the same difference for :func:`cordes_pairing` (not gated).
    """
    J = _skew(J, A.grid)
    grid = A.grid
    modes = np.unique(np.array([s[1] for s in samples], dtype=int).reshape(-1, grid.n), axis=0)
    ref = extract_symbol(A, modes)
    if pairing:
        pts = grid.points()
        pref = [cordes_pairing(A, pts[tuple(xi_)], np.asarray(m_) * grid.dxi) for xi_, m_ in samples]
    rows = []
    for m in m_list:
        B = Composition([A, mollifier_operator(family, m, J, A.k)])
        sym = extract_symbol(B, modes)
        res = max(
            float(cstar_norm(sym.at(xi_, m_) - ref.at(xi_, m_))) for xi_, m_ in samples
        )
        row = {"m": int(m), "residual": res, "N": grid.N}
        if pairing:
            row["pairing_residual"] = max(
                float(cstar_norm(cordes_pairing(B, pts[tuple(xi_)], np.asarray(m_) * grid.dxi) - p))
                for (xi_, m_), p in zip(samples, pref)
            )
        rows.append(row)
    return rows
