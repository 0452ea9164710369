"""Torus grids, sampled matrix-valued functions, norms and seminorms.

The real line (or plane) is replaced by the box [-L/2, L/2)^n with periodic
wrap-around and N samples per axis.  Position samples sit at
``x_m = -L/2 + m h`` (``h = L/N``) and the dual lattice is
``xi_j = 2 pi j / L`` with ``j = -N/2 .. N/2-1`` stored in centered order.
"""
from dataclasses import dataclass
from itertools import product
import warnings

import numpy as np

from .algebra import adjoint, as_element, cstar_norm, identity

POSITION = "position"
FREQUENCY = "frequency"


class AliasingWarning(UserWarning):
    """Spectral derivatives of a function with energy near Nyquist."""


@dataclass(frozen=True)
class TorusGrid:
    n: int
    N: int
    L: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension n must be >= 1")
        if self.N < 2 or self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two, got {self.N}")
        if not self.L > 0:
            raise ValueError("box length L must be positive")
        object.__setattr__(self, "L", float(self.L))

    @property
    def h(self):
        return self.L / self.N

    @property
    def dxi(self):
        return 2 * np.pi / self.L

    @property
    def shape(self):
        return (self.N,) * self.n

    @property
    def size(self):
        return self.N ** self.n

    def cell(self, space=POSITION):
        """Quadrature weight of one lattice cell in the given space."""
        step = self.h if space == POSITION else self.dxi
        return step ** self.n

    @property
    def x(self):
        return -self.L / 2 + self.h * np.arange(self.N)

    @property
    def modes(self):
        """Centered integer mode indices j = -N/2 .. N/2-1."""
        return np.arange(-(self.N // 2), self.N // 2)

    @property
    def xi(self):
        return self.dxi * self.modes

    def points(self):
        """Coordinates of every grid point, shape ``grid.shape + (n,)``."""
        return np.stack(np.meshgrid(*([self.x] * self.n), indexing="ij"), axis=-1)

    def frequencies(self):
        """Frequency lattice in centered order, shape ``grid.shape + (n,)``."""
        return np.stack(np.meshgrid(*([self.xi] * self.n), indexing="ij"), axis=-1)

    def mode_indices(self):
        return np.stack(np.meshgrid(*([self.modes] * self.n), indexing="ij"), axis=-1)

    def with_N(self, N, keep_spacing=False):
        """Same grid with N samples; ``keep_spacing`` grows L instead of refining h."""
        L = self.h * N if keep_spacing else self.L
        return TorusGrid(self.n, N, L)


@dataclass(frozen=True)
class SkewForm:
    """Real skew-symmetric n x n matrix J."""

    matrix: np.ndarray

    def __post_init__(self):
        J = np.array(self.matrix, dtype=float)
        if J.ndim != 2 or J.shape[0] != J.shape[1]:
            raise ValueError(f"J must be square, got shape {J.shape}")
        if not np.array_equal(J.T, -J):
            raise ValueError("J is not skew-symmetric")
        J.setflags(write=False)
        object.__setattr__(self, "matrix", J)

    @property
    def n(self):
        return self.matrix.shape[0]

    @classmethod
    def zero(cls, n):
        return cls(np.zeros((n, n)))

    @classmethod
    def from_theta(cls, n, theta):
        """theta times the standard symplectic block diagonal.

        With odd n the last coordinate is left undeformed; for n = 1 the only
        skew form is zero.
        """
        J = np.zeros((n, n))
        for i in range(0, n - 1, 2):
            J[i, i + 1] = theta
            J[i + 1, i] = -theta
        return cls(J)

    def __call__(self, v):
        return np.asarray(v, dtype=float) @ self.matrix.T


class GridFunction:
    """Matrix-valued samples on a torus grid (position or frequency space).

    ``values`` has shape ``grid.shape + (k, k)`` and is stored read-only.
    """

    __slots__ = ("grid", "values", "space")

    def __init__(self, grid, values, space=POSITION):
        if space not in (POSITION, FREQUENCY):
            raise ValueError(f"unknown space tag {space!r}")
        values = np.array(values, dtype=np.complex128)
        if values.shape == grid.shape:
            values = values[..., None, None]
        if values.shape[: grid.n] != grid.shape or values.ndim != grid.n + 2:
            raise ValueError(
                f"values of shape {values.shape} do not fit grid {grid.shape} + (k, k)"
            )
        as_element(values)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "space", space)

    def __setattr__(self, name, value):
        raise AttributeError("GridFunction is immutable")

    @property
    def k(self):
        return self.values.shape[-1]

    def __repr__(self):
        return f"GridFunction(n={self.grid.n}, N={self.grid.N}, k={self.k}, {self.space})"

    @classmethod
    def constant(cls, grid, M, space=POSITION):
        M = as_element(M)
        return cls(grid, np.broadcast_to(M, grid.shape + M.shape), space)

    @classmethod
    def zeros(cls, grid, k=1, space=POSITION):
        return cls(grid, np.zeros(grid.shape + (k, k)), space)

    @classmethod
    def scalar(cls, grid, values, k=1, space=POSITION):
        """Scalar samples times the unit 1_C of M_k(C)."""
        values = np.asarray(values, dtype=np.complex128)
        return cls(grid, values[..., None, None] * identity(k), space)

    def _like(self, values):
        return GridFunction(self.grid, values, self.space)

    def _check(self, other):
        if not isinstance(other, GridFunction):
            return NotImplemented
        if other.grid != self.grid or other.space != self.space or other.k != self.k:
            raise ValueError("grid functions live on different grids, spaces or algebras")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self._like(self.values + other.values)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self._like(self.values - other.values)

    def __neg__(self):
        return self._like(-self.values)

    def __mul__(self, c):
        if np.ndim(c) != 0:
            return NotImplemented
        return self._like(complex(c) * self.values)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / c)

    def left(self, M):
        """Pointwise M f(x) for a fixed algebra element M."""
        return self._like(as_element(M) @ self.values)

    def right(self, M):
        """Pointwise f(x) M."""
        return self._like(self.values @ as_element(M))

    def adjoint_pointwise(self):
        return self._like(adjoint(self.values))

    def pointwise(self, other):
        """Undeformed product f(x) g(x)."""
        self._check(other)
        return self._like(self.values @ other.values)

    def allclose(self, other, atol=0.0, rtol=1e-12):
        self._check(other)
        scale = max(np.max(np.abs(self.values)), np.max(np.abs(other.values)), 1e-300)
        return bool(np.max(np.abs(self.values - other.values)) <= atol + rtol * scale)


def sample(fn, grid, k=None, vectorized=False):
    """Sample a closure ``x -> MatrixElement`` at every grid point.

    With ``vectorized=True`` the closure receives all coordinates at once
    (shape ``grid.shape + (n,)``) and returns ``grid.shape`` or
    ``grid.shape + (k, k)``.  Scalar results are multiplied by 1_C with the
    requested ``k`` (default 1).
    """
    pts = grid.points()
    if vectorized:
        vals = np.asarray(fn(pts), dtype=np.complex128)
    else:
        first = np.asarray(fn(pts[(0,) * grid.n]), dtype=np.complex128)
        vals = np.empty(grid.shape + first.shape, dtype=np.complex128)
        for idx in np.ndindex(*grid.shape):
            vals[idx] = fn(pts[idx])
    if vals.shape == grid.shape:
        vals = vals[..., None, None] * identity(k or 1)
    bad = ~np.isfinite(vals).reshape(grid.shape + (-1,)).all(axis=-1)
    if bad.any():
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise ValueError(f"non-finite sample at grid index {idx}, x = {pts[idx].tolist()}")
    return GridFunction(grid, vals, POSITION)


def _pair_check(f, g):
    if f.grid != g.grid:
        raise ValueError("grid mismatch")
    if f.k != g.k:
        raise ValueError("algebra dimension mismatch")
    if f.space != g.space:
        raise ValueError("cannot pair a position-space and a frequency-space function")


def inner_product_E(f, g):
    """C-valued inner product: the lattice sum of f(x)* g(x) times the cell measure.

    Conjugate-linear in ``f``.
    """
    _pair_check(f, g)
    w = f.grid.cell(f.space)
    n = f.grid.n
    axes = tuple(range(n))
    return w * np.sum(adjoint(f.values) @ g.values, axis=axes)


def norm_E(f):
    """Module norm ||f||_2 = ||<f, f>||^{1/2}."""
    return float(np.sqrt(cstar_norm(inner_product_E(f, f))))


def norm_L2(f):
    """(integral of ||f(x)||^2 dx)^{1/2}; dominates norm_E."""
    w = f.grid.cell(f.space)
    return float(np.sqrt(w * np.sum(cstar_norm(f.values) ** 2)))


def norm_sup(f):
    return float(np.max(cstar_norm(f.values)))


def _multi_indices(n, order):
    return [a for a in product(range(order + 1), repeat=n) if sum(a) <= order]


def _monomial(f, alpha):
    pts = f.grid.points()
    w = np.prod(pts ** np.asarray(alpha), axis=-1)
    return f._like(w[..., None, None] * f.values)


def _check_aliasing(f):
    from .fourier import fourier

    F = fourier(f).values
    energy = np.sum(np.abs(F) ** 2, axis=(-1, -2))
    j = np.abs(f.grid.mode_indices())
    top = (j > f.grid.N / 3).any(axis=-1)
    total = energy.sum()
    if total > 0 and energy[top].sum() > 1e-8 * total:
        warnings.warn(
            "more than 1e-8 of the spectral energy lies in the top third of the band; "
            "spectral derivatives are unreliable",
            AliasingWarning,
            stacklevel=3,
        )


def _xd(f, alpha, beta, max_order):
    from .fourier import spectral_derivative

    if f.space != POSITION:
        raise ValueError("seminorms are defined on position-space functions")
    if len(alpha) != f.grid.n or len(beta) != f.grid.n:
        raise ValueError("multi-indices must have length n")
    if max(beta, default=0) > max_order:
        raise ValueError(f"derivative order above the configured maximum {max_order}")
    d = spectral_derivative(f, beta) if any(beta) else f
    return _monomial(d, alpha) if any(alpha) else d


def seminorm_p(f, alpha, beta, max_order=4):
    """sup_x ||x^alpha d^beta f(x)|| on the grid (spectral derivatives)."""
    if any(beta):
        _check_aliasing(f)
    return norm_sup(_xd(f, tuple(alpha), tuple(beta), max_order))


def seminorm_q(f, N1, N2, max_order=4):
    """(sum over |alpha| <= N1, |beta| <= N2 of ||x^alpha d^beta f||_2^2)^{1/2}."""
    if N2 > 0:
        _check_aliasing(f)
    n = f.grid.n
    total = 0.0
    for beta in _multi_indices(n, N2):
        for alpha in _multi_indices(n, N1):
            total += norm_E(_xd(f, alpha, beta, max_order)) ** 2
    return float(np.sqrt(total))
