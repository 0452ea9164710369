"""Deformed product, left/right multiplication operators and the Heisenberg action.

In the frequency domain the deformed product is the twisted convolution

    F(f x_J g)(xi) = (2 pi)^{-n/2} sum_w F(f)(w) F(g)(xi - w) exp(i <xi - w, J w> / 2 pi) dxi^n

where ``xi - w`` is wrapped onto the centered lattice and the phase is
evaluated at that wrapped input mode.  Equivalently ``L_f`` is the sum of
modulations by ``w`` composed with the fractional shifts ``x -> x + J w / 2 pi``,
each realized exactly as a Fourier phase.  For inputs whose combined band
stays inside the lattice this is the continuum formula verbatim.
"""
import numpy as np

from .algebra import cstar_norm
from .fourier import directional_derivative, forward_array, inverse_array
from .grid import POSITION, GridFunction, SkewForm, inner_product_E

# Fraction of the l1 mass of a spectrum that the sparse path may drop.
DROP_L1 = 1e-14


def _skew(J, grid):
    if J is None:
        return SkewForm.zero(grid.n)
    if not isinstance(J, SkewForm):
        J = SkewForm(J)
    if J.n != grid.n:
        raise ValueError(f"J is {J.n}x{J.n} but the grid has dimension {grid.n}")
    return J


def _kept_modes(hat):
    """Indices of modes that carry all but DROP_L1 of the spectrum's l1 mass."""
    mass = np.sqrt(np.sum(np.abs(hat) ** 2, axis=(-1, -2))).ravel()
    total = mass.sum()
    if total == 0:
        return np.empty(0, dtype=int)
    order = np.argsort(mass)
    dropped = np.searchsorted(np.cumsum(mass[order]), DROP_L1 * total, side="right")
    return np.sort(order[dropped:])


# Complex entries gathered per chunk of modes (bounds temporary memory).
CHUNK_ENTRIES = 1 << 20


def _axis_tables(grid, shifts, u):
    """Per-axis pieces of one chunk of twisted-convolution terms.

    For shifts s (q, n) and phase vectors u (q, n) returns, for each axis, the
    storage positions of (xi_a - s_a) wrapped onto the lattice and the factor
    exp(i (xi_a - s_a) u_a), both broadcastable to ``(q,) + grid.shape``.
    """
    half = grid.N // 2
    modes = grid.modes
    n = grid.n
    positions, phase = [], None
    for a in range(n):
        wrapped = (modes[None, :] - shifts[:, a, None] + half) % grid.N - half
        shape = (len(shifts),) + (1,) * a + (grid.N,) + (1,) * (n - a - 1)
        positions.append((wrapped + half).reshape(shape))
        fac = np.exp(1j * grid.dxi * wrapped * u[:, a, None]).reshape(shape)
        phase = fac if phase is None else phase * fac
    return tuple(positions), phase


def twisted_convolution(fhat, ghat, grid, J, method="auto"):
    """Spectrum of f x_J g from the spectra of f and g (centered order).

    ``method="direct"`` sums over every mode of f; ``"sparse"``/``"auto"``
    sum over the significant modes of whichever factor has fewer of them.
    Either way each term is one lattice shift of the other spectrum times the
    phase exp(i <eta, J w> / 2 pi), eta being the (wrapped) mode of g.
    """
    J = _skew(J, grid)
    k = fhat.shape[-1]
    M = grid.size
    idx = grid.mode_indices().reshape(-1, grid.n)
    c = (2 * np.pi) ** (-grid.n / 2) * grid.cell("frequency")
    F = fhat.reshape(grid.shape + (k, k))
    G = ghat.reshape(grid.shape + (k, k))
    Fq = fhat.reshape(M, k, k)
    Gq = ghat.reshape(M, k, k)
    Jm = J.matrix * grid.dxi / (2 * np.pi)

    if method == "direct":
        loop_f, modes = True, np.arange(M)
    elif method in ("auto", "sparse"):
        kf, kg = _kept_modes(fhat), _kept_modes(ghat)
        loop_f, modes = (True, kf) if len(kf) <= len(kg) else (False, kg)
    else:
        raise ValueError(f"unknown method {method!r}")

    # matrix axes first so each slice below is one contiguous (k q, M) block
    Ft = np.ascontiguousarray(np.moveaxis(F, (-2, -1), (0, 1)))  # (row, col, ...)
    Gt = np.ascontiguousarray(np.moveaxis(G, (-1, -2), (0, 1)))  # (col, row, ...)
    out = np.zeros((k, k, M), dtype=np.complex128)
    step = max(1, CHUNK_ENTRIES // (M * k * k))
    for lo in range(0, len(modes), step):
        q = modes[lo:lo + step]
        s = idx[q]
        if loop_f:
            # w = s fixed, eta = xi - w: F(f)(w) F(g)(eta) exp(i <eta, J w> / 2 pi)
            pos, ph = _axis_tables(grid, s, s @ Jm.T)
            moved = (ph * Gt[(slice(None), slice(None)) + pos]).reshape(k, k * len(q), M)
            left = np.transpose(Fq[q], (1, 2, 0)).reshape(k, k * len(q))
            for d in range(k):
                out[:, d] += left @ moved[d]
        else:
            # eta = s fixed, w = xi - eta: same phase read as a function of w
            pos, ph = _axis_tables(grid, s, -(s @ Jm.T))
            moved = (ph * Ft[(slice(None), slice(None)) + pos]).reshape(k, k * len(q), M)
            right = np.transpose(Gq[q], (2, 1, 0)).reshape(k, k * len(q))
            for a in range(k):
                out[a] += right @ moved[a]
    out = np.moveaxis(out, (0, 1), (-2, -1)).reshape(grid.shape + (k, k))
    return c * out


def deformed_product(f, g, J=None, method="auto"):
    """f x_J g for position-space grid functions on the same grid."""
    if f.grid != g.grid:
        raise ValueError("grid mismatch")
    if f.k != g.k:
        raise ValueError("algebra dimension mismatch")
    if f.space != POSITION or g.space != POSITION:
        raise ValueError("deformed_product expects position-space functions")
    grid = f.grid
    hat = twisted_convolution(
        forward_array(f.values, grid), forward_array(g.values, grid), grid, J, method
    )
    return GridFunction(grid, inverse_array(hat, grid), POSITION)


# ---------------------------------------------------------------------------
# operators


def hs_inner(f, g):
    """Hilbert-Schmidt inner product trace <f, g>_E (a plain complex number)."""
    return complex(np.trace(inner_product_E(f, g)))


class GridOperator:
    """Linear map on grid functions over a fixed grid and algebra M_k(C).

    ``adjoint`` is taken for the trace inner product ``tr <f, g>_E``; for
    right-module maps (``LeftMult``, ``Heisenberg``, ``RankOne``) it is also
    the module adjoint.
    """

    kind = "abstract"

    def __init__(self, grid, k):
        self.grid = grid
        self.k = k

    def _check(self, f):
        if f.grid != self.grid or f.k != self.k:
            raise ValueError(f"{self.kind} operator cannot act on {f!r}")
        if f.space != POSITION:
            raise ValueError("operators act on position-space functions")

    def apply(self, f):
        self._check(f)
        return self._apply(f)

    def __call__(self, f):
        return self.apply(f)

    def adjoint(self):
        raise NotImplementedError

    def __matmul__(self, other):
        if not isinstance(other, GridOperator):
            return NotImplemented
        return Composition([self, other])

    def __add__(self, other):
        if not isinstance(other, GridOperator):
            return NotImplemented
        return LinearCombination([(1.0, self), (1.0, other)])

    def __sub__(self, other):
        if not isinstance(other, GridOperator):
            return NotImplemented
        return LinearCombination([(1.0, self), (-1.0, other)])

    def __rmul__(self, c):
        if np.ndim(c) != 0:
            return NotImplemented
        return LinearCombination([(complex(c), self)])

    def __neg__(self):
        return LinearCombination([(-1.0, self)])


class LeftMult(GridOperator):
    """g -> f x_J g.  ``spectrum`` may supply F(f) exactly (skips the FFT)."""

    kind = "LeftMult"

    def __init__(self, f, J=None, spectrum=None):
        if f.space != POSITION:
            raise ValueError("symbol must be a position-space function")
        super().__init__(f.grid, f.k)
        self.f = f
        self.J = _skew(J, f.grid)
        self.spectrum = forward_array(f.values, f.grid) if spectrum is None else spectrum

    def _apply(self, g):
        hat = twisted_convolution(
            self.spectrum, forward_array(g.values, g.grid), g.grid, self.J
        )
        return GridFunction(g.grid, inverse_array(hat, g.grid), POSITION)

    def adjoint(self):
        return LeftMult(self.f.adjoint_pointwise(), self.J)


class RightMult(GridOperator):
    kind = "RightMult"

    def __init__(self, g, J=None):
        if g.space != POSITION:
            raise ValueError("symbol must be a position-space function")
        super().__init__(g.grid, g.k)
        self.g = g
        self.J = _skew(J, g.grid)

    def _apply(self, f):
        return deformed_product(f, self.g, self.J)

    def adjoint(self):
        return RightMult(self.g.adjoint_pointwise(), self.J)


def _lattice_steps(v, step, what):
    v = np.atleast_1d(np.asarray(v, dtype=float))
    q = v / step
    r = np.round(q)
    if not np.allclose(q, r, rtol=0, atol=1e-9 * max(1.0, np.max(np.abs(q)))):
        raise ValueError(f"{what} {v.tolist()} is not on the lattice of step {step}")
    return r.astype(int)


class Heisenberg(GridOperator):
    """U_{a,b,c} f(x) = exp(ic) exp(i<b,x>) f(x - a), with lattice-exact a and b."""

    kind = "Heisenberg"

    def __init__(self, grid, k, a=None, b=None, c=0.0):
        super().__init__(grid, k)
        a = np.zeros(grid.n) if a is None else np.asarray(a, dtype=float).reshape(grid.n)
        b = np.zeros(grid.n) if b is None else np.asarray(b, dtype=float).reshape(grid.n)
        self.shift = _lattice_steps(a, grid.h, "translation")
        self.freq = _lattice_steps(b, grid.dxi, "modulation")
        self.a = self.shift * grid.h
        self.b = self.freq * grid.dxi
        self.c = float(c)

    def _apply(self, f):
        vals = np.roll(f.values, tuple(int(s) for s in self.shift), axis=tuple(range(self.grid.n)))
        phase = np.exp(1j * (self.c + self.grid.points() @ self.b))
        return GridFunction(self.grid, phase[..., None, None] * vals, POSITION)

    def inverse(self):
        return Heisenberg(self.grid, self.k, -self.a, -self.b, -self.c - float(self.b @ self.a))

    def adjoint(self):
        return self.inverse()

    @property
    def is_identity(self):
        return not self.shift.any() and not self.freq.any() and self.c == 0.0


def heisenberg_U(a, b, c, grid, k=1):
    return Heisenberg(grid, k, a, b, c)


def identity_operator(grid, k=1):
    return Heisenberg(grid, k)


class Dense(GridOperator):
    """Explicit matrix on the flattened coordinates ``grid.shape + (k, k)``."""

    kind = "Dense"

    def __init__(self, grid, k, matrix):
        super().__init__(grid, k)
        matrix = np.asarray(matrix, dtype=np.complex128)
        dim = grid.size * k * k
        if matrix.shape != (dim, dim):
            raise ValueError(f"dense operator must be {dim}x{dim}, got {matrix.shape}")
        self.matrix = matrix

    def _apply(self, f):
        out = self.matrix @ f.values.reshape(-1)
        return GridFunction(self.grid, out.reshape(f.values.shape), POSITION)

    def adjoint(self):
        return Dense(self.grid, self.k, self.matrix.conj().T)


class RankOne(GridOperator):
    """h -> w <v, h>_E, a right-module map of rank one."""

    kind = "RankOne"

    def __init__(self, v, w):
        if v.grid != w.grid or v.k != w.k:
            raise ValueError("v and w must share grid and algebra")
        super().__init__(v.grid, v.k)
        self.v, self.w = v, w

    def _apply(self, h):
        return self.w.right(inner_product_E(self.v, h))

    def adjoint(self):
        return RankOne(self.w, self.v)


class Composition(GridOperator):
    """ops[0] o ops[1] o ... (the last one acts first)."""

    kind = "Composition"

    def __init__(self, ops):
        ops = list(ops)
        if not ops:
            raise ValueError("empty composition")
        grid, k = ops[0].grid, ops[0].k
        if any(op.grid != grid or op.k != k for op in ops):
            raise ValueError("cannot compose operators on different spaces")
        super().__init__(grid, k)
        self.ops = ops

    def _apply(self, f):
        for op in reversed(self.ops):
            f = op.apply(f)
        return f

    def adjoint(self):
        return Composition([op.adjoint() for op in reversed(self.ops)])


class LinearCombination(GridOperator):
    kind = "LinearCombination"

    def __init__(self, terms, grid=None, k=None):
        terms = [(complex(c), op) for c, op in terms]
        if terms:
            grid, k = terms[0][1].grid, terms[0][1].k
            if any(op.grid != grid or op.k != k for _, op in terms):
                raise ValueError("cannot add operators on different spaces")
        elif grid is None or k is None:
            raise ValueError("an empty combination needs grid and k")
        super().__init__(grid, k)
        self.terms = terms

    def _apply(self, f):
        out = np.zeros_like(f.values)
        for c, op in self.terms:
            out = out + c * op.apply(f).values
        return GridFunction(self.grid, out, POSITION)

    def adjoint(self):
        return LinearCombination(
            [(np.conj(c), op.adjoint()) for c, op in self.terms], self.grid, self.k
        )


def zero_operator(grid, k=1):
    return LinearCombination([], grid, k)


def op_L(f, J=None):
    return LeftMult(f, J)


def op_R(g, J=None):
    return RightMult(g, J)


# ---------------------------------------------------------------------------
# Heisenberg action on operators


def ad_U(A, a=None, b=None):
    """U_{a,b} A U_{a,b}^{-1} (independent of the central phase)."""
    U = Heisenberg(A.grid, A.k, a, b)
    if U.is_identity:
        return A
    return Composition([U, A, U.inverse()])


def generator_direction(index, J):
    """Vector v with d_index(L_phi) = L_{d_v phi} for the conventions used here.

    Translations (index <= n) give the unit vector; modulations give
    ``-J f_k / (2 pi)``.
    """
    J = J if isinstance(J, SkewForm) else SkewForm(J)
    n = J.n
    if not 1 <= index <= 2 * n:
        raise ValueError(f"generator index must lie in 1..{2 * n}")
    e = np.zeros(n)
    e[(index - 1) % n] = 1.0
    return e if index <= n else -J(e) / (2 * np.pi)


def _conjugate_along(A, index, t):
    """Ad U(-t e) for the translation (index <= n) or modulation direction."""
    n = A.grid.n
    e = np.zeros(n)
    e[(index - 1) % n] = 1.0
    if index <= n:
        return ad_U(A, -t * e, None)
    return ad_U(A, None, -t * e)


def _exact_derivation(A, index):
    if isinstance(A, LeftMult):
        v = generator_direction(index, A.J)
        return LeftMult(directional_derivative(A.f, v), A.J)
    if isinstance(A, Heisenberg):
        n = A.grid.n
        coef = 1j * A.b[index - 1] if index <= n else -1j * A.a[index - n - 1]
        return LinearCombination([(coef, A)]) if coef else zero_operator(A.grid, A.k)
    if isinstance(A, LinearCombination):
        terms = [(c, _exact_derivation(op, index)) for c, op in A.terms]
        if any(op is None for _, op in terms):
            return None
        return LinearCombination(terms, A.grid, A.k)
    if isinstance(A, Composition):
        parts = []
        for i, op in enumerate(A.ops):
            d = _exact_derivation(op, index)
            if d is None:
                return None
            parts.append((1.0, Composition(A.ops[:i] + [d] + A.ops[i + 1:])))
        return LinearCombination(parts, A.grid, A.k)
    return None


def derivation(A, index, steps=1, method="auto", richardson=True):
    """Generator d_index of the conjugation action applied to the operator A.

    The convention is d A = lim (Ad U(-t e)(A) - A) / t.  With
    ``method="difference"`` the symmetric quotient is taken at the lattice step
    (``steps`` multiples of h or 2 pi / L) and, with ``richardson``, combined
    with the doubled step to cancel the O(t^2) term.  ``method="exact"`` uses
    the closed forms available for left multiplications, Heisenberg unitaries
    and their sums/products; ``"auto"`` prefers them and falls back.
    """
    n = A.grid.n
    if not 1 <= index <= 2 * n:
        raise ValueError(f"generator index must lie in 1..{2 * n}")
    if method in ("exact", "auto"):
        exact = _exact_derivation(A, index)
        if exact is not None:
            return exact
        if method == "exact":
            raise ValueError(f"no closed-form derivation for a {A.kind} operator")
    elif method != "difference":
        raise ValueError(f"unknown method {method!r}")
    if int(steps) != steps or steps < 1:
        raise ValueError("derivation step below lattice resolution")
    unit = A.grid.h if index <= n else A.grid.dxi
    s = steps * unit

    def quotient(t):
        return [
            (1 / (2 * t), _conjugate_along(A, index, t)),
            (-1 / (2 * t), _conjugate_along(A, index, -t)),
        ]

    if not richardson:
        return LinearCombination(quotient(s))
    terms = [(4 / 3 * c, op) for c, op in quotient(s)]
    terms += [(-1 / 3 * c, op) for c, op in quotient(2 * s)]
    return LinearCombination(terms)


# ---------------------------------------------------------------------------
# materialization and norms


def basis_function(grid, k, index):
    vals = np.zeros(grid.size * k * k, dtype=np.complex128)
    vals[index] = 1.0
    return GridFunction(grid, vals.reshape(grid.shape + (k, k)), POSITION)


def to_dense(A):
    """Matrix of A on the flattened coordinates (feasible for small grids only)."""
    dim = A.grid.size * A.k * A.k
    cols = [A.apply(basis_function(A.grid, A.k, j)).values.reshape(-1) for j in range(dim)]
    return Dense(A.grid, A.k, np.stack(cols, axis=1))


def dense_norm(A):
    """Exact operator norm for the Hilbert-Schmidt (Frobenius-L2) structure."""
    M = A.matrix if isinstance(A, Dense) else to_dense(A).matrix
    return float(np.linalg.norm(M, 2))


def power_norm(A, iters=60, seed=0, rtol=1e-10):
    """Randomized power iteration on A* A; a lower estimate of dense_norm."""
    rng = np.random.default_rng(seed)
    shape = A.grid.shape + (A.k, A.k)
    x = GridFunction(A.grid, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    At = A.adjoint()
    est = 0.0
    for _ in range(iters):
        x = x / np.sqrt(abs(hs_inner(x, x)))
        y = A.apply(x)
        new = np.sqrt(abs(hs_inner(y, y)))
        if abs(new - est) <= rtol * max(new, 1e-300):
            return float(new)
        est = new
        x = At.apply(y)
        if not np.any(x.values):
            return float(est)
    return float(est)


def l1_fourier_norm(f):
    """||F(f)||_1: lattice sum of C*-norms of the spectrum times dxi^n."""
    hat = forward_array(f.values, f.grid)
    return float(f.grid.cell("frequency") * np.sum(cstar_norm(hat)))
