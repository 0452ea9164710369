"""Fourier transform with the symmetric angular convention.

    F(g)(xi) = (2 pi)^{-n/2} * integral of exp(-i <s, xi>) g(s) ds

discretized on the torus grid as a Riemann sum, evaluated with the FFT plus
the phase (-1)^j coming from the box starting at -L/2.  The matrix-valued
transform acts entrywise.
"""
import numpy as np

from .grid import FREQUENCY, POSITION, GridFunction


def _axes(grid):
    return tuple(range(grid.n))


def _sign(grid):
    j = grid.mode_indices()
    return np.where(np.sum(j, axis=-1) % 2 == 0, 1.0, -1.0)


def forward_array(values, grid):
    """Transform raw samples of shape ``grid.shape + (k, k)`` (centered output)."""
    ax = _axes(grid)
    raw = np.fft.fftshift(np.fft.fftn(values, axes=ax), axes=ax)
    scale = (2 * np.pi) ** (-grid.n / 2) * grid.cell()
    return scale * _sign(grid)[..., None, None] * raw


def inverse_array(hat, grid):
    """Inverse of :func:`forward_array`."""
    ax = _axes(grid)
    shifted = np.fft.ifftshift(_sign(grid)[..., None, None] * hat, axes=ax)
    scale = (2 * np.pi) ** (-grid.n / 2) * grid.cell("frequency") * grid.size
    return scale * np.fft.ifftn(shifted, axes=ax)


def fourier(f):
    if f.space != POSITION:
        raise ValueError("fourier expects a position-space function")
    return GridFunction(f.grid, forward_array(f.values, f.grid), FREQUENCY)


def fourier_inv(g):
    if g.space != FREQUENCY:
        raise ValueError("fourier_inv expects a frequency-space function")
    return GridFunction(g.grid, inverse_array(g.values, g.grid), POSITION)


def multiply_spectrum(f, multiplier):
    """F^{-1}(m(xi) F(f)) for a scalar multiplier sampled on the lattice."""
    hat = forward_array(f.values, f.grid) * np.asarray(multiplier)[..., None, None]
    return GridFunction(f.grid, inverse_array(hat, f.grid), POSITION)


def spectral_derivative(f, beta):
    """d^beta f computed as multiplication by (i xi)^beta."""
    xi = f.grid.frequencies()
    m = np.prod((1j * xi) ** np.asarray(beta), axis=-1)
    return multiply_spectrum(f, m)


def directional_derivative(f, v):
    """d_v f = <v, grad f>."""
    xi = f.grid.frequencies()
    return multiply_spectrum(f, 1j * (xi @ np.asarray(v, dtype=float)))


def translate(f, shift):
    """f(x - shift) by an arbitrary real shift, exact for band-limited f."""
    xi = f.grid.frequencies()
    return multiply_spectrum(f, np.exp(-1j * (xi @ np.asarray(shift, dtype=float))))


def from_spectrum(grid, hat):
    """Position-space function whose transform is ``hat`` (centered order)."""
    hat = np.asarray(hat, dtype=np.complex128)
    if hat.shape == grid.shape:
        hat = hat[..., None, None]
    return GridFunction(grid, inverse_array(hat, grid), POSITION)


def evaluate(f, points):
    """Trigonometric interpolation of ``f`` at arbitrary points (shape (..., n))."""
    points = np.asarray(points, dtype=float)
    grid = f.grid
    hat = forward_array(f.values, grid).reshape(grid.size, f.k, f.k)
    xi = grid.frequencies().reshape(grid.size, grid.n)
    phase = np.exp(1j * (points.reshape(-1, grid.n) @ xi.T))
    scale = (2 * np.pi) ** (-grid.n / 2) * grid.cell(FREQUENCY)
    out = scale * np.einsum("pj,jab->pab", phase, hat)
    return out.reshape(points.shape[:-1] + (f.k, f.k))
