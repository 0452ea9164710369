"""Arithmetic in the matrix C*-algebra M_k(C).

Elements are plain ``(k, k)`` complex arrays.  Every function here also
accepts stacks of shape ``(..., k, k)`` and works elementwise over the
leading axes, which is how grid functions use them.
"""
import numpy as np


def as_element(M):
    """Return ``M`` as a complex128 array whose last two axes are square."""
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim < 2 or M.shape[-1] != M.shape[-2] or M.shape[-1] < 1:
        raise ValueError(f"expected (..., k, k) matrices, got shape {M.shape}")
    return M


def identity(k):
    """The unit 1_C of M_k(C)."""
    if k < 1:
        raise ValueError("k must be positive")
    return np.eye(k, dtype=np.complex128)


def adjoint(M):
    """Conjugate transpose, the involution of the algebra."""
    M = as_element(M)
    return np.conj(np.swapaxes(M, -1, -2))


def cstar_norm(M):
    """Spectral norm (largest singular value).

    Computed from the top eigenvalue of ``M* M``; at k <= 8 the dense
    Hermitian eigensolver is exact enough for the C*-identity to hold to
    round-off.
    """
    M = as_element(M)
    if M.shape[-1] == 1:
        return np.abs(M[..., 0, 0])
    gram = adjoint(M) @ M
    top = np.linalg.eigvalsh(gram)[..., -1]
    return np.sqrt(np.clip(top, 0.0, None))
