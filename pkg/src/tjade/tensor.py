"""Dense tensor primitives.

Tensors are plain :class:`numpy.ndarray` objects of shape ``(p_1, ..., p_r)``.
A *sample* of ``n`` tensors is an array of shape ``(n, p_1, ..., p_r)``.

Modes are 1-based throughout the public API. Vectorization stacks the
elements so that the leftmost index runs fastest (Fortran order).
"""

import numpy as np

__all__ = [
    "ShapeError",
    "rho",
    "mode_product",
    "multi_mode_product",
    "contract",
    "vectorize",
    "unvectorize",
    "flatten",
    "sample_mode_product",
    "sample_multi_mode_product",
    "sample_flatten",
    "sample_contract",
    "vectorize_sample",
    "unvectorize_sample",
]


class ShapeError(ValueError):
    """Raised when tensor and matrix dimensions do not conform."""


def _check_mode(ndim, m):
    if not 1 <= m <= ndim:
        raise ShapeError(f"mode {m} out of range for a tensor of order {ndim}")


def _check_square(A, side, m):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape != (side, side):
        raise ShapeError(
            f"mode {m} needs a {side}x{side} matrix, got shape {A.shape}"
        )
    return A


def rho(dims, m):
    """Number of ``m``-mode vectors, the product of all dims except ``p_m``."""
    _check_mode(len(dims), m)
    return int(np.prod([p for s, p in enumerate(dims, start=1) if s != m]))


def mode_product(X, A, m):
    """Transform tensor ``X`` along mode ``m`` by the square matrix ``A``.

    ``(X (.)_m A)[i_1..i_r] = sum_j X[i_1..j..i_r] * A[i_m, j]``
    """
    X = np.asarray(X, dtype=float)
    _check_mode(X.ndim, m)
    A = _check_square(A, X.shape[m - 1], m)
    return np.moveaxis(np.tensordot(A, X, axes=(1, m - 1)), 0, m - 1)


def multi_mode_product(X, mats):
    """Apply ``mats[m-1]`` along every mode ``m`` of ``X``."""
    X = np.asarray(X, dtype=float)
    if len(mats) != X.ndim:
        raise ShapeError(f"expected {X.ndim} matrices, got {len(mats)}")
    for m, A in enumerate(mats, start=1):
        X = mode_product(X, A, m)
    return X


def contract(X, Y, m):
    """The ``p_m x p_m`` matrix summing ``X[..j..] * Y[..k..]`` over all other indices."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != Y.shape:
        raise ShapeError(f"cannot contract shapes {X.shape} and {Y.shape}")
    _check_mode(X.ndim, m)
    other = [s for s in range(X.ndim) if s != m - 1]
    return np.tensordot(X, Y, axes=(other, other))


def vectorize(X):
    """Stack the elements of ``X`` with the leftmost index varying fastest."""
    return np.asarray(X, dtype=float).reshape(-1, order="F")


def unvectorize(x, dims):
    """Inverse of :func:`vectorize`."""
    return np.asarray(x, dtype=float).reshape(tuple(dims), order="F")


def _cyclic_axes(ndim, m):
    # (i_m, i_{m+1}, ..., i_r, i_1, ..., i_{m-1}); C-order reshape then makes
    # i_{m+1} the slowest column index and i_{m-1} the fastest.
    return [(m - 1 + s) % ndim for s in range(ndim)]


def flatten(X, m):
    """Cyclic ``m``-flattening, a ``p_m x rho_m`` matrix of the ``m``-mode vectors.

    Columns are ordered so that, for ``Y = X (.)_1 A_1 ... (.)_r A_r``,

        flatten(Y, m) = A_m flatten(X, m) (A_{m+1} kron ... kron A_r kron A_1 kron ... kron A_{m-1})^T
    """
    X = np.asarray(X, dtype=float)
    _check_mode(X.ndim, m)
    return np.transpose(X, _cyclic_axes(X.ndim, m)).reshape(X.shape[m - 1], -1)


# Sample-level versions: axis 0 indexes observations.


def sample_mode_product(sample, A, m):
    sample = np.asarray(sample, dtype=float)
    _check_mode(sample.ndim - 1, m)
    A = _check_square(A, sample.shape[m], m)
    return np.moveaxis(np.tensordot(sample, A, axes=(m, 1)), -1, m)


def sample_multi_mode_product(sample, mats):
    sample = np.asarray(sample, dtype=float)
    if len(mats) != sample.ndim - 1:
        raise ShapeError(f"expected {sample.ndim - 1} matrices, got {len(mats)}")
    for m, A in enumerate(mats, start=1):
        sample = sample_mode_product(sample, A, m)
    return sample


def sample_flatten(sample, m):
    """Stack of cyclic ``m``-flattenings, shape ``(n, p_m, rho_m)``."""
    sample = np.asarray(sample, dtype=float)
    r = sample.ndim - 1
    _check_mode(r, m)
    axes = [0] + [a + 1 for a in _cyclic_axes(r, m)]
    return np.transpose(sample, axes).reshape(sample.shape[0], sample.shape[m], -1)


def sample_contract(sample, m):
    """Per-observation ``X_a (.)_{-m} X_a``, shape ``(n, p_m, p_m)``."""
    F = sample_flatten(sample, m)
    return np.matmul(F, np.swapaxes(F, 1, 2))


def vectorize_sample(sample):
    """Vectorize every observation; returns shape ``(n, p_1 * ... * p_r)``."""
    sample = np.asarray(sample, dtype=float)
    n = sample.shape[0]
    return np.transpose(sample, [0] + list(range(sample.ndim - 1, 0, -1))).reshape(n, -1)


def unvectorize_sample(x, dims):
    x = np.asarray(x, dtype=float)
    rev = tuple(reversed(dims))
    n = x.shape[0]
    return np.transpose(x.reshape((n,) + rev), [0] + list(range(len(dims), 0, -1)))
