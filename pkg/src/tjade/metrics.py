"""Separation accuracy: the minimum distance index and friends."""

from functools import reduce

import numpy as np
from scipy.optimize import linear_sum_assignment

from .tensor import ShapeError

__all__ = ["UndefinedIndexError", "kronecker_gain", "mdi", "transformed_mdi"]


class UndefinedIndexError(ValueError):
    """The gain matrix has an all-zero row, so the index is undefined."""


def _kron_reversed(mats):
    # A_r kron ... kron A_1
    return reduce(np.kron, reversed([np.asarray(A, dtype=float) for A in mats]))


def kronecker_gain(phis, mixers):
    """Gain ``(Phi_r kron ... kron Phi_1)(Omega_r kron ... kron Omega_1)``.

    ``phis`` may also be a fitted :class:`~tjade.ica.UnmixingModel`.
    """
    phis = getattr(phis, "phis", phis)
    if len(phis) != len(mixers):
        raise ShapeError(f"{len(phis)} unmixing matrices but {len(mixers)} mixing matrices")
    for m, (phi, omega) in enumerate(zip(phis, mixers), start=1):
        if np.shape(phi)[1] != np.shape(omega)[0]:
            raise ShapeError(f"mode {m}: {np.shape(phi)} and {np.shape(omega)} do not conform")
    return _kron_reversed(phis) @ _kron_reversed(mixers)


def mdi(G):
    """Minimum distance index of a gain matrix, in ``[0, 1]``.

    ``D(G) = (p - 1)^{-1/2} inf_C ||C G - I||_F`` over matrices ``C`` with
    exactly one non-zero entry per row and column. Optimizing the scales in
    closed form leaves a linear assignment problem on the row-normalized
    squared gains.
    """
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ShapeError(f"gain must be square, got shape {G.shape}")
    p = G.shape[0]
    if p < 2:
        raise ShapeError("the index needs p >= 2")
    sq = G**2
    norms = sq.sum(axis=1, keepdims=True)
    if np.any(norms == 0):
        raise UndefinedIndexError("gain matrix has an all-zero row")
    N = sq / norms
    rows, cols = linear_sum_assignment(N, maximize=True)
    d2 = (p - N[rows, cols].sum()) / (p - 1)
    return float(np.sqrt(min(max(d2, 0.0), 1.0)))


def transformed_mdi(d, n, p):
    """``n (p - 1) d^2``."""
    return n * (p - 1) * d**2
