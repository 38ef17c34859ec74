"""Random mixing matrices."""

import numpy as np

__all__ = ["MIXING_KINDS", "haar_orthogonal", "mixing_matrix", "mixing_matrices", "normalize_kind"]

MIXING_KINDS = ("identity", "orthogonal", "gaussian", "uniform")
_ALIASES = {"haar": "orthogonal", "haar_orthogonal": "orthogonal", "normal": "gaussian"}
MAX_CONDITION = 1e6


def normalize_kind(kind):
    kind = _ALIASES.get(kind, kind)
    if kind not in MIXING_KINDS:
        raise ValueError(f"unknown mixing kind {kind!r}; expected one of {MIXING_KINDS}")
    return kind


def haar_orthogonal(p, rng):
    """Orthogonal ``p x p`` matrix distributed by the Haar measure.

    QR of a standard Gaussian matrix with the signs of ``diag(R)`` folded
    into ``Q`` (Mezzadri, 2007).
    """
    Q, R = np.linalg.qr(rng.standard_normal((p, p)))
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def mixing_matrix(kind, p, rng):
    kind = normalize_kind(kind)
    if kind == "identity":
        return np.eye(p)
    if kind == "orthogonal":
        return haar_orthogonal(p, rng)
    while True:
        if kind == "gaussian":
            A = rng.standard_normal((p, p))
        else:
            A = rng.uniform(-1.0, 1.0, (p, p))
        if np.linalg.cond(A) <= MAX_CONDITION:
            return A


def mixing_matrices(kind, dims, rng):
    """One mixing matrix per mode."""
    return [mixing_matrix(kind, p, rng) for p in dims]
