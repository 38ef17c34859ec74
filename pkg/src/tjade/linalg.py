"""Symmetric eigendecomposition, inverse square roots and joint diagonalization."""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SingularMatrixError",
    "SymEigen",
    "JointDiagResult",
    "sym_eigen",
    "inv_sqrt_sym",
    "joint_diagonalize",
    "off_diag_mass",
    "diag_objective",
]


class SingularMatrixError(np.linalg.LinAlgError):
    """A covariance-type matrix is numerically singular.

    ``mode`` is the 1-based tensor mode the matrix belongs to, when known.
    """

    def __init__(self, message, mode=None):
        super().__init__(message)
        self.mode = mode


@dataclass(frozen=True)
class SymEigen:
    values: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class JointDiagResult:
    """Output of :func:`joint_diagonalize`.

    ``rotation`` is the orthogonal ``W`` such that every ``W C_k W^T`` is
    as diagonal as possible. ``objective`` holds the summed squared
    diagonals before the first sweep and after each sweep.
    """

    rotation: np.ndarray
    sweeps: int
    final_off: float
    converged: bool
    objective: list = field(default_factory=list)


def _symmetrize(S):
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise FloatingPointError("matrix has non-finite entries")
    return 0.5 * (S + S.T)


def _fix_signs(V):
    # largest-magnitude entry of every column made positive
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def sym_eigen(S):
    """Eigendecomposition of a symmetric matrix, eigenvalues descending."""
    S = _symmetrize(S)
    values, vectors = np.linalg.eigh(S)
    order = np.argsort(-values, kind="stable")
    return SymEigen(values[order], _fix_signs(vectors[:, order]))


def inv_sqrt_sym(S, eps=1e-12, mode=None):
    """Symmetric inverse square root ``V diag(lambda^-1/2) V^T``.

    Raises
    ------
    SingularMatrixError
        If the smallest eigenvalue is not above ``eps`` times the largest.
    """
    eig = sym_eigen(S)
    top = eig.values[0]
    low = eig.values[-1]
    if not top > 0 or low <= eps * top:
        where = f" (mode {mode})" if mode is not None else ""
        raise SingularMatrixError(
            f"matrix is singular or not positive definite{where}: "
            f"eigenvalue range [{low:.3e}, {top:.3e}]",
            mode=mode,
        )
    V = eig.vectors
    R = (V / np.sqrt(eig.values)) @ V.T
    return 0.5 * (R + R.T)


def _as_stack(mats):
    stack = np.array([np.asarray(C, dtype=float) for C in mats])
    if stack.ndim != 3 or stack.shape[1] != stack.shape[2]:
        raise ValueError("expected a list of square matrices of one size")
    return stack


def diag_objective(mats, W):
    """Sum over ``k`` of ``||diag(W C_k W^T)||^2``."""
    stack = _as_stack(mats)
    rotated = np.einsum("ia,kab,jb->kij", W, stack, W)
    return float(np.sum(np.diagonal(rotated, axis1=1, axis2=2) ** 2))


def off_diag_mass(mats, W):
    """Squared off-diagonal Frobenius mass left in ``W C_k W^T``, summed over ``k``."""
    stack = _as_stack(mats)
    W = np.asarray(W, dtype=float)
    if W.shape != stack.shape[1:]:
        raise ValueError(f"rotation shape {W.shape} does not match matrices {stack.shape[1:]}")
    rotated = np.einsum("ia,kab,jb->kij", W, stack, W)
    total = np.sum(rotated**2)
    diag = np.sum(np.diagonal(rotated, axis1=1, axis2=2) ** 2)
    return float(max(total - diag, 0.0))


def joint_diagonalize(mats, tol=1e-8, max_sweeps=100):
    """Orthogonal joint approximate diagonalization by Jacobi rotations.

    Maximizes ``sum_k ||diag(W C_k W^T)||^2`` over orthogonal ``W`` with
    cyclic sweeps over index pairs ``(i, j)``, ``i < j``. Each Givens angle
    is the closed-form optimum of the 2x2 subproblem (Cardoso and
    Souloumiac, 1996), so the objective never decreases.

    Parameters
    ----------
    mats : sequence of (p, p) array_like
        Symmetric matrices; callers symmetrize beforehand.
    tol : float
        A sweep in which every rotation has ``|sin(theta)| < tol`` ends the
        iteration as converged.
    max_sweeps : int
        Sweep budget. Exhausting it returns the current rotation with
        ``converged=False``.

    Returns
    -------
    JointDiagResult
    """
    if len(mats) == 0:
        raise ValueError("need at least one matrix to diagonalize")
    A = _as_stack(mats).copy()
    p = A.shape[1]
    if p == 0:
        raise ValueError("matrices must have positive size")
    V = np.eye(p)
    objective = [float(np.sum(np.diagonal(A, axis1=1, axis2=2) ** 2))]
    if p == 1:
        return JointDiagResult(V, 0, 0.0, True, objective)

    converged = False
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        rotated = False
        for i in range(p - 1):
            for j in range(i + 1, p):
                g1 = A[:, i, i] - A[:, j, j]
                g2 = A[:, i, j] + A[:, j, i]
                ton = g1 @ g1 - g2 @ g2
                toff = 2.0 * (g1 @ g2)
                theta = 0.5 * np.arctan2(toff, ton + np.hypot(ton, toff))
                c = np.cos(theta)
                s = np.sin(theta)
                if abs(s) < tol:
                    continue
                rotated = True
                Ai = A[:, i, :].copy()
                A[:, i, :] = c * Ai + s * A[:, j, :]
                A[:, j, :] = c * A[:, j, :] - s * Ai
                Ai = A[:, :, i].copy()
                A[:, :, i] = c * Ai + s * A[:, :, j]
                A[:, :, j] = c * A[:, :, j] - s * Ai
                Vi = V[:, i].copy()
                V[:, i] = c * Vi + s * V[:, j]
                V[:, j] = c * V[:, j] - s * Vi
        objective.append(float(np.sum(np.diagonal(A, axis1=1, axis2=2) ** 2)))
        if not rotated:
            converged = True
            break

    total = np.sum(A**2)
    final_off = float(max(total - objective[-1], 0.0))
    return JointDiagResult(V.T.copy(), sweeps, final_off, converged, objective)
