"""Tensor and vector ICA estimators based on fourth moments.

A sample is an array of shape ``(n, p_1, ..., p_r)``; a vector sample is
the ``r = 1`` case ``(n, p)``. All fitters return an :class:`UnmixingModel`
holding one unmixing matrix per mode, so that

    Y_i = (X_i - mu) (.)_1 Phi_1 ... (.)_r Phi_r

has (approximately) independent entries.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import SingularMatrixError, inv_sqrt_sym, joint_diagonalize, sym_eigen
from .tensor import (
    ShapeError,
    rho,
    sample_contract,
    sample_mode_product,
    sample_multi_mode_product,
    vectorize_sample,
)

__all__ = [
    "UnmixingModel",
    "CumulantMatrixSet",
    "center",
    "m_mode_covariance",
    "standardize",
    "xi_matrix",
    "cumulant_set",
    "fourth_moment_matrix",
    "estimate_rotation",
    "tjade_fit",
    "tfobi_fit",
    "jade_fit",
    "fobi_fit",
    "vjade_fit",
    "vfobi_fit",
    "transform",
    "inverse_transform",
    "canonicalize",
    "element_kurtosis",
    "lowest_kurtosis_components",
]

MODEL_SCHEMA = 1
_BLOCK = 256


@dataclass(frozen=True)
class UnmixingModel:
    """Fitted per-mode unmixing matrices.

    Attributes
    ----------
    phis : list of ndarray
        ``Phi_m`` for ``m = 1..r``, each ``p_m x p_m``.
    location : ndarray
        Sample mean tensor.
    tau_sq : list of float
        Per-mode ``trace(Xi_m) / p_m`` of the standardized sample.
    face_kurtosis : list of ndarray
        Average empirical excess kurtosis of each ``m``-mode face of the
        recovered components, in the row order of ``Phi_m``.
    method : str
    c : int or None
        Cumulant variant for the JADE family.
    diagnostics : list of dict
        Per-mode convergence or degeneracy information.
    """

    phis: list
    location: np.ndarray
    tau_sq: list
    face_kurtosis: list
    method: str
    c: int = None
    diagnostics: list = field(default_factory=list)

    @property
    def dims(self):
        return tuple(self.location.shape)

    @property
    def converged(self):
        return all(d.get("converged", True) for d in self.diagnostics)

    @property
    def degenerate(self):
        return any(d.get("degenerate", False) for d in self.diagnostics)

    def rows_by_ascending_kurtosis(self, m):
        """Row indices of ``Phi_m`` ordered from lowest to highest face kurtosis."""
        return np.argsort(self.face_kurtosis[m - 1], kind="stable")

    def to_dict(self):
        return {
            "schema": MODEL_SCHEMA,
            "method": self.method,
            "c": self.c,
            "dims": list(self.dims),
            "phis": [phi.tolist() for phi in self.phis],
            "location": self.location.reshape(-1, order="F").tolist(),
            "tau_sq": [float(t) for t in self.tau_sq],
            "face_kurtosis": [k.tolist() for k in self.face_kurtosis],
            "diagnostics": [_jsonable(d) for d in self.diagnostics],
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("schema") != MODEL_SCHEMA:
            raise ValueError(f"unsupported model schema {data.get('schema')!r}")
        dims = tuple(data["dims"])
        return cls(
            phis=[np.array(phi, dtype=float) for phi in data["phis"]],
            location=np.array(data["location"], dtype=float).reshape(dims, order="F"),
            tau_sq=list(data["tau_sq"]),
            face_kurtosis=[np.array(k, dtype=float) for k in data["face_kurtosis"]],
            method=data["method"],
            c=data.get("c"),
            diagnostics=list(data.get("diagnostics", [])),
        )


def _jsonable(d):
    out = {}
    for key, value in d.items():
        if isinstance(value, np.ndarray):
            value = value.tolist()
        elif isinstance(value, np.generic):
            value = value.item()
        out[key] = value
    return out


@dataclass(frozen=True)
class CumulantMatrixSet:
    """Estimated fourth-cumulant matrices of one mode.

    ``matrices[k]`` is the matrix for index pair ``pairs[k]``. For ``c = 1``
    only pairs with ``i <= j`` are kept since ``C^{ij} = C^{ji}``.
    """

    mode: int
    c: int
    pairs: list
    matrices: np.ndarray
    xi: np.ndarray


# -- accumulation helpers ----------------------------------------------------


def _tree_sum(parts):
    parts = list(parts)
    while len(parts) > 1:
        merged = [parts[k] + parts[k + 1] for k in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            merged.append(parts[-1])
        parts = merged
    return parts[0]


def _row_sum(F):
    """Sum of the rows of ``F`` with blockwise pairwise reduction."""
    return _tree_sum(F[s : s + _BLOCK].sum(axis=0) for s in range(0, F.shape[0], _BLOCK))


def _gram_sum(F):
    """``sum_a outer(F_a, F_a)`` over rows of ``F``, blockwise with a pairwise reduction."""
    return _tree_sum(
        F[s : s + _BLOCK].T @ F[s : s + _BLOCK] for s in range(0, F.shape[0], _BLOCK)
    )


def _as_sample(sample):
    sample = np.asarray(sample, dtype=float)
    if sample.ndim < 2:
        raise ShapeError("a sample needs shape (n, p_1, ..., p_r)")
    if sample.shape[0] < 2:
        raise ValueError("a sample needs at least two observations")
    if not np.all(np.isfinite(sample)):
        raise ValueError("sample contains non-finite values")
    return sample


# -- standardization ---------------------------------------------------------


def center(sample):
    """Subtract the sample mean tensor. Returns ``(centered, mean)``."""
    sample = _as_sample(sample)
    n = sample.shape[0]
    mean = (_row_sum(sample.reshape(n, -1)) / n).reshape(sample.shape[1:])
    centered = sample - mean
    # second pass removes the rounding left by the first
    centered -= (_row_sum(centered.reshape(n, -1)) / n).reshape(sample.shape[1:])
    return centered, mean


def _mode_average(S, dims, m):
    n = S.shape[0]
    p = S.shape[1]
    return _row_sum(S.reshape(n, p * p)).reshape(p, p) / (n * rho(dims, m))


def m_mode_covariance(centered, m):
    """``(1 / (n rho_m)) sum_a X_a (.)_{-m} X_a`` of a centered sample.

    Raises
    ------
    SingularMatrixError
        If the estimate is rank deficient.
    """
    centered = np.asarray(centered, dtype=float)
    dims = centered.shape[1:]
    cov = _mode_average(sample_contract(centered, m), dims, m)
    cov = 0.5 * (cov + cov.T)
    vals = np.linalg.eigvalsh(cov)
    if not vals[-1] > 0 or vals[0] <= 1e-12 * vals[-1]:
        raise SingularMatrixError(f"{m}-mode covariance is singular", mode=m)
    return cov


def standardize(centered):
    """Whiten every mode simultaneously with the symmetric inverse square roots.

    All ``Sigma_m`` are estimated from the input sample before any of them
    is applied. Returns ``(standardized, whiteners)``.
    """
    centered = np.asarray(centered, dtype=float)
    r = centered.ndim - 1
    whiteners = [inv_sqrt_sym(m_mode_covariance(centered, m), mode=m) for m in range(1, r + 1)]
    return sample_multi_mode_product(centered, whiteners), whiteners


def xi_matrix(standardized, m):
    """``Xi_m``, the ``m``-mode covariance of the standardized sample, and ``tau^2``."""
    standardized = _as_sample(standardized)
    dims = standardized.shape[1:]
    xi = _mode_average(sample_contract(standardized, m), dims, m)
    return xi, float(np.trace(xi) / dims[m - 1])


# -- rotation ------------------------------------------------------------------


def _fourth_moments(S, nrho):
    """``M[i, j, k, l] = sum_a S_a[i, j] S_a[k, l] / nrho`` for symmetric ``S_a``."""
    n, p, _ = S.shape
    iu, ju = np.triu_indices(p)
    packed = _gram_sum(S[:, iu, ju]) / nrho
    index = np.empty((p, p), dtype=int)
    index[iu, ju] = np.arange(iu.size)
    index[ju, iu] = np.arange(iu.size)
    return packed[index[:, :, None, None], index[None, None, :, :]]


def cumulant_set(standardized, m, c=1):
    """Estimated ``m``-mode fourth-cumulant matrices of variant ``c``.

    With ``S_a = X_a (.)_{-m} X_a`` and ``Xi`` the ``m``-mode covariance,

    * ``c = 1``: ``C^{ij} = mean(S_a[i, j] S_a) / rho_m - Xi (d_ij rho_m I + E^ij + E^ji) Xi^T``
    * ``c = 2``: ``C^{ij} = mean(S_a E^ij S_a) / rho_m - Xi (d_ij I + rho_m E^ij + E^ji) Xi^T``
    """
    if c not in (1, 2):
        raise ValueError(f"cumulant variant must be 1 or 2, got {c!r}")
    standardized = _as_sample(standardized)
    n = standardized.shape[0]
    dims = standardized.shape[1:]
    p = dims[m - 1]
    r_m = rho(dims, m)
    S = sample_contract(standardized, m)
    xi = _mode_average(S, dims, m)
    M = _fourth_moments(S, n * r_m)
    xixi = xi @ xi.T

    pairs = []
    mats = []
    for i in range(p):
        for j in range(i if c == 1 else 0, p):
            outer_ij = np.outer(xi[:, i], xi[:, j])
            outer_ji = outer_ij.T
            if c == 1:
                B = M[i, j]
                corr = outer_ij + outer_ji
                if i == j:
                    corr = corr + r_m * xixi
            else:
                B = M[:, i, j, :]
                corr = r_m * outer_ij + outer_ji
                if i == j:
                    corr = corr + xixi
            pairs.append((i, j))
            mats.append(B - corr)
    return CumulantMatrixSet(m, c, pairs, np.array(mats), xi)


def fourth_moment_matrix(standardized, m):
    """``B_m = (1 / (n rho_m)) sum_a (X_a (.)_{-m} X_a)^2``, the matrix used by TFOBI."""
    standardized = _as_sample(standardized)
    dims = standardized.shape[1:]
    S = sample_contract(standardized, m)
    B = _mode_average(np.matmul(S, S), dims, m)
    return 0.5 * (B + B.T)


def estimate_rotation(cset, tol=1e-8, max_sweeps=100):
    """Jointly diagonalize a cumulant set; ``result.rotation`` estimates ``U_m^T``.

    For ``c = 1`` the stored off-diagonal pairs stand for both ``(i, j)``
    and ``(j, i)`` and are weighted by ``sqrt(2)`` so the objective is the
    full double sum over ``i, j``.
    """
    mats = 0.5 * (cset.matrices + np.swapaxes(cset.matrices, 1, 2))
    if cset.c == 1:
        weights = np.array([1.0 if i == j else np.sqrt(2.0) for i, j in cset.pairs])
        mats = mats * weights[:, None, None]
    return joint_diagonalize(mats, tol=tol, max_sweeps=max_sweeps)


# -- fitting -------------------------------------------------------------------


def _prepare(sample):
    sample = _as_sample(sample)
    n = sample.shape[0]
    dims = sample.shape[1:]
    if n <= max(dims):
        raise ValueError(f"need more observations than the largest dimension ({n} <= {max(dims)})")
    centered, mean = center(sample)
    standardized, whiteners = standardize(centered)
    return sample, mean, standardized, whiteners


def tjade_fit(sample, c=1, tol=1e-8, max_sweeps=100, method="TJADE"):
    """Tensor JADE.

    Centers, whitens each mode with its ``m``-mode covariance, and rotates
    each mode by the joint diagonalizer of its fourth-cumulant matrices.

    Parameters
    ----------
    sample : array_like, shape (n, p_1, ..., p_r)
    c : {1, 2}
        Which family of cumulant matrices to diagonalize.
    tol, max_sweeps
        Passed to :func:`tjade.linalg.joint_diagonalize`.

    Returns
    -------
    UnmixingModel
        Rows of every ``Phi_m`` in canonical order (see :func:`canonicalize`).
    """
    sample, mean, standardized, whiteners = _prepare(sample)
    dims = sample.shape[1:]
    phis, tau_sq, diagnostics = [], [], []
    for m, W in enumerate(whiteners, start=1):
        xi, tau2 = xi_matrix(standardized, m)
        tau_sq.append(tau2)
        if dims[m - 1] == 1:
            phis.append(W.copy())
            diagnostics.append({"sweeps": 0, "converged": True, "final_off": 0.0})
            continue
        res = estimate_rotation(cumulant_set(standardized, m, c), tol=tol, max_sweeps=max_sweeps)
        phis.append(res.rotation @ W)
        diagnostics.append(
            {"sweeps": res.sweeps, "converged": res.converged, "final_off": res.final_off}
        )
    model = UnmixingModel(phis, mean, tau_sq, [], method, c, diagnostics)
    return canonicalize(model, sample)


def tfobi_fit(sample, gap_tol=3.0, method="TFOBI"):
    """Tensor FOBI: rotate each whitened mode by the eigenvectors of ``B_m``.

    A mode is flagged ``degenerate`` when two eigenvalues of ``B_m`` lie
    closer than ``gap_tol * max|lambda| / sqrt(n)``; the estimate is still
    returned.
    """
    sample, mean, standardized, whiteners = _prepare(sample)
    n = sample.shape[0]
    phis, tau_sq, diagnostics = [], [], []
    for m, W in enumerate(whiteners, start=1):
        _, tau2 = xi_matrix(standardized, m)
        tau_sq.append(tau2)
        eig = sym_eigen(fourth_moment_matrix(standardized, m))
        gaps = -np.diff(eig.values)
        min_gap = float(gaps.min()) if gaps.size else np.inf
        threshold = gap_tol * np.max(np.abs(eig.values)) / np.sqrt(n)
        phis.append(eig.vectors.T @ W)
        diagnostics.append(
            {
                "converged": True,
                "eigenvalues": eig.values,
                "min_gap": min_gap,
                "degenerate": bool(min_gap < threshold),
            }
        )
    model = UnmixingModel(phis, mean, tau_sq, [], method, None, diagnostics)
    return canonicalize(model, sample)


def _as_vectors(x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ShapeError(f"a vector sample needs shape (n, p), got {x.shape}")
    return x


def jade_fit(x, c=1, tol=1e-8, max_sweeps=100):
    """Vector JADE on an ``(n, p)`` sample; the ``r = 1`` case of :func:`tjade_fit`."""
    return tjade_fit(_as_vectors(x), c=c, tol=tol, max_sweeps=max_sweeps, method="JADE")


def fobi_fit(x, gap_tol=3.0):
    """Vector FOBI on an ``(n, p)`` sample; the ``r = 1`` case of :func:`tfobi_fit`."""
    return tfobi_fit(_as_vectors(x), gap_tol=gap_tol, method="FOBI")


def vjade_fit(sample, c=1, tol=1e-8, max_sweeps=100):
    """JADE applied to vectorized tensor observations."""
    return jade_fit(vectorize_sample(sample), c=c, tol=tol, max_sweeps=max_sweeps)


def vfobi_fit(sample, gap_tol=3.0):
    """FOBI applied to vectorized tensor observations."""
    return fobi_fit(vectorize_sample(sample), gap_tol=gap_tol)


# -- applying a model ----------------------------------------------------------


def transform(model, X):
    """``(X - mu) (.)_1 Phi_1 ... (.)_r Phi_r`` for one tensor or a sample."""
    X = np.asarray(X, dtype=float)
    dims = model.dims
    if X.shape == dims:
        return transform(model, X[None])[0]
    if X.shape[1:] != dims:
        raise ShapeError(f"expected tensors of shape {dims}, got {X.shape}")
    return sample_multi_mode_product(X - model.location, model.phis)


def inverse_transform(model, Y):
    """Map component scores back to the observation space."""
    Y = np.asarray(Y, dtype=float)
    dims = model.dims
    if Y.shape == dims:
        return inverse_transform(model, Y[None])[0]
    if Y.shape[1:] != dims:
        raise ShapeError(f"expected tensors of shape {dims}, got {Y.shape}")
    out = Y
    for m, phi in enumerate(model.phis, start=1):
        out = sample_mode_product(out, np.linalg.inv(phi), m)
    return out + model.location


def element_kurtosis(scores):
    """Empirical excess kurtosis of every tensor entry over the sample axis."""
    scores = np.asarray(scores, dtype=float)
    z = scores - scores.mean(axis=0)
    m2 = np.mean(z**2, axis=0)
    m4 = np.mean(z**4, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        return m4 / m2**2 - 3.0


def _face_means(K, m):
    other = tuple(s for s in range(K.ndim) if s != m - 1)
    return K.mean(axis=other) if other else K.copy()


def canonicalize(model, sample):
    """Fix the row order and signs of every ``Phi_m``.

    Rows are sorted by decreasing absolute face kurtosis of the recovered
    components (ties keep the original order) and each row is flipped so
    that its largest-magnitude entry is positive.
    """
    K = element_kurtosis(transform(model, sample))
    phis, kurt = [], []
    for m, phi in enumerate(model.phis, start=1):
        fk = _face_means(K, m)
        order = np.argsort(-np.abs(fk), kind="stable")
        phi = phi[order]
        lead = phi[np.arange(phi.shape[0]), np.argmax(np.abs(phi), axis=1)]
        phi = phi * np.where(lead < 0, -1.0, 1.0)[:, None]
        phis.append(phi)
        kurt.append(fk[order])
    return replace(model, phis=phis, face_kurtosis=kurt)


def lowest_kurtosis_components(model, sample, k=2):
    """Multi-indices of the ``k`` recovered entries with the lowest kurtosis.

    Returns ``(indices, kurtoses)`` with indices as tuples, lowest first.
    """
    K = element_kurtosis(transform(model, sample))
    flat = K.reshape(-1, order="F")
    order = np.argsort(flat, kind="stable")[:k]
    indices = [tuple(int(i) for i in np.unravel_index(o, K.shape, order="F")) for o in order]
    return indices, flat[order]
