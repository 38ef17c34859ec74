"""Limiting variances of the TJADE unmixing matrix under identity mixing.

For mode ``m`` the entries of ``Z`` are grouped into ``p_m`` faces of
``rho_m`` entries each; only face means (and one face covariance) of the
source moments enter the variances.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..ica import tjade_fit
from .distributions import UnsupportedMomentError
from .settings import draw_sources, get_setting

__all__ = [
    "ModeProfile",
    "AsymptoticProfile",
    "UndefinedVarianceError",
    "asv_profile",
    "asv_diag",
    "asv_offdiag",
    "asv_table",
    "vector_jade_asv",
    "align_to_identity",
    "monte_carlo_variances",
]


class UndefinedVarianceError(ValueError):
    """Both kurtosis means of a pair vanish, so the variance does not exist."""


@dataclass(frozen=True)
class ModeProfile:
    """Face summaries of one mode.

    ``kappa``, ``beta`` and ``omega`` are face means of excess kurtosis,
    ``E z^4`` and ``Var z^3``; ``rho`` is the face covariance matrix of
    ``E z^4``; ``width`` is the number of entries per face.
    """

    mode: int
    kappa: np.ndarray
    beta: np.ndarray
    omega: np.ndarray
    rho: np.ndarray
    width: int


@dataclass(frozen=True)
class AsymptoticProfile:
    dims: tuple
    modes: list

    def mode(self, m):
        return self.modes[m - 1]


def _faces(values, m):
    # rows are the m-mode faces
    return np.moveaxis(values, m - 1, 0).reshape(values.shape[m - 1], -1)


def asv_profile(setting):
    """Face moment summaries for every mode of a source setting."""
    setting = get_setting(setting)
    for spec in setting.cells.flat:
        if not np.isfinite(spec.m6):
            raise UnsupportedMomentError(f"{spec.name} lacks a finite sixth moment")
    kappa = setting.kurtosis()
    beta = setting.moments("m4")
    omega = setting.moments("var_cube")
    modes = []
    for m in range(1, len(setting.dims) + 1):
        b = _faces(beta, m)
        width = b.shape[1]
        bbar = b.mean(axis=1)
        modes.append(
            ModeProfile(
                mode=m,
                kappa=_faces(kappa, m).mean(axis=1),
                beta=bbar,
                omega=_faces(omega, m).mean(axis=1),
                rho=(b @ b.T) / width - np.outer(bbar, bbar),
                width=width,
            )
        )
    return AsymptoticProfile(setting.dims, modes)


def _mode_profile(profile, mode):
    return profile.mode(mode) if isinstance(profile, AsymptoticProfile) else profile


def asv_diag(profile, k, mode=1):
    """Limiting variance of ``sqrt(n) (phi_kk - 1)``; ``k`` is 0-based."""
    mp = _mode_profile(profile, mode)
    return (mp.beta[k] - 1.0) / (4.0 * mp.width)


def _zeta(mp, k):
    kap = mp.kappa[k]
    return kap**2 * (mp.omega[k] - mp.beta[k] ** 2) + kap**2 * (kap - 2.0) * (mp.width - 1)


def asv_offdiag(profile, k, l, mode=1):
    """Limiting variance of ``sqrt(n) phi_kl`` for ``k != l`` (0-based)."""
    mp = _mode_profile(profile, mode)
    if k == l:
        raise ValueError("use asv_diag for diagonal entries")
    kk, kl = mp.kappa[k], mp.kappa[l]
    denom = kk**2 + kl**2
    if denom == 0:
        raise UndefinedVarianceError(f"faces {k} and {l} both have zero mean kurtosis")
    num = _zeta(mp, k) + _zeta(mp, l) + kl**4 - 2.0 * kk * kl * mp.rho[k, l]
    return num / (mp.width * denom**2)


def asv_table(profile, mode):
    """``p_m x p_m`` matrix of limiting variances; undefined pairs are NaN."""
    mp = _mode_profile(profile, mode)
    p = mp.kappa.size
    out = np.empty((p, p))
    for k in range(p):
        for l in range(p):
            if k == l:
                out[k, l] = asv_diag(mp, k)
            else:
                try:
                    out[k, l] = asv_offdiag(mp, k, l)
                except UndefinedVarianceError:
                    out[k, l] = np.nan
    return out


def vector_jade_asv(kappa, beta, omega):
    """Limiting variances of vector JADE from per-component moments.

    ``ASV(w_kk) = (beta_k - 1) / 4`` and
    ``ASV(w_kl) = (k_k^2 (w_k - b_k^2) + k_l^2 (w_l - b_l^2) + k_l^4) / (k_k^2 + k_l^2)^2``
    with ``w = Var z^3``.
    """
    kappa, beta, omega = (np.asarray(v, dtype=float) for v in (kappa, beta, omega))
    p = kappa.size
    out = np.empty((p, p))
    for k in range(p):
        for l in range(p):
            if k == l:
                out[k, l] = (beta[k] - 1.0) / 4.0
                continue
            denom = (kappa[k] ** 2 + kappa[l] ** 2) ** 2
            if denom == 0:
                out[k, l] = np.nan
                continue
            sk = kappa[k] ** 2 * (omega[k] - beta[k] ** 2)
            sl = kappa[l] ** 2 * (omega[l] - beta[l] ** 2)
            out[k, l] = (sk + sl + kappa[l] ** 4) / denom
    return out


def align_to_identity(phi):
    """Undo the row permutation and signs of an estimate of the identity."""
    phi = np.asarray(phi, dtype=float)
    rows, cols = linear_sum_assignment(np.abs(phi), maximize=True)
    aligned = np.empty_like(phi)
    aligned[cols] = phi[rows]
    return aligned * np.where(np.diag(aligned) < 0, -1.0, 1.0)[:, None]


def monte_carlo_variances(setting, n, reps, seed=0, c=1, mode=1, progress=None):
    """Empirical ``Var[sqrt(n) (Phi_m - I)]`` over identity-mixed replications.

    Returns ``(variances, n_converged)``; non-converged fits are dropped.
    """
    setting = get_setting(setting)
    root = np.random.SeedSequence(seed)
    draws = []
    for rep, child in enumerate(root.spawn(reps)):
        Z = draw_sources(setting, n, np.random.default_rng(child))
        model = tjade_fit(Z, c=c)
        if model.converged:
            phi = align_to_identity(model.phis[mode - 1])
            draws.append(np.sqrt(n) * (phi - np.eye(phi.shape[0])))
        if progress:
            progress(rep + 1, reps)
    draws = np.array(draws)
    return draws.var(axis=0, ddof=1), len(draws)
