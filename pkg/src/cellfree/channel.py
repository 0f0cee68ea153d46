"""Channel realizations, pilot processing, and MMSE channel estimation.

The estimate of h_kl from the de-spread pilot statistic z_kl is
sqrt(tau_p*rho_p) * R_kl * Psi^{-1} * z_kl, where
Psi = tau_p*rho_p * sum_{i copilot of k} R_il + sigma2*I is the covariance
of z_kl. Estimation error covariance: C_kl = R_kl - tau_p*rho_p * R_kl *
Psi^{-1} * R_kl.
"""

import io
from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .errors import EstimationError

# condition-number ceiling above which a pilot covariance is treated as singular
PSI_COND_LIMIT = 1e12


@dataclass
class EstimationModel:
    """Per-setup precomputations for MMSE estimation.

    psi: (L, tau_p, N, N) pilot-statistic covariance per (AP, pilot).
    proj: (L, K, N, N) estimation projections sqrt(tau_p*rho_p)*R*Psi^{-1},
          zero outside serving links.
    err_cov: (L, K, N, N) error covariances, zero outside serving links.
    """

    psi: np.ndarray
    proj: np.ndarray
    err_cov: np.ndarray


def psi_matrix(corr_row, copilots, tau_p, rho_p, sigma2):
    """Pilot-statistic covariance at one AP: corr_row is (K, N, N)."""
    n = corr_row.shape[-1]
    return tau_p * rho_p * corr_row[copilots].sum(axis=0) + sigma2 * np.eye(n)


def build_estimation_model(setup, dcc, config):
    """Precompute psi, the MMSE projections, and error covariances for a drop."""
    L, K, N = setup.L, setup.K, setup.N
    c = config.tau_p * config.rho_p
    on_pilot = [np.flatnonzero(dcc.pilot_of == t) for t in range(config.tau_p)]

    psi = np.empty((L, config.tau_p, N, N), dtype=np.complex128)
    for t, ues in enumerate(on_pilot):
        contrib = setup.corr[:, ues].sum(axis=1) if ues.size else np.zeros((L, N, N))
        psi[:, t] = c * contrib + config.sigma2 * np.eye(N)

    proj = np.zeros((L, K, N, N), dtype=np.complex128)
    err_cov = np.zeros((L, K, N, N), dtype=np.complex128)
    serve = dcc.serve_mask
    for l in range(L):
        for k in range(K):
            if not serve[l, k]:
                continue
            t = dcc.pilot_of[k]
            cond = np.linalg.cond(psi[l, t])
            if not np.isfinite(cond) or cond > PSI_COND_LIMIT:
                raise EstimationError(
                    f"pilot covariance nearly singular (cond={cond:.3g}) at pilot {t}, AP {l}"
                )
            rkl = setup.corr[l, k]
            # sqrt(c) * R * Psi^{-1} = sqrt(c) * (Psi^{-1} R)^H for Hermitian R, Psi
            proj[l, k] = np.sqrt(c) * np.linalg.solve(psi[l, t], rkl).conj().T
            ckl = rkl - np.sqrt(c) * proj[l, k] @ rkl
            err_cov[l, k] = 0.5 * (ckl + ckl.conj().T)
    return EstimationModel(psi=psi, proj=proj, err_cov=err_cov)


def sample_channels(setup, rng):
    """One coherence block of channels, shape (L, K, N).

    h_kl = R_kl^{1/2} w with w standard complex Gaussian; independent across
    links and calls.
    """
    w = rngmod.crandn(rng, (setup.L, setup.K, setup.N))
    return np.einsum("lkmn,lkn->lkm", setup.sqrt_corr, w)


def pilot_sufficient_statistic(h, pilot_of, tau_p, rho_p, sigma2, rng):
    """De-spread pilot observations per (AP, pilot), shape (L, tau_p, N).

    z for UE k at AP l is the slice [l, pilot_of[k]]; the additive noise is
    drawn once per (AP, pilot) pair so co-pilot UEs share the identical
    statistic.
    """
    L, K, N = h.shape
    onehot = np.zeros((K, tau_p))
    onehot[np.arange(K), pilot_of] = 1.0
    z = np.sqrt(tau_p * rho_p) * np.einsum("lkn,kt->ltn", h, onehot)
    z += np.sqrt(sigma2) * rngmod.crandn(rng, (L, tau_p, N))
    return z


def mmse_estimate(z, corr, psi, tau_p, rho_p):
    """MMSE channel estimate(s) from pilot statistic(s) z of shape (..., N).

    Solves the Hermitian system Psi x = z instead of forming an inverse.
    Raises EstimationError when psi is numerically singular.
    """
    _check_psi(psi)
    x = np.linalg.solve(psi, np.asarray(z)[..., :, None])[..., 0]
    return np.sqrt(tau_p * rho_p) * np.einsum("mn,...n->...m", corr, x)


def error_covariance(corr, psi, tau_p, rho_p):
    """Estimation error covariance C = R - tau_p*rho_p * R Psi^{-1} R (Hermitian PSD)."""
    _check_psi(psi)
    c = tau_p * rho_p
    x = np.linalg.solve(psi, corr)
    cerr = corr - c * corr @ x
    return 0.5 * (cerr + cerr.conj().T)


def _check_psi(psi):
    cond = np.linalg.cond(psi)
    if not np.isfinite(cond) or cond > PSI_COND_LIMIT:
        raise EstimationError(f"pilot covariance nearly singular (cond={cond:.3g})")


def dump_realization_csv(h):
    """Debug dump of one realization: l,k then interleaved re/im per antenna."""
    L, K, N = h.shape
    buf = io.StringIO()
    header = ",".join(f"re{n},im{n}" for n in range(N))
    buf.write(f"l,k,{header}\n")
    for l in range(L):
        for k in range(K):
            vals = ",".join(f"{h[l, k, n].real!r},{h[l, k, n].imag!r}" for n in range(N))
            buf.write(f"{l},{k},{vals}\n")
    return buf.getvalue()
