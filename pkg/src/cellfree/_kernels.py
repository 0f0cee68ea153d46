"""Per-trial Monte-Carlo kernels, in numba and pure-numpy flavors.

The backend is picked by the CELLFREE_BACKEND environment variable
("numba" or "numpy"); default is numba when importable. Both flavors
consume identical random draws and accumulate the same sums, so results
agree up to floating-point reassociation.

Accumulator layout (per setup, summed over trials in trial order):
  sum_g[l, k, i]   = sum over trials of v_kl^H h_il   (serving (l,k) only)
  sum_g2[l, k, i]  = sum of |v_kl^H h_il|^2
  sum_vn[l, k]     = sum of ||v_kl||^2
"""

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an install-time dependency
    HAVE_NUMBA = False

BACKEND_ENV = "CELLFREE_BACKEND"


def active_backend():
    """Resolve the kernel backend from the environment (checked per call)."""
    choice = os.environ.get(BACKEND_ENV, "").strip().lower()
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("CELLFREE_BACKEND=numba but numba is not importable")
        return "numba"
    if choice:
        raise RuntimeError(f"unknown {BACKEND_ENV} value {choice!r}")
    return "numba" if HAVE_NUMBA else "numpy"


def accumulate_trial(
    sqrt_corr, w, pilot_noise, pilot_of, serve, proj, gram_base, eta,
    sqrt_energy, use_pmmse, sum_g, sum_g2, sum_vn, backend=None,
):
    """Process one coherence block and add its moment contributions in place.

    sqrt_corr: (L, K, N, N); w: (L, K, N) unit complex Gaussian draws;
    pilot_noise: (L, tau_p, N) noise already scaled by sqrt(sigma2);
    proj: MMSE projections (zero off serving links); gram_base: (L, N, N)
    sigma2*I + sum_served eta_i C_il, used by the partial-MMSE combiner.
    """
    if backend is None:
        backend = active_backend()
    args = (
        sqrt_corr, w, pilot_noise, pilot_of, serve, proj, gram_base, eta,
        sqrt_energy, use_pmmse, sum_g, sum_g2, sum_vn,
    )
    if backend == "numba":
        _trial_numba(*args)
    else:
        _trial_numpy(*args)


def _trial_numpy(
    sqrt_corr, w, pilot_noise, pilot_of, serve, proj, gram_base, eta,
    sqrt_energy, use_pmmse, sum_g, sum_g2, sum_vn,
):
    L, K, N = w.shape
    tau_p = pilot_noise.shape[1]
    h = np.einsum("lkmn,lkn->lkm", sqrt_corr, w)
    onehot = np.zeros((K, tau_p))
    onehot[np.arange(K), pilot_of] = 1.0
    z = sqrt_energy * np.einsum("lkn,kt->ltn", h, onehot) + pilot_noise
    hhat = np.einsum("lkmn,lkn->lkm", proj, z[:, pilot_of, :])
    if use_pmmse:
        wgt = serve * eta[None, :]
        gram = gram_base + np.einsum("lk,lkm,lkn->lmn", wgt, hhat, hhat.conj())
        v = np.linalg.solve(gram, hhat.transpose(0, 2, 1)).transpose(0, 2, 1)
        v = v * (serve * eta[None, :])[:, :, None]
    else:
        v = hhat
    g = np.einsum("lkn,lin->lki", v.conj(), h)
    sum_g += g
    sum_g2 += g.real**2 + g.imag**2
    sum_vn += np.einsum("lkn,lkn->lk", v.conj(), v).real


def _trial_python(
    sqrt_corr, w, pilot_noise, pilot_of, serve, proj, gram_base, eta,
    sqrt_energy, use_pmmse, sum_g, sum_g2, sum_vn,
):
    L, K, N = w.shape
    tau_p = pilot_noise.shape[1]
    h = np.empty((K, N), np.complex128)
    z = np.empty((tau_p, N), np.complex128)
    hhat = np.zeros((K, N), np.complex128)
    for l in range(L):
        for k in range(K):
            for m in range(N):
                acc = 0.0 + 0.0j
                for n in range(N):
                    acc += sqrt_corr[l, k, m, n] * w[l, k, n]
                h[k, m] = acc
        for t in range(tau_p):
            for m in range(N):
                z[t, m] = pilot_noise[l, t, m]
        for i in range(K):
            t = pilot_of[i]
            for m in range(N):
                z[t, m] += sqrt_energy * h[i, m]
        n_served = 0
        for k in range(K):
            if serve[l, k]:
                t = pilot_of[k]
                n_served += 1
                for m in range(N):
                    acc = 0.0 + 0.0j
                    for n in range(N):
                        acc += proj[l, k, m, n] * z[t, n]
                    hhat[k, m] = acc
            else:
                for m in range(N):
                    hhat[k, m] = 0.0 + 0.0j
        if use_pmmse and n_served > 0:
            gram = np.empty((N, N), np.complex128)
            for m in range(N):
                for n in range(N):
                    gram[m, n] = gram_base[l, m, n]
            for i in range(K):
                if serve[l, i]:
                    for m in range(N):
                        him = eta[i] * hhat[i, m]
                        for n in range(N):
                            gram[m, n] += him * np.conj(hhat[i, n])
            rhs = np.empty((N, n_served), np.complex128)
            cols = np.empty(n_served, np.int64)
            c = 0
            for k in range(K):
                if serve[l, k]:
                    for m in range(N):
                        rhs[m, c] = hhat[k, m]
                    cols[c] = k
                    c += 1
            sol = np.linalg.solve(gram, rhs)
            v = np.zeros((K, N), np.complex128)
            for c in range(n_served):
                k = cols[c]
                for m in range(N):
                    v[k, m] = eta[k] * sol[m, c]
        else:
            v = hhat
        for k in range(K):
            if not serve[l, k]:
                continue
            vn = 0.0
            for m in range(N):
                vn += v[k, m].real ** 2 + v[k, m].imag ** 2
            sum_vn[l, k] += vn
            for i in range(K):
                acc = 0.0 + 0.0j
                for m in range(N):
                    acc += np.conj(v[k, m]) * h[i, m]
                sum_g[l, k, i] += acc
                sum_g2[l, k, i] += acc.real**2 + acc.imag**2


if HAVE_NUMBA:
    _trial_numba = njit(cache=True, nogil=True)(_trial_python)
else:  # pragma: no cover
    _trial_numba = _trial_python
