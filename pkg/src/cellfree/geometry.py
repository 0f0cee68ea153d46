"""Random network geometry and per-link spatial correlation matrices.

APs and UEs are dropped uniformly in a square served with a wrap-around
(torus) distance metric. Each AP-UE link gets an N x N Hermitian PSD
correlation matrix: large-scale gain (log-distance pathloss at the 3-D
distance including the AP height, times lognormal shadowing) multiplied by
a Gaussian local-scattering correlation for a half-wavelength ULA.
"""

import io
from dataclasses import dataclass, field

import numpy as np

from . import rng as rngmod

AP_HEIGHT_M = 10.0          # vertical AP-UE separation used in the 3-D distance
MIN_HORIZONTAL_DIST_M = 1.0  # clamp to avoid a singular pathloss at distance 0


@dataclass
class NetworkSetup:
    """One random drop: positions plus all L*K correlation matrices."""

    ap_positions: np.ndarray   # (L, 2) [m]
    ue_positions: np.ndarray   # (K, 2) [m]
    corr: np.ndarray           # (L, K, N, N) complex, Hermitian PSD
    setup_index: int = 0
    _sqrt_corr: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def L(self):
        return self.ap_positions.shape[0]

    @property
    def K(self):
        return self.ue_positions.shape[0]

    @property
    def N(self):
        return self.corr.shape[2]

    @property
    def beta(self):
        """Large-scale fading coefficients trace(R)/N, shape (L, K)."""
        return np.trace(self.corr, axis1=2, axis2=3).real / self.N

    @property
    def sqrt_corr(self):
        """Hermitian square roots of every correlation matrix (cached).

        Computed by eigendecomposition with negative eigenvalues clipped to
        zero, which tolerates tiny numerical indefiniteness.
        """
        if self._sqrt_corr is None:
            w, v = np.linalg.eigh(self.corr)
            w = np.clip(w, 0.0, None)
            self._sqrt_corr = np.einsum(
                "lkmi,lki,lkni->lkmn", v, np.sqrt(w), v.conj()
            )
        return self._sqrt_corr


def wrap_distances(ap_positions, ue_positions, area_side):
    """Torus geometry for every AP-UE pair.

    Returns (d2d, phi): the minimum horizontal distance over the 9 lattice
    translates of the UE, clamped below at MIN_HORIZONTAL_DIST_M, and the
    AP-to-UE bearing at the minimizing translate. Shapes (L, K).
    """
    shifts = np.array(
        [(tx, ty) for tx in (-area_side, 0.0, area_side) for ty in (-area_side, 0.0, area_side)]
    )  # fixed enumeration order breaks ties deterministically
    # (9, K, 2) translated UE positions, diffs against (L, 1, 1, 2)
    translated = ue_positions[None, :, :] + shifts[:, None, :]
    diff = translated[None, :, :, :] - ap_positions[:, None, None, :]  # (L, 9, K, 2)
    dist = np.linalg.norm(diff, axis=-1)                               # (L, 9, K)
    best = np.argmin(dist, axis=1)                                     # (L, K)
    l_idx = np.arange(ap_positions.shape[0])[:, None]
    k_idx = np.arange(ue_positions.shape[0])[None, :]
    d2d = dist[l_idx, best, k_idx]
    best_diff = diff[l_idx, best, k_idx, :]                            # (L, K, 2)
    phi = np.arctan2(best_diff[..., 1], best_diff[..., 0])
    return np.maximum(d2d, MIN_HORIZONTAL_DIST_M), phi


def large_scale_gain(d2d, shadow_db, config):
    """Linear channel gain: log-distance pathloss at the 3-D distance plus shadowing [dB]."""
    d3d = np.sqrt(np.asarray(d2d) ** 2 + AP_HEIGHT_M**2)
    gain_db = config.pathloss_alpha - config.pathloss_beta * np.log10(d3d) + shadow_db
    return 10.0 ** (gain_db / 10.0)


def scattering_correlation(phi, asd_deg, n_antennas):
    """Gaussian local-scattering correlation for a half-wavelength ULA.

    Closed form from the first-order expansion of the array phase around the
    nominal bearing phi: entry (m, n) is
    exp(j*pi*(m-n)*sin(phi)) * exp(-(pi*(m-n)*cos(phi)*asd_rad)^2 / 2).
    Unit diagonal; Hermitian PSD by Bochner's theorem. Broadcasts over phi.
    """
    phi = np.asarray(phi, dtype=float)
    asd = np.deg2rad(asd_deg)
    delta = np.arange(n_antennas)[:, None] - np.arange(n_antennas)[None, :]
    phase = np.pi * delta * np.sin(phi)[..., None, None]
    spread = np.pi * delta * np.cos(phi)[..., None, None] * asd
    return np.exp(1j * phase) * np.exp(-0.5 * spread**2)


def correlation_matrices(ap_positions, ue_positions, shadow_db, config):
    """All (L, K, N, N) correlation matrices for given shadowing samples [dB]."""
    d2d, phi = wrap_distances(ap_positions, ue_positions, config.area_side)
    beta = large_scale_gain(d2d, shadow_db, config)
    return beta[..., None, None] * scattering_correlation(phi, config.asd_deg, config.N)


def spatial_correlation(ap_pos, ue_pos, config, shadow_db=0.0):
    """Single-link N x N correlation matrix (same model as correlation_matrices)."""
    ap = np.asarray(ap_pos, dtype=float).reshape(1, 2)
    ue = np.asarray(ue_pos, dtype=float).reshape(1, 2)
    shadow = np.full((1, 1), float(shadow_db))
    return correlation_matrices(ap, ue, shadow, config)[0, 0]


def generate_setup(config, setup_index):
    """Draw one random network: uniform AP and UE drops plus all link statistics.

    Deterministic function of (config.seed, setup_index). APs are drawn
    before UEs so AP positions do not depend on K; shadowing is independent
    per link.
    """
    rng = rngmod.substream(config.seed, rngmod.GEOMETRY, setup_index)
    ap_positions = rng.uniform(0.0, config.area_side, size=(config.L, 2))
    ue_positions = rng.uniform(0.0, config.area_side, size=(config.K, 2))
    shadow_db = rng.normal(0.0, config.shadow_std_db, size=(config.L, config.K))
    corr = correlation_matrices(ap_positions, ue_positions, shadow_db, config)
    return NetworkSetup(ap_positions, ue_positions, corr, setup_index=setup_index)


def positions_csv(setup):
    """Positions as `entity,index,x_m,y_m` CSV text."""
    buf = io.StringIO()
    buf.write("entity,index,x_m,y_m\n")
    for name, pos in (("ap", setup.ap_positions), ("ue", setup.ue_positions)):
        for i, (x, y) in enumerate(pos):
            buf.write(f"{name},{i},{x!r},{y!r}\n")
    return buf.getvalue()
