"""Simulation configuration and the flat key=value config-file format."""

import dataclasses
import hashlib
from dataclasses import dataclass

from .errors import ConfigError

COMBINER_KINDS = ("MR", "partial-MMSE")
LSFD_MODES = ("level2", "level3-opt", "level3-nopt")
POWER_MODES = ("full", "maxmin")


@dataclass(frozen=True)
class SimConfig:
    """All knobs of one simulation scenario.

    Defaults reproduce the large-scale urban scenario: 100 four-antenna APs
    and 40 single-antenna UEs in a 1 km x 1 km square with wrap-around,
    100 mW pilot/data power budgets and -94 dBm noise.
    """

    L: int = 100                 # access points
    N: int = 4                   # antennas per AP
    K: int = 40                  # single-antenna UEs
    area_side: float = 1000.0    # square side [m]
    tau_c: int = 200             # channel uses per coherence block
    tau_p: int = 10              # pilot length in channel uses
    rho_p: float = 0.1           # pilot transmit power [W]
    rho_u: float = 0.1           # max uplink transmit power [W]
    sigma2: float = 10.0 ** (-12.4)  # noise power [W] (-94 dBm)
    asd_deg: float = 15.0        # angular standard deviation [deg]
    pathloss_alpha: float = -30.5  # gain at 1 m [dB]
    pathloss_beta: float = 36.7    # pathloss slope [dB/decade]
    shadow_std_db: float = 4.0   # lognormal shadowing std [dB]
    mc_trials: int = 200         # fading realizations per setup
    n_setups: int = 400          # random drops
    seed: int = 1                # RNG seed
    R_design: int = 5            # shared-AP threshold of the interference set
    combiner_kind: str = "partial-MMSE"  # MR | partial-MMSE
    lsfd_mode: str = "level3-opt"        # level2 | level3-opt | level3-nopt
    power_mode: str = "full"             # full | maxmin
    fp_tol: float = 1e-3         # fixed-point relative SINR-spread tolerance

    def __post_init__(self):
        validate_config(self)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


_INT_FIELDS = {"L", "N", "K", "tau_c", "tau_p", "mc_trials", "n_setups", "seed", "R_design"}
_STR_FIELDS = {"combiner_kind", "lsfd_mode", "power_mode"}


def validate_config(cfg):
    """Raise ConfigError on any invariant violation."""
    for name in ("L", "N", "K", "tau_c", "tau_p", "mc_trials", "n_setups"):
        if getattr(cfg, name) < 1:
            raise ConfigError(f"{name} must be >= 1, got {getattr(cfg, name)}")
    if not 0 < cfg.tau_p < cfg.tau_c:
        raise ConfigError(f"need 0 < tau_p < tau_c, got tau_p={cfg.tau_p}, tau_c={cfg.tau_c}")
    for name in ("rho_p", "rho_u", "sigma2", "area_side", "fp_tol"):
        if getattr(cfg, name) <= 0:
            raise ConfigError(f"{name} must be > 0, got {getattr(cfg, name)}")
    for name in ("asd_deg", "shadow_std_db"):
        if getattr(cfg, name) < 0:
            raise ConfigError(f"{name} must be >= 0, got {getattr(cfg, name)}")
    if cfg.R_design < 1:
        raise ConfigError(f"R_design must be >= 1, got {cfg.R_design}")
    if cfg.seed < 0:
        raise ConfigError("seed must be a non-negative integer")
    if cfg.combiner_kind not in COMBINER_KINDS:
        raise ConfigError(f"combiner_kind must be one of {COMBINER_KINDS}")
    if cfg.lsfd_mode not in LSFD_MODES:
        raise ConfigError(f"lsfd_mode must be one of {LSFD_MODES}")
    if cfg.power_mode not in POWER_MODES:
        raise ConfigError(f"power_mode must be one of {POWER_MODES}")


def load_config(path):
    """Parse a flat `key = value` file (# comments, blank lines allowed)."""
    values = {}
    field_names = {f.name for f in dataclasses.fields(SimConfig)}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in field_names:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in _STR_FIELDS:
                values[key] = value
            elif key in _INT_FIELDS:
                values[key] = int(value)
            else:
                values[key] = float(value)
    return SimConfig(**values)


def dump_config(cfg):
    """Canonical `key = value` text, field order fixed."""
    lines = []
    for f in dataclasses.fields(SimConfig):
        value = getattr(cfg, f.name)
        if isinstance(value, float):
            value = repr(value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


def save_config(cfg, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_config(cfg))


def config_digest(cfg, *extra):
    """Hex digest identifying (config, extra ints); used for cache keys."""
    h = hashlib.sha256(dump_config(cfg).encode("utf-8"))
    for item in extra:
        h.update(f"|{item}".encode("utf-8"))
    return h.hexdigest()
