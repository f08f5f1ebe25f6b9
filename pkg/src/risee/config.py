"""System parameters and unit conversions."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace


def db_to_lin(x_db):
    return 10.0 ** (x_db / 10.0)


def dbm_to_w(x_dbm):
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


def dbw_to_w(x_dbw):
    return 10.0 ** (x_dbw / 10.0)


def w_to_dbm(x_w):
    return 10.0 * math.log10(x_w) + 30.0


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SystemConfig:
    """Scalar parameters of one RIS-aided massive MIMO scenario.

    Powers are stored in watts. Use :meth:`defaults` to build a config from
    the usual dB-valued parameter set.
    """

    K: int = 10
    N: int = 100
    M_max: int = 256
    P_TX: float = dbm_to_w(30.0)
    sigma2: float = dbm_to_w(-95.0)
    K1: float = 3.5
    R_min: float = 1.0
    rho: float = 1.2
    P_FIX: float = dbw_to_w(9.0)
    P_BS: float = 1.0
    P_RIS: float = dbm_to_w(10.0)
    spacing_ratio: float = 0.5

    # geometry
    bs_pos: tuple[float, float] = (0.0, 0.0)
    ris_pos: tuple[float, float] = (100.0, 0.0)
    ue_center: tuple[float, float] = (100.0, 50.0)
    ue_radius: float = 15.0

    # phase optimizer (analytic | sfp | gradient)
    method: str = "analytic"
    eps_phase: float = 1e-6
    eps_fp: float = 1e-3
    max_iter_inner: int = 200
    max_iter_mid: int = 50
    max_iter_outer: int = 50

    # power / antenna optimizer
    eps_outer: float = 1e-4
    max_iter_alg2: int = 3000
    max_iter_alg3: int = 30
    mu_step: float = 0.1
    vartheta_step: float = 0.1

    seed: int = 0

    def __post_init__(self):
        self.validate()

    @property
    def ris_side(self) -> int:
        return math.isqrt(self.N)

    def validate(self) -> None:
        if self.K < 1:
            raise ConfigError(f"K must be >= 1, got {self.K}")
        if self.N < 1 or math.isqrt(self.N) ** 2 != self.N:
            raise ConfigError(f"N must be a perfect square, got {self.N}")
        if self.M_max <= self.K:
            raise ConfigError(f"M_max must exceed K ({self.M_max} <= {self.K})")
        for name in ("P_TX", "sigma2", "P_FIX", "P_BS", "P_RIS"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.K1 < 0:
            raise ConfigError("K1 must be non-negative")
        if self.rho < 1:
            raise ConfigError("rho must be >= 1")
        if self.ue_radius < 0:
            raise ConfigError("ue_radius must be non-negative")
        if self.method not in ("analytic", "sfp", "gradient"):
            raise ConfigError(f"unknown method {self.method!r}")

    @classmethod
    def from_units(
        cls,
        p_tx_dbm: float = 30.0,
        sigma2_dbm: float = -95.0,
        p_fix_dbw: float = 9.0,
        p_bs_w: float = 1.0,
        p_ris_dbm: float = 10.0,
        **kwargs,
    ) -> "SystemConfig":
        return cls(
            P_TX=dbm_to_w(p_tx_dbm),
            sigma2=dbm_to_w(sigma2_dbm),
            P_FIX=dbw_to_w(p_fix_dbw),
            P_BS=p_bs_w,
            P_RIS=dbm_to_w(p_ris_dbm),
            **kwargs,
        )

    def with_p_tx_dbm(self, p_tx_dbm: float) -> "SystemConfig":
        return replace(self, P_TX=dbm_to_w(p_tx_dbm))

    def replace(self, **changes) -> "SystemConfig":
        return replace(self, **changes)


# config-file keys -> how to turn them into SystemConfig fields
_REQUIRED_KEYS = (
    "p_tx_dbm", "sigma2_dbm", "k_users", "n_ris", "m_max", "r_min", "rho",
    "p_fix_dbw", "p_bs_w", "p_ris_dbm", "k1", "t_realizations", "s_setups",
    "seed", "method", "strategy",
)
_OPTIONAL_KEYS = {
    "spacing_ratio": float, "ue_radius": float,
    "eps_phase": float, "eps_fp": float, "eps_outer": float,
    "max_iter_inner": int, "max_iter_mid": int, "max_iter_outer": int,
    "max_iter_alg2": int, "max_iter_alg3": int,
    "mu_step": float, "vartheta_step": float,
    "p_tx_dbm_sweep": "floats", "k1_sweep": "floats",
}
_INT_KEYS = {"k_users", "n_ris", "m_max", "t_realizations", "s_setups", "seed"}
_STR_KEYS = {"method", "strategy"}
_STRATEGY_NAMES = ("p_only", "p_v", "p_M", "p_v_M", "random_all", "all")


class ConfigFileError(ConfigError):
    def __init__(self, path, line, message):
        where = f"{path}:{line}" if line else str(path)
        super().__init__(f"{where}: {message}")
        self.path, self.line = path, line


@dataclass(frozen=True)
class RunSettings:
    config: SystemConfig
    T: int
    S: int
    strategy: str
    p_tx_dbm: float
    p_tx_dbm_sweep: tuple = (20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0)
    k1_sweep: tuple = (0.0, 3.5, 100.0)


def parse_config_text(text: str, path: str = "<config>") -> RunSettings:
    """Parse a flat ``key = value`` file (``#`` comments) into run settings."""
    values, lines = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigFileError(path, lineno, f"expected 'key = value', got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _REQUIRED_KEYS and key not in _OPTIONAL_KEYS:
            raise ConfigFileError(path, lineno, f"unknown key {key!r}")
        if key in values:
            raise ConfigFileError(path, lineno, f"duplicate key {key!r} (first on line {lines[key]})")
        values[key], lines[key] = val, lineno

    for key in _REQUIRED_KEYS:
        if key not in values:
            raise ConfigFileError(path, None, f"missing config key {key!r}")

    def conv(key, kind):
        val = values[key]
        try:
            if kind == "floats":
                return tuple(float(x) for x in val.replace(",", " ").split())
            if kind in (int, float):
                return kind(val)
            return val
        except ValueError:
            raise ConfigFileError(path, lines[key], f"invalid value for {key!r}: {val!r}") from None

    typed = {}
    for key in values:
        if key in _INT_KEYS:
            typed[key] = conv(key, int)
        elif key in _STR_KEYS:
            typed[key] = conv(key, str)
        elif key in _OPTIONAL_KEYS:
            typed[key] = conv(key, _OPTIONAL_KEYS[key])
        else:
            typed[key] = conv(key, float)

    n = typed["n_ris"]
    if n < 1 or math.isqrt(n) ** 2 != n:
        raise ConfigFileError(path, lines["n_ris"], f"n_ris must be a perfect square, got {n}")
    if typed["m_max"] <= typed["k_users"]:
        raise ConfigFileError(path, lines["m_max"], "m_max must exceed k_users")
    if typed["method"] not in ("analytic", "sfp", "gradient"):
        raise ConfigFileError(path, lines["method"], f"unknown method {typed['method']!r}")

    extra = {k: typed[k] for k in _OPTIONAL_KEYS if k in typed and _OPTIONAL_KEYS[k] != "floats"}
    try:
        cfg = SystemConfig.from_units(
            p_tx_dbm=typed["p_tx_dbm"], sigma2_dbm=typed["sigma2_dbm"], p_fix_dbw=typed["p_fix_dbw"],
            p_bs_w=typed["p_bs_w"], p_ris_dbm=typed["p_ris_dbm"],
            K=typed["k_users"], N=typed["n_ris"], M_max=typed["m_max"], K1=typed["k1"],
            R_min=typed["r_min"], rho=typed["rho"], seed=typed["seed"], method=typed["method"], **extra,
        )
    except ConfigError as exc:
        raise ConfigFileError(path, None, str(exc)) from None
    if typed["strategy"] not in _STRATEGY_NAMES:
        raise ConfigFileError(path, lines["strategy"], f"unknown strategy {typed['strategy']!r}")
    for key in ("t_realizations", "s_setups"):
        if typed[key] < 1:
            raise ConfigFileError(path, lines[key], f"{key} must be >= 1")

    settings = dict(
        config=cfg, T=typed["t_realizations"], S=typed["s_setups"],
        strategy=typed["strategy"], p_tx_dbm=typed["p_tx_dbm"],
    )
    for key in ("p_tx_dbm_sweep", "k1_sweep"):
        if key in typed:
            settings[key] = typed[key]
    return RunSettings(**settings)


def load_config(path) -> RunSettings:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read(), str(path))
