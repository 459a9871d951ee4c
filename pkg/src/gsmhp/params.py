"""System configuration, physical constants, and unit conversions.

Everything downstream of this module works in SI units (Watts, Hz, seconds,
bits); dBm and GHz appear only at the configuration boundary.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

SPEED_OF_LIGHT_M_S = 299_792_458.0

# Scheme tags used across the power model, sweeps, and the CSV schema.
GSM_HP = "gsm-hp"
FDP = "fdp"
SCHEMES = (GSM_HP, FDP)

MODE_IDEALIZED_ZF = "idealized-zf"
MODE_EQUAL_GAIN = "equal-gain"
MODES = (MODE_IDEALIZED_ZF, MODE_EQUAL_GAIN)

GAIN_MODEL_ACTIVE = "active-set"
GAIN_MODEL_GROUPED = "grouped"
GAIN_MODELS = (GAIN_MODEL_ACTIVE, GAIN_MODEL_GROUPED)

SOLVES_PER_BLOCK = "per-block"
SOLVES_ALL_SCHEMES = "all-schemes"
SOLVES_OPTIONS = (SOLVES_PER_BLOCK, SOLVES_ALL_SCHEMES)


class ConfigError(ValueError):
    """Invalid configuration value or config-file content."""


class FeasibilityError(ValueError):
    """A parameter combination violates a structural constraint."""


def dbm_to_watts(x_dbm: float) -> float:
    """Convert a power level in dBm to Watts."""
    return 10.0 ** (x_dbm / 10.0) * 1e-3


def watts_to_dbm(x_w: float) -> float:
    """Convert a power level in Watts to dBm. Requires x_w > 0."""
    if x_w <= 0.0:
        raise ValueError("power must be positive to express in dBm")
    return 10.0 * math.log10(x_w * 1e3)


def noise_variance(psd_dbm_hz: float, bandwidth_hz: float) -> float:
    """Total noise power over the band: PSD converted to W/Hz times bandwidth."""
    return dbm_to_watts(psd_dbm_hz) * bandwidth_hz


def most_square_factorization(n: int) -> tuple[int, int]:
    """Return (rows, cols) with rows*cols == n, rows >= cols, minimizing rows-cols."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    c = math.isqrt(n)
    while n % c:
        c -= 1
    return n // c, c


@dataclass(frozen=True)
class SystemGeometry:
    """Antenna/RF-chain/group counts plus the planar-array factorization.

    n_t   total transmit antennas (= n_m * n_k = rows_l * cols_r)
    n_m   antenna groups
    n_k   antennas per group
    n_rf  RF chains
    n_s   data streams = number of single-antenna users
    rows_l, cols_r  planar-array rows/columns
    """

    n_t: int
    n_m: int
    n_k: int
    n_rf: int
    n_s: int
    rows_l: int
    cols_r: int

    @classmethod
    def make(
        cls,
        n_m: int,
        n_k: int,
        n_rf: int,
        n_s: int,
        rows_l: int | None = None,
        cols_r: int | None = None,
    ) -> "SystemGeometry":
        """Build a geometry, deriving n_t and (if omitted) the array factorization."""
        n_t = n_m * n_k
        if rows_l is None and cols_r is None:
            rows_l, cols_r = most_square_factorization(n_t)
        elif rows_l is None or cols_r is None:
            raise ConfigError("rows_l and cols_r must be given together")
        return cls(n_t=n_t, n_m=n_m, n_k=n_k, n_rf=n_rf, n_s=n_s,
                   rows_l=rows_l, cols_r=cols_r)

    def require_valid(self) -> "SystemGeometry":
        violations = validate_geometry(self)
        if violations:
            raise FeasibilityError("; ".join(violations))
        return self


def validate_geometry(g: SystemGeometry) -> list[str]:
    """Return every violated geometry constraint (empty list means valid)."""
    violations = []
    counts = {
        "n_t": g.n_t, "n_m": g.n_m, "n_k": g.n_k,
        "n_rf": g.n_rf, "n_s": g.n_s, "rows_l": g.rows_l, "cols_r": g.cols_r,
    }
    for name, value in counts.items():
        if not isinstance(value, int) or value < 1:
            violations.append(f"{name} must be a positive integer (got {value!r})")
    if violations:
        return violations
    if g.n_t != g.n_m * g.n_k:
        violations.append(f"n_t == n_m*n_k violated ({g.n_t} != {g.n_m}*{g.n_k})")
    if g.n_t != g.rows_l * g.cols_r:
        violations.append(
            f"n_t == rows_l*cols_r violated ({g.n_t} != {g.rows_l}*{g.cols_r})")
    if g.n_s > g.n_rf:
        violations.append(f"n_s <= n_rf violated ({g.n_s} > {g.n_rf})")
    if g.n_rf >= g.n_m:
        violations.append(f"n_rf < n_m violated ({g.n_rf} >= {g.n_m})")
    return violations


@dataclass(frozen=True)
class RadioParams:
    """Transmit-power, hardware-power, and signal-band parameters (SI units)."""

    p_max_w: float = dbm_to_watts(39.0)     # total transmit power
    alpha: float = 0.38                     # amplifier efficiency
    p_rf_chain_w: float = 0.045
    p_shifter_w: float = 0.015
    p_switch_w: float = 0.005
    p_fix_w: float = 1.0
    noise_psd_dbm_hz: float = -174.0
    bandwidth_hz: float = 800e6
    coherence_bw_hz: float = 100e6
    coherence_time_s: float = 5e-3
    tau: float = 1.0                        # pilot orthogonality factor
    l_bs_flops_per_w: float = 12.8e9        # computation efficiency
    p_cod_w_per_bps: float = 1e-10          # coding efficiency

    def __post_init__(self):
        positive = {
            "p_max_w": self.p_max_w, "alpha": self.alpha,
            "p_rf_chain_w": self.p_rf_chain_w, "p_shifter_w": self.p_shifter_w,
            "p_switch_w": self.p_switch_w, "p_fix_w": self.p_fix_w,
            "coherence_bw_hz": self.coherence_bw_hz,
            "coherence_time_s": self.coherence_time_s,
            "l_bs_flops_per_w": self.l_bs_flops_per_w,
            "p_cod_w_per_bps": self.p_cod_w_per_bps,
        }
        bad = [k for k, v in positive.items() if not (v > 0.0 and math.isfinite(v))]
        if bad:
            raise ConfigError(f"must be strictly positive: {', '.join(bad)}")
        if self.alpha > 1.0:
            raise ConfigError("alpha must satisfy 0 < alpha <= 1")
        if self.tau < 1.0:
            raise ConfigError("tau must be >= 1")
        # bandwidth_hz == 0 is tolerated so degenerate flop-rate cases stay
        # computable; the capacity path rejects the resulting zero noise power.
        if self.bandwidth_hz < 0.0 or not math.isfinite(self.bandwidth_hz):
            raise ConfigError("bandwidth_hz must be >= 0")

    @property
    def noise_variance_w(self) -> float:
        return noise_variance(self.noise_psd_dbm_hz, self.bandwidth_hz)


@dataclass(frozen=True)
class ChannelParams:
    """Geometric-channel parameters: multipath count, large-scale fading, array."""

    n_ray: int = 20
    path_loss_exp: float = 4.6
    shadowing_sigma_db: float = 9.2         # std dev of 10*log10(zeta)
    user_dist_min_m: float = 20.0
    user_dist_max_m: float = 100.0
    carrier_freq_hz: float = 28e9
    element_spacing_m: float | None = None  # None -> exactly half a wavelength
    elevation_range: str = "0-2pi"          # or "0-pi"

    def __post_init__(self):
        if self.n_ray < 1:
            raise ConfigError("n_ray must be >= 1")
        if not self.user_dist_min_m > 0.0:
            raise ConfigError("user_dist_min_m must be > 0")
        if not self.user_dist_max_m > self.user_dist_min_m:
            raise ConfigError("user_dist_max_m must exceed user_dist_min_m")
        if self.carrier_freq_hz <= 0.0:
            raise ConfigError("carrier_freq_hz must be > 0")
        if self.shadowing_sigma_db < 0.0:
            raise ConfigError("shadowing_sigma_db must be >= 0")
        if self.elevation_range not in ("0-2pi", "0-pi"):
            raise ConfigError("elevation_range must be '0-2pi' or '0-pi'")
        if (self.element_spacing_m is not None
                and self.element_spacing_m != self.wavelength_m / 2.0):
            raise ConfigError("element_spacing_m must equal half the carrier wavelength")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT_M_S / self.carrier_freq_hz

    @property
    def spacing_m(self) -> float:
        return self.wavelength_m / 2.0 if self.element_spacing_m is None else self.element_spacing_m


@dataclass(frozen=True)
class SimConfig:
    """One resolved simulator configuration: geometry + radio + channel + knobs."""

    geometry: SystemGeometry
    radio: RadioParams
    channel: ChannelParams
    mode: str = MODE_IDEALIZED_ZF
    gain_model: str = GAIN_MODEL_ACTIVE
    precoder_solves: str = SOLVES_PER_BLOCK

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.gain_model not in GAIN_MODELS:
            raise ConfigError(f"gain_model must be one of {GAIN_MODELS}")
        if self.precoder_solves not in SOLVES_OPTIONS:
            raise ConfigError(f"precoder_solves must be one of {SOLVES_OPTIONS}")


def default_config() -> SimConfig:
    """The baseline configuration: 128 antennas in 16 groups of 8, 14 chains, 8 users."""
    return SimConfig(
        geometry=SystemGeometry.make(n_m=16, n_k=8, n_rf=14, n_s=8),
        radio=RadioParams(),
        channel=ChannelParams(),
    )


_GEOMETRY_KEYS = ("n_m", "n_k", "n_rf", "n_s", "n_t", "rows_l", "cols_r")
_RADIO_KEYS = tuple(f.name for f in dataclasses.fields(RadioParams))
_CHANNEL_KEYS = tuple(f.name for f in dataclasses.fields(ChannelParams))
_KNOB_KEYS = ("mode", "gain_model", "precoder_solves")


def load_config_file(path: str | Path) -> dict:
    """Parse a flat `key = value` config file (# starts a comment).

    Values are parsed as int, then float, then kept as bare strings.
    """
    out: dict = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        try:
            out[key] = int(value)
        except ValueError:
            try:
                out[key] = float(value)
            except ValueError:
                out[key] = value
    return out


def config_from_mapping(values: dict) -> SimConfig:
    """Build a SimConfig from flat key/value pairs, rejecting unknown keys."""
    values = dict(values)
    unknown = set(values) - set(_GEOMETRY_KEYS) - set(_RADIO_KEYS) \
        - set(_CHANNEL_KEYS) - set(_KNOB_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    geo_kw = {k: values.pop(k) for k in _GEOMETRY_KEYS if k in values}
    radio_kw = {k: values.pop(k) for k in _RADIO_KEYS if k in values}
    chan_kw = {k: values.pop(k) for k in _CHANNEL_KEYS if k in values}
    knobs = {k: values.pop(k) for k in _KNOB_KEYS if k in values}

    base = default_config()
    n_t_given = geo_kw.pop("n_t", None)
    geometry = SystemGeometry.make(
        n_m=geo_kw.get("n_m", base.geometry.n_m),
        n_k=geo_kw.get("n_k", base.geometry.n_k),
        n_rf=geo_kw.get("n_rf", base.geometry.n_rf),
        n_s=geo_kw.get("n_s", base.geometry.n_s),
        rows_l=geo_kw.get("rows_l"),
        cols_r=geo_kw.get("cols_r"),
    )
    if n_t_given is not None and n_t_given != geometry.n_t:
        raise ConfigError(
            f"n_t = {n_t_given} inconsistent with n_m*n_k = {geometry.n_t}")
    violations = validate_geometry(geometry)
    if violations:
        raise ConfigError("; ".join(violations))
    radio = dataclasses.replace(base.radio, **radio_kw)
    channel = dataclasses.replace(base.channel, **chan_kw)
    return SimConfig(geometry=geometry, radio=radio, channel=channel, **knobs)


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> SimConfig:
    """Resolve a configuration from an optional file plus override pairs."""
    values: dict = {}
    if path is not None:
        values.update(load_config_file(path))
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_mapping(values)
