"""Monte-Carlo sweep engine: drops -> channels -> precoders -> rates -> power -> EE.

Each sweep point averages the total rate over n_drops independent channel
drops, prices the power model at that mean rate, and records energy
efficiency as rate/power. Randomness is keyed by (master_seed, drop,
attempt, purpose) only -- deliberately not by the swept point -- so points
share common random numbers and rerunning any subset reproduces the same
bytes. Drops may run on a thread pool (GSMHP_THREADS caps it); aggregation
is in drop order, so the CSV is identical at any thread count.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager, nullcontext
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    from threadpoolctl import threadpool_limits
except ImportError:  # pragma: no cover
    threadpool_limits = None

from .capacity import conditional_covariance, spectral_efficiency_user, total_capacity, gsm_rate
from .channel import PURPOSE_CHANNEL, PURPOSE_USERS, draw_channel, draw_user_drop, substream
from .codebook import build_codebook
from .params import (
    FDP,
    GAIN_MODEL_ACTIVE,
    GAIN_MODEL_GROUPED,
    GAIN_MODELS,
    GSM_HP,
    MODE_EQUAL_GAIN,
    MODE_IDEALIZED_ZF,
    MODES,
    SCHEMES,
    SOLVES_OPTIONS,
    SOLVES_PER_BLOCK,
    ChannelParams,
    FeasibilityError,
    RadioParams,
    SystemGeometry,
    validate_geometry,
)
from .power import PowerBreakdown, total_power
from .precoding import (
    SINGULARITY_RTOL,
    SingularChannelError,
    active_set_precoders,
    build_precoders,
    fdp_precoder,
    rf_stage,
)

log = logging.getLogger(__name__)

THREADS_ENV = "GSMHP_THREADS"
_MAX_DROP_REDRAWS = 50

SWEEP_USERS = "users"
SWEEP_RF_CHAINS = "rf_chains"
SWEEP_ANTENNAS_PER_GROUP = "antennas_per_group"
SWEEP_COMP_VS_USERS = "computation_power_vs_users"
SWEEP_CUSTOM = "custom"
SWEEP_KINDS = (SWEEP_USERS, SWEEP_RF_CHAINS, SWEEP_ANTENNAS_PER_GROUP,
               SWEEP_COMP_VS_USERS, SWEEP_CUSTOM)

SWEPT_PARAMS = ("users", "nrf", "nk", "nm")

ENGINE_FAST = "fast"
ENGINE_REFERENCE = "reference"
ENGINES = (ENGINE_FAST, ENGINE_REFERENCE)

CSV_COLUMNS = (
    "sweep_kind", "swept_value", "scheme", "n_drops", "r_total_bps",
    "ee_bit_per_joule", "p_pa_w", "p_rf_w", "p_switch_w", "p_transmission_w",
    "p_ce_w", "p_cd_w", "p_bb_w", "p_lp_c_w", "p_computation_w", "p_fix_w",
    "p_total_w", "singular_redraws",
)
CSV_HEADER = ",".join(CSV_COLUMNS)


class ExcessiveSingularityError(RuntimeError):
    """More than 0.1% of channel draws were singular; results would be biased."""


@dataclass(frozen=True)
class SweepRecord:
    """One CSV row: a (swept value, scheme) evaluation."""

    sweep_kind: str
    swept_value: float
    scheme: str
    n_drops: int
    r_total_bps: float
    ee_bit_per_joule: float
    power: PowerBreakdown
    singular_redraws: int
    rate_stderr_bps: float = 0.0   # diagnostic only; not part of the CSV schema

    def to_flat_dict(self) -> dict:
        out = {
            "sweep_kind": self.sweep_kind,
            "swept_value": self.swept_value,
            "scheme": self.scheme,
            "n_drops": self.n_drops,
            "r_total_bps": self.r_total_bps,
            "ee_bit_per_joule": self.ee_bit_per_joule,
            "singular_redraws": self.singular_redraws,
            "rate_stderr_bps": self.rate_stderr_bps,
        }
        for name in ("p_pa_w", "p_rf_w", "p_switch_w", "p_transmission_w",
                     "p_ce_w", "p_cd_w", "p_bb_w", "p_lp_c_w",
                     "p_computation_w", "p_fix_w", "p_total_w"):
            out[name] = getattr(self.power, name)
        return out

    @classmethod
    def from_flat_dict(cls, d: dict) -> "SweepRecord":
        power = PowerBreakdown(**{name: float(d[name]) for name in (
            "p_pa_w", "p_rf_w", "p_switch_w", "p_transmission_w", "p_ce_w",
            "p_cd_w", "p_bb_w", "p_lp_c_w", "p_computation_w", "p_fix_w",
            "p_total_w")})
        return cls(
            sweep_kind=str(d["sweep_kind"]),
            swept_value=float(d["swept_value"]),
            scheme=str(d["scheme"]),
            n_drops=int(d["n_drops"]),
            r_total_bps=float(d["r_total_bps"]),
            ee_bit_per_joule=float(d["ee_bit_per_joule"]),
            power=power,
            singular_redraws=int(d["singular_redraws"]),
            rate_stderr_bps=float(d.get("rate_stderr_bps", 0.0)),
        )


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep, over which values, around which fixed geometry."""

    sweep_kind: str
    swept_values: tuple
    n_m: int = 16
    n_k: int = 8
    n_rf: int = 14
    k_users: int = 8
    schemes: tuple = (GSM_HP, FDP)
    n_drops: int = 200
    master_seed: int = 1
    mode: str = MODE_IDEALIZED_ZF
    gain_model: str = GAIN_MODEL_ACTIVE
    precoder_solves: str = SOLVES_PER_BLOCK
    engine: str = ENGINE_FAST
    swept_param: str | None = None   # only for sweep_kind == "custom"

    def __post_init__(self):
        if self.sweep_kind not in SWEEP_KINDS:
            raise FeasibilityError(f"sweep_kind must be one of {SWEEP_KINDS}")
        values = tuple(self.swept_values)
        if not values:
            raise FeasibilityError("swept_values must be nonempty")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise FeasibilityError("swept_values must be strictly increasing")
        if self.n_drops < 1:
            raise FeasibilityError("n_drops must be >= 1")
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad or not self.schemes:
            raise FeasibilityError(f"schemes must be a nonempty subset of {SCHEMES}")
        if self.mode not in MODES:
            raise FeasibilityError(f"mode must be one of {MODES}")
        if self.gain_model not in GAIN_MODELS:
            raise FeasibilityError(f"gain_model must be one of {GAIN_MODELS}")
        if self.precoder_solves not in SOLVES_OPTIONS:
            raise FeasibilityError(f"precoder_solves must be one of {SOLVES_OPTIONS}")
        if self.engine not in ENGINES:
            raise FeasibilityError(f"engine must be one of {ENGINES}")
        if self.sweep_kind == SWEEP_CUSTOM and self.swept_param not in SWEPT_PARAMS:
            raise FeasibilityError(
                f"custom sweeps need swept_param in {SWEPT_PARAMS}")


def default_sweep(kind: str, **overrides) -> SweepSpec:
    """The built-in sweep presets (all fields overridable)."""
    presets = {
        SWEEP_USERS: dict(swept_values=tuple(range(2, 13))),
        SWEEP_RF_CHAINS: dict(swept_values=tuple(range(8, 16))),
        SWEEP_ANTENNAS_PER_GROUP: dict(swept_values=(2, 4, 8, 16)),
        SWEEP_COMP_VS_USERS: dict(swept_values=tuple(range(2, 11))),
    }
    if kind not in presets:
        raise FeasibilityError(f"no preset for sweep kind {kind!r}")
    kw = presets[kind]
    kw.update(overrides)
    return SweepSpec(sweep_kind=kind, **kw)


# CLI figure presets map onto sweep kinds.
FIGURE_SWEEPS = {
    "fig2": SWEEP_USERS,
    "fig3": SWEEP_RF_CHAINS,
    "fig4": SWEEP_ANTENNAS_PER_GROUP,
    "fig5": SWEEP_COMP_VS_USERS,
}


def _as_count(value, what: str) -> int:
    iv = int(value)
    if iv != value or iv < 1:
        raise FeasibilityError(f"{what} must be a positive integer (got {value!r})")
    return iv


def geometry_for(spec: SweepSpec, swept_value) -> SystemGeometry:
    """The geometry at one swept point (antenna total tracks n_m * n_k)."""
    n_m, n_k, n_rf, n_s = spec.n_m, spec.n_k, spec.n_rf, spec.k_users
    kind = spec.sweep_kind
    param = spec.swept_param if kind == SWEEP_CUSTOM else {
        SWEEP_USERS: "users",
        SWEEP_COMP_VS_USERS: "users",
        SWEEP_RF_CHAINS: "nrf",
        SWEEP_ANTENNAS_PER_GROUP: "nk",
    }[kind]
    value = _as_count(swept_value, f"swept {param}")
    if param == "users":
        n_s = value
    elif param == "nrf":
        n_rf = value
    elif param == "nk":
        n_k = value
    elif param == "nm":
        n_m = value
    return SystemGeometry.make(n_m=n_m, n_k=n_k, n_rf=n_rf, n_s=n_s)


def scheme_feasibility(geom: SystemGeometry, scheme: str) -> list[str]:
    """Constraint violations for running `scheme` on `geom` (empty = feasible)."""
    if scheme == GSM_HP:
        return validate_geometry(geom)
    # FDP ignores the grouping/RF-chain structure; it only needs a consistent
    # array and enough antennas for zero-forcing.
    problems = [v for v in validate_geometry(geom)
                if "n_rf" not in v and "n_s <= " not in v]
    if geom.n_s > geom.n_t:
        problems.append(f"n_s <= n_t violated ({geom.n_s} > {geom.n_t})")
    return problems


@contextmanager
def _blas_single_threaded():
    # Keeps reductions inside BLAS identical regardless of GSMHP_THREADS and
    # avoids oversubscription; the per-drop matrices are small anyway.
    if threadpool_limits is None:  # pragma: no cover
        with nullcontext():
            yield
    else:
        with threadpool_limits(limits=1):
            yield


def _resolve_threads(threads: int | None) -> int:
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        if env:
            threads = int(env)
        else:
            threads = min(4, os.cpu_count() or 1)
    return max(1, threads)


def _trace_inverse(gram: np.ndarray) -> np.ndarray:
    """tr(G^-1) for a (..., K, K) Hermitian stack, with singularity checks."""
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise SingularChannelError(f"Gram stack not positive definite: {exc}") from exc
    pivots = np.diagonal(chol, axis1=-2, axis2=-1).real ** 2
    fro2 = np.trace(gram, axis1=-2, axis2=-1).real
    bad = pivots.min(axis=-1) <= SINGULARITY_RTOL * fro2
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise SingularChannelError("Gram pivot below singularity threshold",
                                   scheme_index=idx)
    inv = np.linalg.inv(gram)
    return np.trace(inv, axis1=-2, axis2=-1).real


def _fast_total_rate(channel, geom: SystemGeometry, radio: RadioParams,
                     scheme: str, mode: str, gain_model: str,
                     onehot: np.ndarray | None) -> float:
    """Vectorized rate for one drop; equals the reference path to roundoff.

    With uniform power scaling, zero-forcing gives every user the same
    diagonal gain P_max / (c * tr(Gram^-1)) per scheme, so the per-scheme
    Gram traces are all the capacity model needs.
    """
    sigma2 = radio.noise_variance_w
    k = geom.n_s
    ht = channel.h_matrix
    if scheme == FDP:
        gram = ht @ ht.conj().T
        trace_inv = _trace_inverse(gram[None, :, :])
        gains = radio.p_max_w / trace_inv
    else:
        if mode == MODE_EQUAL_GAIN:
            ht = ht * rf_stage(mode, channel, geom).phases[None, :]
        x = ht.reshape(k, geom.n_m, geom.n_k)
        if gain_model == GAIN_MODEL_ACTIVE:
            group_outer = np.einsum("kgt,jgt->gkj", x, x.conj())
            combine_scale = 1.0
        else:
            cols = x.sum(axis=2)
            group_outer = np.einsum("kg,jg->gkj", cols, cols.conj())
            combine_scale = float(geom.n_k)
        gram = (onehot @ group_outer.reshape(geom.n_m, k * k)).reshape(-1, k, k)
        gains = radio.p_max_w / (combine_scale * _trace_inverse(gram))
    covariances = conditional_covariance(gains, sigma2)
    rate_per_user = spectral_efficiency_user(np.atleast_1d(covariances), sigma2)
    return total_capacity([rate_per_user] * k, radio.bandwidth_hz)


def _reference_total_rate(channel, geom, radio, scheme, mode, gain_model, book) -> float:
    if scheme == FDP:
        precoders = fdp_precoder(channel, geom, radio)
    elif gain_model == GAIN_MODEL_ACTIVE:
        precoders = active_set_precoders(channel, book, geom, radio)
    else:
        precoders = build_precoders(channel, book,
                                    rf_stage(mode, channel, geom), geom, radio)
    return gsm_rate(precoders, radio).total_bps


def _drop_rate(geom, radio, chan_params, scheme, spec_state, seed, drop_index,
               channel_factory) -> tuple[float, int]:
    """Rate for one drop, redrawing singular realizations on fresh substreams."""
    mode, gain_model, engine, onehot, book = spec_state
    redraws = 0
    attempt = 0
    while True:
        rng_users = substream(seed, drop_index, attempt, PURPOSE_USERS)
        drop = draw_user_drop(geom.n_s, chan_params, rng_users)
        rng_chan = substream(seed, drop_index, attempt, PURPOSE_CHANNEL)
        channel = channel_factory(drop, geom, chan_params, rng_chan)
        try:
            if engine == ENGINE_FAST:
                rate = _fast_total_rate(channel, geom, radio, scheme, mode,
                                        gain_model, onehot)
            else:
                rate = _reference_total_rate(channel, geom, radio, scheme,
                                             mode, gain_model, book)
            return rate, redraws
        except SingularChannelError as exc:
            redraws += 1
            attempt += 1
            if redraws > _MAX_DROP_REDRAWS:
                raise ExcessiveSingularityError(
                    f"drop {drop_index} stayed singular after "
                    f"{_MAX_DROP_REDRAWS} redraws: {exc}") from exc


def evaluate_point(
    geom: SystemGeometry,
    radio: RadioParams,
    chan_params: ChannelParams,
    scheme: str,
    n_drops: int,
    seed: int,
    *,
    mode: str = MODE_IDEALIZED_ZF,
    gain_model: str = GAIN_MODEL_ACTIVE,
    precoder_solves: str = SOLVES_PER_BLOCK,
    engine: str = ENGINE_FAST,
    threads: int | None = None,
    channel_factory=None,
    sweep_kind: str = SWEEP_CUSTOM,
    swept_value: float | None = None,
) -> SweepRecord:
    """Monte-Carlo evaluate one (geometry, scheme) point.

    Averages the total rate over n_drops drops, prices the power model at the
    mean rate, and reports energy efficiency = mean rate / total power.
    channel_factory defaults to draw_channel; it exists so tests can inject
    deterministic channels.
    """
    if scheme not in SCHEMES:
        raise FeasibilityError(f"scheme must be one of {SCHEMES}")
    problems = scheme_feasibility(geom, scheme)
    if problems:
        raise FeasibilityError("; ".join(problems))
    if n_drops < 1:
        raise FeasibilityError("n_drops must be >= 1")

    onehot = None
    book = None
    if scheme == GSM_HP:
        book = build_codebook(geom)
        if engine == ENGINE_FAST:
            onehot = book.activation_onehot()
    spec_state = (mode, gain_model, engine, onehot, book)
    factory = channel_factory or draw_channel

    rates: list = [None] * n_drops
    redraw_counts: list = [0] * n_drops
    threads = _resolve_threads(threads)

    def worker(d: int) -> None:
        rates[d], redraw_counts[d] = _drop_rate(
            geom, radio, chan_params, scheme, spec_state, seed, d, factory)

    with _blas_single_threaded():
        if threads == 1 or n_drops == 1:
            for d in range(n_drops):
                worker(d)
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                for future in [pool.submit(worker, d) for d in range(n_drops)]:
                    future.result()

    total_redraws = sum(redraw_counts)
    if total_redraws > 1e-3 * n_drops:
        raise ExcessiveSingularityError(
            f"{total_redraws} singular redraws out of {n_drops} drops "
            f"(> 0.1%); check the configuration")

    mean_rate = math.fsum(rates) / n_drops
    if n_drops > 1:
        var = math.fsum((r - mean_rate) ** 2 for r in rates) / (n_drops - 1)
        stderr = math.sqrt(var / n_drops)
    else:
        stderr = 0.0
    power = total_power(radio, geom, scheme, mean_rate, geom.n_s,
                        solves=precoder_solves)
    return SweepRecord(
        sweep_kind=sweep_kind,
        swept_value=float(geom.n_s if swept_value is None else swept_value),
        scheme=scheme,
        n_drops=n_drops,
        r_total_bps=mean_rate,
        ee_bit_per_joule=mean_rate / power.p_total_w,
        power=power,
        singular_redraws=total_redraws,
        rate_stderr_bps=stderr,
    )


def run_sweep(
    spec: SweepSpec,
    radio: RadioParams,
    chan_params: ChannelParams,
    *,
    threads: int | None = None,
    channel_factory=None,
    on_skip=None,
) -> list[SweepRecord]:
    """Evaluate every (swept value, scheme) pair of a sweep.

    Infeasible points are reported (log + on_skip callback) and skipped; the
    sweep continues over the remaining points.
    """
    records = []
    for value in spec.swept_values:
        for scheme in spec.schemes:
            try:
                geom = geometry_for(spec, value)
                problems = scheme_feasibility(geom, scheme)
                if problems:
                    raise FeasibilityError("; ".join(problems))
            except FeasibilityError as exc:
                log.warning("skipping %s=%s for %s: %s",
                            spec.sweep_kind, value, scheme, exc)
                if on_skip is not None:
                    on_skip(value, scheme, str(exc))
                continue
            records.append(evaluate_point(
                geom, radio, chan_params, scheme, spec.n_drops,
                spec.master_seed,
                mode=spec.mode, gain_model=spec.gain_model,
                precoder_solves=spec.precoder_solves, engine=spec.engine,
                threads=threads, channel_factory=channel_factory,
                sweep_kind=spec.sweep_kind, swept_value=float(value),
            ))
    return records


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def record_to_row(record: SweepRecord) -> str:
    d = record.to_flat_dict()
    cells = []
    for name in CSV_COLUMNS:
        value = d[name]
        if name in ("sweep_kind", "scheme"):
            cells.append(str(value))
        elif name in ("n_drops", "singular_redraws"):
            cells.append(str(int(value)))
        else:
            cells.append(_fmt(value))
    return ",".join(cells)


def write_csv(records, path: str | Path) -> None:
    """Write sweep records with the fixed column schema, 9 significant digits."""
    records = list(records)
    if not records:
        raise ValueError("no records to write")
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(CSV_HEADER + "\n")
            for record in records:
                fh.write(record_to_row(record) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write sweep CSV to {path}: {exc}") from exc
