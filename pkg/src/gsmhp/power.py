"""Base-station power model: transmission + computation + fixed power.

Transmission covers amplifiers, RF chains/phase shifters, and the spatial-
modulation switches. Computation covers channel estimation, channel coding,
baseband precoding, and the precoder solve, all as flop counts divided by
the station's flops-per-Watt efficiency. Complex multiply-accumulate counts
as 8 floating-point operations throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

from .codebook import num_spatial_schemes
from .params import (
    FDP,
    GSM_HP,
    SCHEMES,
    SOLVES_ALL_SCHEMES,
    SOLVES_OPTIONS,
    SOLVES_PER_BLOCK,
    RadioParams,
    SystemGeometry,
)


def _check_scheme(scheme: str) -> None:
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES} (got {scheme!r})")


@dataclass(frozen=True)
class FlopModel:
    """Flop counts per coherence block and the block rate."""

    gamma_ce: float          # flops per channel estimation: 2 tau N_T K^2
    gamma_bb_flops: float    # flops per baseband precoding: 8 N_RF_eff N_S
    gamma_precoding: float   # flops per precoder solution (see flop_model)
    nu_block: float          # coherence blocks per second: B / (B_c T_c)


def nu_block(radio: RadioParams) -> float:
    """Coherence blocks per second."""
    return radio.bandwidth_hz / (radio.coherence_bw_hz * radio.coherence_time_s)


def precoding_flops(geom: SystemGeometry, k_users: int, scheme: str,
                    solves: str = SOLVES_PER_BLOCK) -> float:
    """Flops for the zero-forcing solve(s) of one coherence block.

    One solve over W effective-channel columns costs 16*W*K^2 + 8*K^3
    (Gram formation + inversion + back-multiplication, complex MAC = 8).
    W is the activated antenna count n_rf*n_k (gsm-hp) or n_t (fdp).
    solves="per-block" charges a single solve per block; "all-schemes"
    charges all M spatial schemes every block.
    """
    _check_scheme(scheme)
    if solves not in SOLVES_OPTIONS:
        raise ValueError(f"solves must be one of {SOLVES_OPTIONS}")
    width = geom.n_rf * geom.n_k if scheme == GSM_HP else geom.n_t
    per_solve = 16 * width * k_users**2 + 8 * k_users**3
    if scheme == GSM_HP and solves == SOLVES_ALL_SCHEMES:
        return float(num_spatial_schemes(geom.n_m, geom.n_rf) * per_solve)
    return float(per_solve)


def flop_model(radio: RadioParams, geom: SystemGeometry, k_users: int,
               scheme: str, solves: str = SOLVES_PER_BLOCK) -> FlopModel:
    _check_scheme(scheme)
    n_rf_eff = geom.n_rf if scheme == GSM_HP else geom.n_t
    return FlopModel(
        gamma_ce=float(2 * radio.tau * geom.n_t * k_users**2),
        gamma_bb_flops=float(8 * n_rf_eff * k_users),
        gamma_precoding=precoding_flops(geom, k_users, scheme, solves),
        nu_block=nu_block(radio),
    )


@dataclass(frozen=True)
class PowerBreakdown:
    """Every additive term of the total base-station power, in Watts."""

    p_pa_w: float
    p_rf_w: float
    p_switch_w: float
    p_transmission_w: float
    p_ce_w: float
    p_cd_w: float
    p_bb_w: float
    p_lp_c_w: float
    p_computation_w: float
    p_fix_w: float
    p_total_w: float


def transmission_power(radio: RadioParams, geom: SystemGeometry,
                       scheme: str) -> tuple[float, float, float, float]:
    """(p_pa, p_rf, p_switch, p_transmission).

    Amplifier power is P_max/alpha (the transmit matrix is normalized to the
    power budget). gsm-hp drives n_rf chains with n_rf*n_k phase shifters and
    n_rf group switches; fdp needs one chain per antenna, no shifters, no
    switches.
    """
    _check_scheme(scheme)
    p_pa = radio.p_max_w / radio.alpha
    if scheme == GSM_HP:
        p_rf = geom.n_rf * radio.p_rf_chain_w + geom.n_rf * geom.n_k * radio.p_shifter_w
        p_switch = geom.n_rf * radio.p_switch_w
    else:
        p_rf = geom.n_t * radio.p_rf_chain_w
        p_switch = 0.0
    return p_pa, p_rf, p_switch, p_pa + p_rf + p_switch


def channel_estimation_power(radio: RadioParams, geom: SystemGeometry,
                             k_users: int) -> float:
    """Pilot-based estimation: 2 tau N_T K^2 flops per coherence block."""
    if k_users < 1:
        raise ValueError("k_users must be >= 1")
    return nu_block(radio) * (2.0 * radio.tau * geom.n_t * k_users**2) / radio.l_bs_flops_per_w


def coding_power(radio: RadioParams, r_total_bps: float) -> float:
    """Channel-coding power, proportional to the delivered rate."""
    if r_total_bps < 0.0:
        raise ValueError("r_total_bps must be >= 0")
    return radio.p_cod_w_per_bps * r_total_bps


def baseband_precoding_power(radio: RadioParams, n_rf_effective: int,
                             n_s: int) -> float:
    """Applying the digital precoder: 8 * chains * streams flops per sample."""
    if n_rf_effective < 1 or n_s < 1:
        raise ValueError("counts must be positive")
    return radio.bandwidth_hz * (8.0 * n_rf_effective * n_s) / radio.l_bs_flops_per_w


def precoder_solution_power(radio: RadioParams, geom: SystemGeometry,
                            k_users: int, scheme: str,
                            solves: str = SOLVES_PER_BLOCK) -> float:
    """Solving the zero-forcing precoder once per coherence block."""
    if k_users < 1:
        raise ValueError("k_users must be >= 1")
    nu = nu_block(radio)
    if nu == 0.0:
        return 0.0
    return nu * precoding_flops(geom, k_users, scheme, solves) / radio.l_bs_flops_per_w


def total_power(radio: RadioParams, geom: SystemGeometry, scheme: str,
                r_total_bps: float, k_users: int,
                solves: str = SOLVES_PER_BLOCK) -> PowerBreakdown:
    """Assemble the full breakdown; the stored sums are exact re-summations."""
    _check_scheme(scheme)
    p_pa, p_rf, p_switch, p_transmission = transmission_power(radio, geom, scheme)
    p_ce = channel_estimation_power(radio, geom, k_users)
    p_cd = coding_power(radio, r_total_bps)
    n_rf_eff = geom.n_rf if scheme == GSM_HP else geom.n_t
    p_bb = baseband_precoding_power(radio, n_rf_eff, k_users)
    p_lp_c = precoder_solution_power(radio, geom, k_users, scheme, solves)
    p_computation = p_ce + p_cd + p_bb + p_lp_c
    return PowerBreakdown(
        p_pa_w=p_pa, p_rf_w=p_rf, p_switch_w=p_switch,
        p_transmission_w=p_transmission,
        p_ce_w=p_ce, p_cd_w=p_cd, p_bb_w=p_bb, p_lp_c_w=p_lp_c,
        p_computation_w=p_computation,
        p_fix_w=radio.p_fix_w,
        p_total_w=p_transmission + p_computation + radio.p_fix_w,
    )
