"""Closed-form spectral efficiency of spatial modulation with M schemes.

For a single-antenna user whose received signal under scheme n has scalar
conditional covariance S_n = sigma2 + g_n (noise power plus the user's
diagonal precoding gain), the per-user spectral efficiency is

    R = log2(M / (2 sigma2))
        - (1/M) * sum_n log2( sum_t 1 / (S_n + S_t) )       [bit/s/Hz]

which degenerates to log2(1 + g/sigma2) at M = 1 and to 0 when every gain is
zero. Total capacity is the bandwidth times the sum over users.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .params import RadioParams
from .precoding import PrecoderSet


class CapacityDomainError(ValueError):
    """A conditional covariance or noise variance left the valid domain."""


@njit(cache=True)
def _inner_log2_sums(s_asc: np.ndarray) -> np.ndarray:
    """log2 of sum_t 1/(S_n + S_t) for every n, on the ascending-sorted list.

    Iterating both indices in sorted order accumulates each inner sum over
    terms of descending magnitude and makes the result exactly invariant to
    how the caller ordered the covariances.
    """
    m = s_asc.shape[0]
    out = np.empty(m)
    for i in range(m):
        acc = 0.0
        for j in range(m):
            acc += 1.0 / (s_asc[i] + s_asc[j])
        out[i] = math.log2(acc)
    return out


@dataclass(frozen=True)
class RateResult:
    per_user_bps_hz: np.ndarray   # (K,)
    total_bps: float
    sigma2_n: float


def conditional_covariance(gain, sigma2: float):
    """Scalar conditional covariance sigma2 + gain (elementwise on arrays)."""
    if sigma2 <= 0.0:
        raise CapacityDomainError(f"noise variance must be > 0 (got {sigma2!r})")
    gain = np.asarray(gain, dtype=float)
    if np.any(gain < 0.0):
        raise CapacityDomainError("gains must be nonnegative")
    out = sigma2 + gain
    return float(out) if out.ndim == 0 else out


def spectral_efficiency_user(sigmas, sigma2: float) -> float:
    """Per-user rate in bit/s/Hz from the M conditional covariances.

    The inner reciprocal sums are accumulated over terms in descending
    magnitude (ascending covariance) in double precision.
    """
    s = np.ascontiguousarray(sigmas, dtype=float)
    if s.ndim != 1 or s.size == 0:
        raise CapacityDomainError("need a nonempty 1-D covariance list")
    if sigma2 <= 0.0:
        raise CapacityDomainError(f"noise variance must be > 0 (got {sigma2!r})")
    if s.min() <= 0.0:
        bad = int(np.argmin(s))
        raise CapacityDomainError(
            f"conditional covariance for scheme {bad} is nonpositive ({s[bad]!r})")

    m = s.size
    s_asc = np.sort(s)   # reciprocal terms then run largest-to-smallest
    inner_log2 = _inner_log2_sums(s_asc)
    rate = math.log2(m / (2.0 * sigma2)) - float(np.mean(inner_log2))
    if rate < 0.0:
        # each inner term is <= 1/(2 sigma2), so mathematically rate >= 0;
        # anything beyond roundoff indicates corrupted inputs
        if rate < -1e-9:
            raise CapacityDomainError(f"rate fell below zero ({rate!r})")
        rate = 0.0
    return rate


def total_capacity(per_user, bandwidth_hz: float) -> float:
    """Total rate in bit/s: bandwidth times the (exactly accumulated) user sum."""
    rates = [float(r) for r in per_user]
    if any(r < 0.0 for r in rates):
        raise CapacityDomainError("per-user rates must be nonnegative")
    return bandwidth_hz * math.fsum(rates)


def gsm_rate(
    precoders: PrecoderSet,
    radio: RadioParams,
    codebook=None,
) -> RateResult:
    """Rates for one channel realization from its per-scheme precoder gains."""
    gains = precoders.gains()          # (M, K)
    if codebook is not None and gains.shape[0] != codebook.m_count:
        raise ValueError(
            f"precoder set covers {gains.shape[0]} schemes, codebook has {codebook.m_count}")
    sigma2 = radio.noise_variance_w
    k_users = gains.shape[1]
    per_user = np.empty(k_users)
    for k in range(k_users):
        try:
            per_user[k] = spectral_efficiency_user(
                conditional_covariance(gains[:, k], sigma2), sigma2)
        except CapacityDomainError as exc:
            raise CapacityDomainError(f"user {k}: {exc}") from exc
    return RateResult(
        per_user_bps_hz=per_user,
        total_bps=total_capacity(per_user, radio.bandwidth_hz),
        sigma2_n=sigma2,
    )
