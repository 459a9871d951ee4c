"""Per-scheme precoder construction and the full-digital baseline.

Two constructions are provided for the spatial-modulation schemes:

* build_precoders  -- the sub-connected structure taken literally: the
  digital stage sees one port per RF chain, so the effective channel is
  H^H A C_m (K x N_RF) with A the diagonal phase-shifter stage and C_m the
  0/1 group-selection matrix. Power normalization then exactly cancels the
  incoherent group-combining gain.
* active_set_precoders -- the idealized performance model used for capacity
  by default: precoding is assumed to perform like full-digital zero-forcing
  restricted to the antennas scheme m activates (K x N_RF*N_K effective
  channel), i.e. the analog stage is absorbed into the solve.

Both normalize the transmit matrix to ||A C_m D_m||_F^2 = P_max and record
the per-user diagonal power gains the capacity model consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .codebook import SpatialCodebook, selection_matrix
from .params import (
    MODE_EQUAL_GAIN,
    MODE_IDEALIZED_ZF,
    MODES,
    RadioParams,
    SystemGeometry,
)

# Gram pivots below this fraction of ||H_eff||_F^2 count as rank-deficient.
SINGULARITY_RTOL = 1e-12

CONSTRUCTION_GROUPED = "grouped"
CONSTRUCTION_ACTIVE = "active-set"
CONSTRUCTION_FDP = "fdp"


class SingularChannelError(RuntimeError):
    """Effective channel is (numerically) rank deficient; caller may redraw."""

    def __init__(self, detail: str, scheme_index: int | None = None):
        self.scheme_index = scheme_index
        if scheme_index is not None:
            detail = f"scheme {scheme_index}: {detail}"
        super().__init__(detail)


class DegeneratePrecoderError(RuntimeError):
    """Precoder normalization hit a zero-norm transmit matrix."""


@dataclass(frozen=True)
class RfStage:
    """Diagonal RF stage: one unit-modulus phase shifter per antenna."""

    mode: str
    phases: np.ndarray   # (N_T,) complex, |phases| == 1

    def a_matrix(self) -> np.ndarray:
        return np.diag(self.phases)


def rf_stage(mode: str, channel: ChannelRealization, geom: SystemGeometry) -> RfStage:
    """Build the RF stage.

    idealized-zf: identity phases; the analog stage is absorbed into the
    digital solve (performance assumed equal to full-digital zero-forcing).
    equal-gain: each antenna's shifter conjugates the strongest user's
    channel phase (strongest by large-scale coefficient) -- a documented
    heuristic that exercises the unit-modulus constraint.
    """
    if mode not in MODES:
        raise ValueError(f"unknown RF stage mode {mode!r}")
    if mode == MODE_IDEALIZED_ZF:
        phases = np.ones(geom.n_t, dtype=complex)
    else:
        k_star = int(np.argmax(channel.beta))
        phases = np.exp(-1j * np.angle(channel.h_matrix[k_star]))
    return RfStage(mode=mode, phases=phases)


def zf_precoder(h_eff: np.ndarray) -> np.ndarray:
    """Unnormalized zero-forcing: D0 = H^H (H H^H)^-1, so H_eff @ D0 = I.

    Raises SingularChannelError when the Gram matrix is not positive
    definite or its smallest Cholesky pivot falls below
    SINGULARITY_RTOL * ||H_eff||_F^2.
    """
    h_eff = np.asarray(h_eff)
    if h_eff.ndim != 2:
        raise ValueError("h_eff must be a 2-D matrix")
    k, width = h_eff.shape
    if k > width:
        raise ValueError(f"zero-forcing needs K <= columns (got {k} > {width})")
    gram = h_eff @ h_eff.conj().T
    fro2 = float(np.trace(gram).real)
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise SingularChannelError(f"Gram matrix not positive definite: {exc}") from exc
    pivots = np.diagonal(chol).real ** 2
    if fro2 <= 0.0 or pivots.min() <= SINGULARITY_RTOL * fro2:
        raise SingularChannelError(
            f"smallest Gram pivot {pivots.min():.3e} below "
            f"{SINGULARITY_RTOL:g} * ||H_eff||_F^2 = {SINGULARITY_RTOL * fro2:.3e}")
    # D0 = H^H gram^-1 = (gram^-1 H)^H since gram is Hermitian
    return np.linalg.solve(gram, h_eff).conj().T


def normalize_to_power(
    rf: RfStage,
    c_m: np.ndarray,
    d0: np.ndarray,
    p_max_w: float,
) -> np.ndarray:
    """Scale D0 uniformly so ||A C_m D||_F^2 equals the transmit power budget."""
    fro = float(np.linalg.norm(rf.phases[:, None] * (c_m @ d0)))
    if fro == 0.0:
        raise DegeneratePrecoderError("||A C D0||_F is zero; cannot normalize")
    return d0 * (math.sqrt(p_max_w) / fro)


@dataclass(frozen=True)
class SchemePrecoder:
    """Precoder state for one spatial scheme."""

    scheme_index: int
    h_eff: np.ndarray          # (K, W) effective channel
    d_matrix: np.ndarray       # (W, K) normalized digital precoder
    per_user_gain: np.ndarray  # (K,) |diag(H_eff D)|^2


@dataclass(frozen=True)
class PrecoderSet:
    """Precoders for every scheme of a codebook (or the single FDP 'scheme')."""

    schemes: tuple[SchemePrecoder, ...]
    p_max_w: float
    construction: str

    @property
    def m_count(self) -> int:
        return len(self.schemes)

    def gains(self) -> np.ndarray:
        """(M, K) per-user diagonal power gains."""
        return np.stack([s.per_user_gain for s in self.schemes])


def _diag_gains(h_eff: np.ndarray, d_m: np.ndarray) -> np.ndarray:
    diag = np.einsum("kw,wk->k", h_eff, d_m)
    return np.abs(diag) ** 2


def build_precoders(
    channel: ChannelRealization,
    book: SpatialCodebook,
    rf: RfStage,
    geom: SystemGeometry,
    radio: RadioParams,
) -> PrecoderSet:
    """Zero-forcing precoders on the group-port effective channels H^H A C_m."""
    if geom.n_s > geom.n_rf:
        raise ValueError("zero-forcing needs K <= n_rf")
    ht = channel.h_matrix * rf.phases[None, :]
    schemes = []
    for m in range(book.m_count):
        c_m = selection_matrix(book, m)
        h_eff = ht @ c_m
        try:
            d0 = zf_precoder(h_eff)
        except SingularChannelError as exc:
            raise SingularChannelError(str(exc), scheme_index=m) from exc
        d_m = normalize_to_power(rf, c_m, d0, radio.p_max_w)
        schemes.append(SchemePrecoder(
            scheme_index=m, h_eff=h_eff, d_matrix=d_m,
            per_user_gain=_diag_gains(h_eff, d_m)))
    return PrecoderSet(schemes=tuple(schemes), p_max_w=radio.p_max_w,
                       construction=CONSTRUCTION_GROUPED)


def active_set_precoders(
    channel: ChannelRealization,
    book: SpatialCodebook,
    geom: SystemGeometry,
    radio: RadioParams,
) -> PrecoderSet:
    """Full-digital-equivalent precoders over each scheme's activated antennas.

    The effective channel for scheme m is H^H restricted to the N_RF*N_K
    active columns; normalization is over the same columns (the embedding
    into the N_T-antenna array is norm-preserving), so the Eq.-style power
    budget ||A C D||_F^2 = P_max still holds.
    """
    if geom.n_s > geom.n_rf * geom.n_k:
        raise ValueError("zero-forcing needs K <= activated antenna count")
    schemes = []
    for m in range(book.m_count):
        h_act = channel.h_matrix[:, book.active_antennas(m)]
        try:
            d0 = zf_precoder(h_act)
        except SingularChannelError as exc:
            raise SingularChannelError(str(exc), scheme_index=m) from exc
        fro = float(np.linalg.norm(d0))
        if fro == 0.0:
            raise DegeneratePrecoderError("zero-norm precoder")
        d_m = d0 * (math.sqrt(radio.p_max_w) / fro)
        schemes.append(SchemePrecoder(
            scheme_index=m, h_eff=h_act, d_matrix=d_m,
            per_user_gain=_diag_gains(h_act, d_m)))
    return PrecoderSet(schemes=tuple(schemes), p_max_w=radio.p_max_w,
                       construction=CONSTRUCTION_ACTIVE)


def fdp_precoder(
    channel: ChannelRealization,
    geom: SystemGeometry,
    radio: RadioParams,
) -> PrecoderSet:
    """Full-digital zero-forcing over all N_T antennas (the baseline, M = 1)."""
    if geom.n_s > geom.n_t:
        raise ValueError("zero-forcing needs K <= n_t")
    h = channel.h_matrix
    d0 = zf_precoder(h)
    fro = float(np.linalg.norm(d0))
    if fro == 0.0:
        raise DegeneratePrecoderError("zero-norm precoder")
    d = d0 * (math.sqrt(radio.p_max_w) / fro)
    scheme = SchemePrecoder(scheme_index=0, h_eff=h, d_matrix=d,
                            per_user_gain=_diag_gains(h, d))
    return PrecoderSet(schemes=(scheme,), p_max_w=radio.p_max_w,
                       construction=CONSTRUCTION_FDP)
