"""HTTP service around the sweep engine.

The service owns no physics: requests are validated pydantic mirrors of the
core dataclasses, handed to the sweep engine, and the records come back as
JSON with exactly the CSV field names (plus the stderr diagnostic).
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .params import (
    FDP,
    GAIN_MODEL_ACTIVE,
    GSM_HP,
    MODE_IDEALIZED_ZF,
    SOLVES_PER_BLOCK,
    ChannelParams,
    ConfigError,
    FeasibilityError,
    RadioParams,
    SystemGeometry,
    default_config,
)
from .sweep import (
    SWEEP_CUSTOM,
    SWEEP_KINDS,
    ExcessiveSingularityError,
    SweepSpec,
    default_sweep,
    evaluate_point,
    run_sweep,
)

_DEFAULTS = default_config()


class GeometryIn(BaseModel):
    n_m: int = _DEFAULTS.geometry.n_m
    n_k: int = _DEFAULTS.geometry.n_k
    n_rf: int = _DEFAULTS.geometry.n_rf
    n_s: int = _DEFAULTS.geometry.n_s
    rows_l: int | None = None
    cols_r: int | None = None

    def to_core(self) -> SystemGeometry:
        return SystemGeometry.make(n_m=self.n_m, n_k=self.n_k, n_rf=self.n_rf,
                                   n_s=self.n_s, rows_l=self.rows_l,
                                   cols_r=self.cols_r)


class RadioIn(BaseModel):
    p_max_w: float = _DEFAULTS.radio.p_max_w
    alpha: float = _DEFAULTS.radio.alpha
    p_rf_chain_w: float = _DEFAULTS.radio.p_rf_chain_w
    p_shifter_w: float = _DEFAULTS.radio.p_shifter_w
    p_switch_w: float = _DEFAULTS.radio.p_switch_w
    p_fix_w: float = _DEFAULTS.radio.p_fix_w
    noise_psd_dbm_hz: float = _DEFAULTS.radio.noise_psd_dbm_hz
    bandwidth_hz: float = _DEFAULTS.radio.bandwidth_hz
    coherence_bw_hz: float = _DEFAULTS.radio.coherence_bw_hz
    coherence_time_s: float = _DEFAULTS.radio.coherence_time_s
    tau: float = _DEFAULTS.radio.tau
    l_bs_flops_per_w: float = _DEFAULTS.radio.l_bs_flops_per_w
    p_cod_w_per_bps: float = _DEFAULTS.radio.p_cod_w_per_bps

    def to_core(self) -> RadioParams:
        return RadioParams(**self.model_dump())


class ChannelIn(BaseModel):
    n_ray: int = _DEFAULTS.channel.n_ray
    path_loss_exp: float = _DEFAULTS.channel.path_loss_exp
    shadowing_sigma_db: float = _DEFAULTS.channel.shadowing_sigma_db
    user_dist_min_m: float = _DEFAULTS.channel.user_dist_min_m
    user_dist_max_m: float = _DEFAULTS.channel.user_dist_max_m
    carrier_freq_hz: float = _DEFAULTS.channel.carrier_freq_hz
    elevation_range: str = _DEFAULTS.channel.elevation_range

    def to_core(self) -> ChannelParams:
        return ChannelParams(**self.model_dump())


class RecordOut(BaseModel):
    sweep_kind: str
    swept_value: float
    scheme: str
    n_drops: int
    r_total_bps: float
    ee_bit_per_joule: float
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
    singular_redraws: int
    rate_stderr_bps: float


class SkippedOut(BaseModel):
    swept_value: float
    scheme: str
    reason: str


class SweepRequest(BaseModel):
    sweep_kind: str = "users"
    swept_values: list[float] | None = None   # None -> the preset values
    swept_param: str | None = None            # required for sweep_kind=custom
    geometry: GeometryIn = Field(default_factory=GeometryIn)
    radio: RadioIn = Field(default_factory=RadioIn)
    channel: ChannelIn = Field(default_factory=ChannelIn)
    schemes: list[str] = [GSM_HP, FDP]
    n_drops: int = 200
    seed: int = 1
    mode: str = MODE_IDEALIZED_ZF
    gain_model: str = GAIN_MODEL_ACTIVE
    precoder_solves: str = SOLVES_PER_BLOCK
    engine: str = "fast"


class SweepResponse(BaseModel):
    records: list[RecordOut]
    skipped: list[SkippedOut]


class PointRequest(BaseModel):
    geometry: GeometryIn = Field(default_factory=GeometryIn)
    radio: RadioIn = Field(default_factory=RadioIn)
    channel: ChannelIn = Field(default_factory=ChannelIn)
    scheme: str = GSM_HP
    n_drops: int = 200
    seed: int = 1
    mode: str = MODE_IDEALIZED_ZF
    gain_model: str = GAIN_MODEL_ACTIVE
    precoder_solves: str = SOLVES_PER_BLOCK
    engine: str = "fast"


def _spec_from_request(req: SweepRequest) -> SweepSpec:
    common = dict(
        n_m=req.geometry.n_m, n_k=req.geometry.n_k, n_rf=req.geometry.n_rf,
        k_users=req.geometry.n_s, schemes=tuple(req.schemes),
        n_drops=req.n_drops, master_seed=req.seed, mode=req.mode,
        gain_model=req.gain_model, precoder_solves=req.precoder_solves,
        engine=req.engine,
    )
    if req.sweep_kind == SWEEP_CUSTOM:
        if req.swept_values is None:
            raise FeasibilityError("custom sweeps need explicit swept_values")
        return SweepSpec(sweep_kind=SWEEP_CUSTOM, swept_values=tuple(req.swept_values),
                         swept_param=req.swept_param, **common)
    if req.sweep_kind not in SWEEP_KINDS:
        raise FeasibilityError(f"sweep_kind must be one of {SWEEP_KINDS}")
    if req.swept_values is not None:
        return SweepSpec(sweep_kind=req.sweep_kind,
                         swept_values=tuple(req.swept_values), **common)
    return default_sweep(req.sweep_kind, **common)


def create_app() -> FastAPI:
    app = FastAPI(title="gsmhp", version=__version__,
                  description="Energy-efficiency sweeps for GSM hybrid precoding "
                              "vs full-digital zero-forcing")

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.get("/defaults")
    def defaults():
        cfg = default_config()
        return {
            "geometry": GeometryIn(n_m=cfg.geometry.n_m, n_k=cfg.geometry.n_k,
                                   n_rf=cfg.geometry.n_rf, n_s=cfg.geometry.n_s),
            "radio": RadioIn(),
            "channel": ChannelIn(),
            "mode": cfg.mode,
            "gain_model": cfg.gain_model,
            "precoder_solves": cfg.precoder_solves,
        }

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(req: SweepRequest):
        skipped: list[SkippedOut] = []
        try:
            spec = _spec_from_request(req)
            radio = req.radio.to_core()
            chan = req.channel.to_core()
            records = run_sweep(
                spec, radio, chan,
                on_skip=lambda v, s, why: skipped.append(
                    SkippedOut(swept_value=float(v), scheme=s, reason=why)))
        except (FeasibilityError, ConfigError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except ExcessiveSingularityError as exc:
            raise HTTPException(status_code=500, detail=str(exc))
        return SweepResponse(
            records=[RecordOut(**r.to_flat_dict()) for r in records],
            skipped=skipped)

    @app.post("/evaluate", response_model=RecordOut)
    def evaluate(req: PointRequest):
        try:
            geom = req.geometry.to_core()
            record = evaluate_point(
                geom, req.radio.to_core(), req.channel.to_core(), req.scheme,
                req.n_drops, req.seed, mode=req.mode, gain_model=req.gain_model,
                precoder_solves=req.precoder_solves, engine=req.engine,
                sweep_kind=SWEEP_CUSTOM)
        except (FeasibilityError, ConfigError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except ExcessiveSingularityError as exc:
            raise HTTPException(status_code=500, detail=str(exc))
        return RecordOut(**record.to_flat_dict())

    return app


app = create_app()
