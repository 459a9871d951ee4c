"""Energy-efficiency simulator for spatial modulation with sub-connected
hybrid precoding versus full-digital zero-forcing in mm-Wave massive MIMO."""

__version__ = "0.1.0"

from .params import (  # noqa: F401
    ChannelParams,
    ConfigError,
    FeasibilityError,
    RadioParams,
    SimConfig,
    SystemGeometry,
    dbm_to_watts,
    default_config,
    load_config,
    noise_variance,
    validate_geometry,
    watts_to_dbm,
)
from .channel import ChannelRealization, UserDrop, array_response, draw_channel, draw_user_drop  # noqa: F401
from .codebook import SpatialCodebook, build_codebook, num_spatial_schemes, selection_matrix  # noqa: F401
from .precoding import (  # noqa: F401
    PrecoderSet,
    RfStage,
    SingularChannelError,
    active_set_precoders,
    build_precoders,
    fdp_precoder,
    rf_stage,
    zf_precoder,
)
from .capacity import RateResult, gsm_rate, spectral_efficiency_user, total_capacity  # noqa: F401
from .power import PowerBreakdown, total_power  # noqa: F401
from .sweep import SweepRecord, SweepSpec, evaluate_point, run_sweep, write_csv  # noqa: F401
