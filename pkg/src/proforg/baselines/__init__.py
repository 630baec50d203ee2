"""Time-aware and time-agnostic RL baselines: online FQI and discrete SAC."""

from .fqi import (
    Buffer,
    FQIConfig,
    QModel,
    epsilon_at,
    fqi_fit,
    fqi_targets,
    q_features,
    run_online_fqi,
    zero_q,
)
from .sac import SACAgent, SACConfig, masked_softmax, run_online_sac

__all__ = [
    "Buffer", "FQIConfig", "QModel", "epsilon_at", "fqi_fit", "fqi_targets", "q_features",
    "run_online_fqi", "zero_q", "SACAgent", "SACConfig", "masked_softmax", "run_online_sac",
]
