"""Joint cascaded-channel estimation and signal recovery for reflecting-surface
MIMO links via bidirectional two-layer approximate message passing."""

from .bamp import (
    BampConfig,
    DivergenceError,
    EstimateSet,
    SideInfo,
    anchor_ambiguity,
    bilinear_pilot_stage,
    run,
    svd_transform,
    utamp_refine_q,
)
from .harness import (
    ExperimentSpec,
    SweepResult,
    TrialResult,
    baseline_bigamp_ls,
    default_priors,
    emit,
    monte_carlo,
    nmse,
    run_trial,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .model import (
    ChannelSet,
    GenConfig,
    Observation,
    SignalFrame,
    SystemDims,
    gen_channels,
    gen_signal,
    generate_scenario,
    make_dft,
    simulate,
)
from .priors import (
    BernoulliGaussianPrior,
    DiscretePrior,
    GaussianMsg,
    GaussianPrior,
    VAR_FLOOR,
    denoise,
    ep_extrinsic,
    gauss_combine,
)

__version__ = "0.1.0"
