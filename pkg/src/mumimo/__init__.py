"""Linear precoding and low-complexity transmission mode selection for MU-MIMO downlinks."""
from .asymptotics import (
    AsymptoticRate,
    CzfOptimum,
    bdzf_asymptotic_rate,
    cmf_asymptotic_rate,
    czf_asymptotic_rate,
    czf_fullload_upper_bound,
    modified_cmf_rate,
    modified_czf_rate,
    optimal_czf_streams,
)
from .channel import (
    ChannelRealization,
    StreamAllocation,
    SystemConfig,
    generate_channels,
    select_antennas,
    stack_equivalent_channel,
)
from .oracle import OracleResult, brute_force_best, enumerate_allocations
from .precoding import (
    BdzfConfig,
    Mode,
    Precoder,
    bdzf_precoder,
    cmf_precoder,
    czf_precoder,
    stream_sinrs,
    sum_rate,
)
from .strategy import (
    ModeDecision,
    ModeIntervals,
    allocate_cmf_streams,
    allocate_czf_streams,
    compute_mode_intervals,
    select_mode,
)

__version__ = "0.1.0"
