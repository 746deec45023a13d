from app.loops.critical import (
    CriticalLoop,
    TriadAmplitude,
    find_critical_loop,
    rank_critical_loops,
    triad_amplitudes,
)
from app.loops.enumerate import (
    GeneralizedLoop,
    LoopBudgetExceeded,
    enumerate_extended_loops,
    enumerate_generalized_loops,
)
from app.loops.series import (
    LoopAmplitude,
    LoopSeries,
    LoopSeriesError,
    SaturationError,
    loop_amplitude,
    loop_corrected_magnetization,
    partition_function_series,
)

__all__ = [
    "CriticalLoop",
    "GeneralizedLoop",
    "LoopAmplitude",
    "LoopBudgetExceeded",
    "LoopSeries",
    "LoopSeriesError",
    "SaturationError",
    "TriadAmplitude",
    "enumerate_extended_loops",
    "enumerate_generalized_loops",
    "find_critical_loop",
    "loop_amplitude",
    "loop_corrected_magnetization",
    "partition_function_series",
    "rank_critical_loops",
    "triad_amplitudes",
]
