from app.effective.solver import (
    EffectiveBpState,
    LoopMoments,
    decode_loop_corrected_bp,
    effective_magnetization,
    loop_moments,
    residual_system,
    solve_effective_bp,
)

__all__ = [
    "EffectiveBpState",
    "LoopMoments",
    "decode_loop_corrected_bp",
    "effective_magnetization",
    "loop_moments",
    "residual_system",
    "solve_effective_bp",
]
