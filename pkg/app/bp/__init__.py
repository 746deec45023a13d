from app.bp.engine import (
    Beliefs,
    BpState,
    ForbiddenConfigurationError,
    beliefs_from_state,
    bethe_free_energy,
    bp_sweep,
    check_beliefs,
    check_messages,
    decode_bp,
    directed_magnetizations,
    even_configurations,
    gauge_from_state,
    log_z0,
    run_bp,
)
from app.bp.exact import ExactSolution, brute_force

__all__ = [
    "Beliefs",
    "BpState",
    "ExactSolution",
    "ForbiddenConfigurationError",
    "beliefs_from_state",
    "bethe_free_energy",
    "bp_sweep",
    "brute_force",
    "check_beliefs",
    "check_messages",
    "decode_bp",
    "directed_magnetizations",
    "even_configurations",
    "gauge_from_state",
    "log_z0",
    "run_bp",
]
