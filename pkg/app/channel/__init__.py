from app.channel.awgn import (
    LlrVector,
    NoiseConfiguration,
    awgn_sample,
    llr_from_output,
    llr_to_json,
    read_llr_csv,
    trial_seed,
    write_llr_csv,
)
from app.channel.geometry import effective_distance, instanton_noise_for, push_past_surface

__all__ = [
    "LlrVector",
    "NoiseConfiguration",
    "awgn_sample",
    "effective_distance",
    "instanton_noise_for",
    "llr_from_output",
    "llr_to_json",
    "push_past_surface",
    "read_llr_csv",
    "trial_seed",
    "write_llr_csv",
]
