from app.experiments.runner import (
    correction_rows,
    fer_trial,
    run_campaign,
    run_fer_sweep,
    run_instanton_correction,
    run_zcheck_suite,
    wilson_interval,
    zcheck_code,
)

__all__ = [
    "correction_rows",
    "fer_trial",
    "run_campaign",
    "run_fer_sweep",
    "run_instanton_correction",
    "run_zcheck_suite",
    "wilson_interval",
    "zcheck_code",
]
