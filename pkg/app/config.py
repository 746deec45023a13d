from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # BP
    bp_max_iters: int = 200
    bp_tol: float = 1e-9
    bp_damping: float = 0.5
    message_clip: float = 30.0  # |eta| bound

    # Loop search
    triad_thresholds: list[float] = [0.999, 0.99, 0.95, 0.9, 0.8, 0.7, 0.5]
    max_loop_bits: int = 12
    llr_threshold: float | None = None  # a-posteriori |LLR| filter, off if None
    max_cycles: int = 200_000  # cycles scored per threshold
    loop_budget: int = 1_000_000  # generalized loops per enumeration

    # Effective (loop-corrected) BP
    effective_damping: float = 0.7
    effective_max_iters: int = 500
    effective_tol: float = 1e-10
    max_loops: int = 3

    # LP
    lp_feasibility_tol: float = 1e-9
    lp_integrality_tol: float = 1e-7
    lp_max_iters: int = 50_000

    # LP-erasure
    erasure_epsilon: float = 0.0
    erasure_candidates: int = 5  # loop candidates per threshold

    # Instanton search
    instanton_max_steps: int = 100
    instanton_noise_variance: float = 1.0
    instanton_push: float = 1e-6

    # Campaigns
    workers: int = 1  # process pool size, 1 = in-process
    runs_dir: str = "runs"
    codes_dir: str | None = None  # alist/JSON files the service may load by file name

    # Server
    host: str = "0.0.0.0"
    port: int = 8001
    log_level: str = "INFO"

    model_config = {"env_file": ".env", "env_file_encoding": "utf-8"}


settings = Settings()
