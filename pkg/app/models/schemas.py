from __future__ import annotations

import uuid
from enum import Enum
from pathlib import Path

from pydantic import BaseModel, Field, ValidationInfo, field_validator, model_validator

from app.code.construct import is_served_code, library_names


class CampaignKind(str, Enum):
    INSTANTON_CORRECTION = "instanton-correction"
    FER_SWEEP = "fer-sweep"
    ZCHECK_SUITE = "z-check-suite"


class DecoderName(str, Enum):
    BP = "bp"
    LP = "lp"
    LP_ERASURE = "lp-erasure"
    LOOP_BP = "loop-bp"


def _served(info: ValidationInfo) -> bool:
    # set by the WebSocket handler: the config came from a network client
    return bool(info.context and info.context.get("served"))


class ExperimentConfig(BaseModel):
    code: str = "tanner155"  # library name or alist/JSON path
    kind: CampaignKind = CampaignKind.INSTANTON_CORRECTION
    master_seed: int = 0
    seeds: int = 50  # instanton searches, or FER trials per s2
    s2_grid: list[float] = Field(default_factory=lambda: [2.0])
    epsilon: float = Field(default=0.0, ge=0.0, lt=1.0)
    rescales: list[float] = Field(default_factory=lambda: [1.0, 1.05, 1.1, 1.15, 1.2])
    d_eff_cutoff: float = Field(default=20.0, gt=0.0)  # correction population: d_eff below this
    thresholds: list[float] | None = None
    max_loop_bits: int | None = None
    catalog: str | None = None  # existing catalog; built inline when absent
    zcheck_draws: int = 50
    out_dir: str | None = None
    workers: int | None = None

    @field_validator("code")
    @classmethod
    def _code_exists(cls, v: str, info: ValidationInfo) -> str:
        if _served(info):
            if not is_served_code(v):
                raise ValueError(f"{v!r} is not a code this service provides")
            return v
        if v not in library_names() and not Path(v).is_file():
            raise ValueError(f"{v!r} is neither a library code nor an existing file")
        return v

    @field_validator("catalog")
    @classmethod
    def _catalog_exists(cls, v: str | None, info: ValidationInfo) -> str | None:
        if v is not None and _served(info):
            raise ValueError("catalog paths cannot be set over the network")
        if v is not None and not Path(v).exists():
            raise ValueError(f"catalog {v!r} does not exist")
        return v

    @field_validator("out_dir")
    @classmethod
    def _local_out_dir(cls, v: str | None, info: ValidationInfo) -> str | None:
        if v is not None and _served(info):
            raise ValueError("out_dir cannot be set over the network")
        return v

    @model_validator(mode="after")
    def _grids_non_empty(self) -> ExperimentConfig:
        if not self.s2_grid or any(s <= 0 for s in self.s2_grid):
            raise ValueError("s2_grid must be non-empty and positive")
        if not self.rescales or any(r < 1.0 for r in self.rescales):
            raise ValueError("rescales must be non-empty and >= 1")
        if self.seeds < 0 or self.zcheck_draws < 1:
            raise ValueError("seeds must be >= 0 and zcheck_draws >= 1")
        return self


class CorrectionRow(BaseModel):
    instanton: int
    seed: int
    d_eff: float
    rescale: float
    bare_lp_failed: bool
    bare_lp_integral: bool  # a wrong codeword rather than a fractional vertex
    erasure_attempted: bool
    eligible: bool  # bare LP failed on a fractional vertex below the d_eff cutoff
    loops_found: int
    loop_r: list[float] = Field(default_factory=list)
    loop_bits: list[list[int]] = Field(default_factory=list)
    erasure_success: bool | None = None  # None when erasure never ran
    decoded_correctly: bool


class CorrectionReport(BaseModel):
    rows: list[CorrectionRow] = Field(default_factory=list)

    @property
    def eligible_rows(self) -> list[CorrectionRow]:
        return [r for r in self.rows if r.eligible]

    @property
    def corrected_fraction(self) -> float | None:
        """Share of eligible rows decoded to the transmitted word; None when there are none."""
        eligible = self.eligible_rows
        if not eligible:
            return None
        return sum(r.decoded_correctly for r in eligible) / len(eligible)

    def summary(self) -> dict:
        eligible = self.eligible_rows
        return {
            "rows": len(self.rows),
            "instantons": len({r.instanton for r in self.rows}),
            "bare_lp_failures": sum(r.bare_lp_failed for r in self.rows),
            "integral_failures": sum(r.bare_lp_failed and r.bare_lp_integral for r in self.rows),
            "eligible": len(eligible),
            "corrected": sum(r.decoded_correctly for r in eligible),
            "corrected_fraction": self.corrected_fraction,
        }


class FerRow(BaseModel):
    s2: float
    trials: int
    lp_failures: int
    erasure_failures: int
    lp_ci: tuple[float, float]
    erasure_ci: tuple[float, float]


class ZCheckRow(BaseModel):
    code: str
    n_loops: int
    draws: int
    converged_draws: int
    max_rel_error: float | None
    passed: bool


# HTTP payloads

class DecodeRequest(BaseModel):
    code: str = "tanner155"
    llr: list[float]
    epsilon: float | None = Field(default=None, ge=0.0, lt=1.0)  # LP: erasure when set
    max_loops: int | None = None
    max_iters: int | None = None
    damping: float | None = Field(default=None, ge=0.0, lt=1.0)


class DecodeResponse(BaseModel):
    decoder: DecoderName
    success: bool
    bits: list[int] | None = None
    magnetizations: list[float] | None = None
    pseudo_codeword: dict | None = None
    diagnostics: dict = Field(default_factory=dict)


class LoopAnalysisRequest(BaseModel):
    code: str
    llr: list[float]
    thresholds: list[float] | None = None
    max_loop_bits: int | None = None


class CodeSummary(BaseModel):
    name: str
    n_bits: int
    n_checks: int
    n_edges: int
    girth: int | None = None


# WebSocket event payloads

class WSEvent(BaseModel):
    type: str
    data: dict


class CampaignStartRequest(BaseModel):
    config: ExperimentConfig


class CampaignStatus(BaseModel):
    campaign_id: str = Field(default_factory=lambda: uuid.uuid4().hex[:8])
    status: str  # "running" | "stopped" | "done" | "error"
    kind: CampaignKind = CampaignKind.INSTANTON_CORRECTION
