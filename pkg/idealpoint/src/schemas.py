"""Pydantic schemas for metadata, reports, configuration and run manifests."""

from __future__ import annotations

from datetime import datetime
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator


BUILTIN_PPC_STATISTICS = ["yea_rate", "legislator_yea_rate_sd", "close_margin_fraction"]


class LegislatorMeta(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str = Field(min_length=1)
    name: str = ""
    party: str = ""
    group: str | None = None

    @model_validator(mode="after")
    def _default_name(self) -> LegislatorMeta:
        if not self.name:
            self.name = self.id
        return self


class MotionMeta(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str = Field(min_length=1)
    label: str | None = None
    topic: str | None = None
    sponsor_flag: Literal[0, 1] | None = None


class DroppedLegislator(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    participation: float


class DroppedMotion(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    reason: Literal["unanimous", "all-missing"]


class FilterReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    min_participation: float
    drop_unanimous: bool
    until_stable: bool = False
    passes: int = Field(default=1, ge=1)
    dropped_legislators: list[DroppedLegislator] = Field(default_factory=list)
    dropped_motions: list[DroppedMotion] = Field(default_factory=list)
    n_before: int
    n_after: int
    m_before: int
    m_after: int

    @model_validator(mode="after")
    def _counts_reconcile(self) -> FilterReport:
        if self.n_after != self.n_before - len(self.dropped_legislators):
            raise ValueError("n_after does not reconcile with dropped legislators")
        if self.m_after != self.m_before - len(self.dropped_motions):
            raise ValueError("m_after does not reconcile with dropped motions")
        return self

    @property
    def is_empty(self) -> bool:
        return not self.dropped_legislators and not self.dropped_motions


class SamplerConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    iterations: int = Field(gt=0)
    burn_in: int = Field(default=0, ge=0)
    thin: int = Field(default=1, gt=0)
    chains: int = Field(default=1, gt=0)
    seed: int = Field(default=0, ge=0, lt=2**64)
    d: int = Field(default=1, ge=1)
    threads: int = Field(default=1, ge=1)

    @property
    def retained_draws(self) -> int:
        return max(self.iterations - self.burn_in, 0) // self.thin


class SynthSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n: int
    m: int
    d: int = 1
    alpha_scale: float = Field(default=1.0, gt=0)
    mu_scale: float = Field(default=0.5, gt=0)
    missing_rate: float = Field(default=0.0, ge=0.0, lt=1.0)
    zero_alpha_fraction: float = Field(default=0.0, ge=0.0, le=1.0)
    seed: int = Field(default=0, ge=0, lt=2**64)
    group_fraction: float = Field(default=0.0, ge=0.0, le=1.0)
    delta_values: list[float] | None = None
    max_regenerations: int = Field(default=50, ge=0)


class AnchorValidationReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    valid: bool
    count: int
    expected_count: int
    warnings: list[str] = Field(default_factory=list)


class ParameterSummary(BaseModel):
    model_config = ConfigDict(extra="forbid")

    parameter: Literal["mu", "alpha", "beta", "delta"]
    index: str
    dimension: int = 0
    mean: float
    sd: float
    ci_lower: float
    ci_upper: float
    level: float
    significant: bool

    @property
    def label(self) -> str:
        if self.dimension:
            return f"{self.parameter}[{self.index},{self.dimension}]"
        return f"{self.parameter}[{self.index}]"


class DiscriminationReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    count_significant: int
    total: int
    fraction: float
    per_dimension: list[int]
    significant_motions: list[str] = Field(default_factory=list)


class PivotReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    rank: int
    occupancy: dict[str, float]
    counts: dict[str, int]
    draws_used: int
    ties: int = 0


class PPCReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    statistic_name: str
    observed: float
    predictive_draws: list[float]
    p_value: float = Field(ge=0.0, le=1.0)

    @property
    def extreme(self) -> bool:
        return self.p_value < 0.05 or self.p_value > 0.95


class ConvergenceRow(BaseModel):
    model_config = ConfigDict(extra="forbid")

    parameter: str
    index: str
    dimension: int = 0
    rhat: float | None = None
    ess: float | None = None
    not_applicable: bool = False


class PartyEffectRow(BaseModel):
    model_config = ConfigDict(extra="forbid")

    motion_id: str
    mean: float
    sd: float
    ci_lower: float
    ci_upper: float
    significant: bool
    direction: Literal["favor-group", "against-group", "none"]
    closed_vote: bool


class PartyEffectReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    rows: list[PartyEffectRow]
    significant_count: int
    closed_vote_count: int
    closed_vote_significant_count: int
    identification_caveat: str | None = None


class GroupSummaryRow(BaseModel):
    model_config = ConfigDict(extra="forbid")

    party: str
    legislators: int
    mean_ideal_point: float
    significant_share: float
    positive_significant_share: float
    negative_significant_share: float


class MetadataBreakdownRow(BaseModel):
    model_config = ConfigDict(extra="forbid")

    key: str
    category: str
    motions: int
    significant: int
    share_of_significant: float


class RecoveryReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    correlation: float
    sign: Literal[-1, 1]
    compared: int


class DataSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    path: str
    format: Literal["csv", "json"] = "csv"
    motions_path: str | None = None


class FilterSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    min_participation: float = Field(default=0.95, ge=0.0, le=1.0)
    drop_unanimous: bool = True
    until_stable: bool = False


class ModelSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dimensions: int = Field(default=1, ge=1)
    sigma2: float = Field(default=25.0, gt=0.0)


class AnchorInput(BaseModel):
    model_config = ConfigDict(extra="forbid")

    legislator_id: str = Field(min_length=1)
    position: list[float] = Field(min_length=1)


class SamplerSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    iterations: int = Field(default=25000, gt=0)
    burn_in: int = Field(default=5000, ge=0)
    thin: int = Field(default=10, gt=0)
    chains: int = Field(default=2, gt=0)
    seed: int = Field(default=20100720, ge=0, lt=2**64)


class OrientationSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    reference: str
    signs: list[Literal[-1, 1]]


class AnalysisSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    ci_level: float = Field(default=0.95, gt=0.0, lt=1.0)
    ranks: list[int] = Field(default_factory=list)
    ppc_statistics: list[str] = Field(default_factory=lambda: list(BUILTIN_PPC_STATISTICS))
    ppc_replicates: int = Field(default=200, ge=200)
    orientation: OrientationSettings | None = None


class PartySettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    enabled: bool = False
    group_source: Literal["metadata", "file"] = "metadata"
    group_value: str = "1"
    mapping_path: str | None = None
    delta_prior_mean: float = 0.0
    delta_prior_variance: float = Field(default=25.0, gt=0.0)


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    data: DataSettings
    filter: FilterSettings = Field(default_factory=FilterSettings)
    model: ModelSettings = Field(default_factory=ModelSettings)
    anchors: list[AnchorInput]
    sampler: SamplerSettings = Field(default_factory=SamplerSettings)
    analysis: AnalysisSettings = Field(default_factory=AnalysisSettings)
    party: PartySettings = Field(default_factory=PartySettings)
    output_dir: str = "runs/latest"
    threads: int = Field(default=1, ge=1)


class RunManifest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    version: str
    created: datetime
    generated_by: str
    command: str
    config: dict[str, Any]
    seed: int
    chains: int
    iterations: int
    burn_in: int
    thin: int
    retained_draws: int
    data_path: str | None = None
    data_digest: str | None = None
    config_digest: str
    run_digest: str
    n_legislators: int
    n_motions: int
    dimensions: int
    n_free_legislators: int
    parameter_count: int
    legislator_ids: list[str]
    motion_ids: list[str]
    anchors: dict[str, list[float]] = Field(default_factory=dict)
    group_indicator: list[int] | None = None
    wall_time_seconds: float = 0.0
    sampler_note: str = ""
    jitter_events: int = 0
    identical_to_previous: bool = False


class ErrorResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    detail: str
    code: str
