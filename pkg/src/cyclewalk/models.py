from typing import Any, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

Command = Literal["simulate", "rates", "localize", "spectrum", "density", "verify"]
GraphName = Literal["tilde-c4", "c4-prime"]
PresetName = Literal["case-i", "case-ii", "fig3a", "fig3b", "uniform"]


class AmplitudeEntry(BaseModel):
    """One nonzero amplitude of a state file.

    Either ``coin`` (0..9, a fundamental arc of ``cell``) or ``arc``
    ([origin, terminus] vertex labels) locates the arc.
    """

    cell: int = 0
    coin: Optional[int] = Field(default=None, ge=0, le=9)
    arc: Optional[tuple[str, str]] = None
    re: float = 0.0
    im: float = 0.0

    @model_validator(mode="after")
    def _one_location(self):
        if (self.coin is None) == (self.arc is None):
            raise ValueError("Give exactly one of 'coin' or 'arc'")
        return self

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)


class StateFile(BaseModel):
    graph: GraphName
    radius: int = Field(ge=0)
    amplitudes: list[AmplitudeEntry] = Field(min_length=1)


class RunConfig(BaseModel):
    command: Command
    graph: Optional[GraphName] = None
    radius: Optional[int] = Field(default=None, ge=0)
    t_max: int = Field(default=200, ge=0)
    initial: Optional[str] = None
    preset: Optional[PresetName] = None
    grid: Optional[int] = Field(default=None, ge=4)
    out: Optional[str] = None
    seed: int = 0
    only: list[str] = Field(default_factory=list)
    cdf_at: list[float] = Field(default_factory=list)

    @field_validator("only", "cdf_at", mode="before")
    @classmethod
    def _comma_separated(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [item.strip() for item in value.split(",") if item.strip()]
        return value

    @field_validator("grid")
    @classmethod
    def _multiple_of_four(cls, grid: Optional[int]) -> Optional[int]:
        if grid is not None and grid % 4:
            raise ValueError(f"grid must be a multiple of 4, got {grid}")
        return grid

    @model_validator(mode="after")
    def _single_source(self):
        if self.initial is not None and self.preset is not None:
            raise ValueError("Give either an initial state file or a preset, not both")
        return self


class Check(BaseModel):
    """One measured quantity against its expected value."""

    name: str
    measured: float
    expected: float
    tolerance: float
    passed: bool


class CriterionResult(BaseModel):
    name: str
    description: str
    passed: bool
    checks: list[Check] = Field(default_factory=list)
    detail: dict[str, Any] = Field(default_factory=dict)
    error: Optional[str] = None


class VerificationReport(BaseModel):
    seed: int
    passed: bool
    criteria: list[CriterionResult]


class SimulationSummary(BaseModel):
    graph: GraphName
    radius: int
    t_max: int
    normalization: float
    norm_drift: float
    max_position: int
    origin_mass: float
    reflected_mass: float
    transmitted_mass: float
