from typing import Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from reception.queue import ChainSpec
from utils.errors import UsageError

EVENT_TYPES = ("arrival", "blocked", "unbind", "reject")


# ============ Sweep Schemas ============
class SweepSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    variable: Literal["R", "Q", "mu", "i", "f", "alpha"]
    start: float
    stop: float
    steps: int = Field(ge=2)
    scale: Literal["linear", "log"] = "linear"

    @model_validator(mode="after")
    def check_range(self) -> "SweepSpec":
        if not self.start < self.stop:
            raise ValueError("sweep start must be below stop")
        if self.scale == "log" and self.start <= 0:
            raise ValueError("log sweep needs a positive start")
        return self

    @classmethod
    def parse(cls, text: str) -> "SweepSpec":
        """Parse `var=start:stop:steps[:log]`."""
        try:
            variable, _, spec = text.partition("=")
            parts = spec.split(":")
            if not variable or len(parts) not in (3, 4):
                raise ValueError("expected var=start:stop:steps[:log]")
            scale = parts[3] if len(parts) == 4 else "linear"
            return cls(
                variable=variable.strip(),
                start=float(parts[0]),
                stop=float(parts[1]),
                steps=int(parts[2]),
                scale=scale,
            )
        except ValueError as exc:
            raise UsageError(f"invalid sweep '{text}': {exc}") from exc

    def values(self) -> List[float]:
        if self.scale == "log":
            grid = np.geomspace(self.start, self.stop, self.steps)
        else:
            grid = np.linspace(self.start, self.stop, self.steps)
        if self.variable == "i":
            return [int(v) for v in dict.fromkeys(np.rint(grid).astype(np.int64).tolist())]
        return [float(v) for v in grid]


# ============ Simulation Schemas ============
class SimConfig(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    chain: ChainSpec
    max_events: int = Field(gt=0)
    warmup_events: int = Field(ge=0)
    seed: int = Field(ge=0, lt=2 ** 64)
    replications: int = Field(default=1, ge=1)

    @model_validator(mode="before")
    @classmethod
    def default_warmup(cls, data):
        if isinstance(data, dict) and data.get("warmup_events") is None and "max_events" in data:
            data = {**data, "warmup_events": int(data["max_events"]) // 10}
        return data

    @model_validator(mode="after")
    def warmup_before_end(self) -> "SimConfig":
        if not self.max_events > self.warmup_events:
            raise ValueError("max_events must exceed warmup_events")
        return self


class ReplicationSummary(BaseModel):
    index: int
    seed: int
    occupancy: List[float]
    counts: Dict[str, int]
    measured_counts: Dict[str, int]
    final_state: int
    measured_time: float
    interarrival_count: int
    interarrival_mean: float
    interarrival_m2: float

    @property
    def interarrival_var(self) -> float:
        if self.interarrival_count < 2:
            return float("nan")
        return self.interarrival_m2 / (self.interarrival_count - 1)


class SimResult(BaseModel):
    seed: int
    occupancy: List[float]
    std_error: List[float]
    counts: Dict[str, int]
    measured_counts: Dict[str, int]
    empirical_rejection_fraction: float
    rejection_per_arrival: float
    rejection_fraction_of_departures: float
    interarrival_count: int
    interarrival_mean: float
    interarrival_var: float
    replications: List[ReplicationSummary]

    @property
    def in_system_at_end(self) -> int:
        return sum(rep.final_state for rep in self.replications)


# ============ Validation Schemas ============
class ValidationSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    events: int = Field(default=1_000_000, gt=0)
    warmup_events: Optional[int] = Field(default=None, ge=0)
    replications: int = Field(default=8, ge=1)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    tv_tolerance: float = Field(default=0.02, gt=0)
    rejection_tolerance: float = Field(default=0.02, gt=0)
    interarrival_mean_tolerance: float = Field(default=0.01, gt=0)
    interarrival_var_tolerance: float = Field(default=0.05, gt=0)
    perturb: float = Field(default=0.0, gt=-1)
    backend: Literal["local", "celery"] = "local"
    workers: Optional[int] = Field(default=None, ge=1)


class StateDeviation(BaseModel):
    n: int
    analytic: float
    empirical: float
    std_error: float
    deviation: float
    z_score: Optional[float] = None


class ValidationReport(BaseModel):
    passed: bool
    failures: List[str]
    seed: int
    events: int
    replications: int
    states: int
    tv_distance: float
    tv_median: float
    replication_tv: List[float]
    per_state: List[StateDeviation]
    analytic_rejection_fraction: float
    empirical_rejection_fraction: float
    rejection_rel_error: float
    expected_interarrival_mean: float
    interarrival_mean: float
    interarrival_mean_rel_error: float
    expected_interarrival_var: float
    interarrival_var: float
    interarrival_var_rel_error: float
    perturb: float

    @field_validator("per_state")
    @classmethod
    def ordered_states(cls, rows: List[StateDeviation]) -> List[StateDeviation]:
        return sorted(rows, key=lambda row: row.n)
