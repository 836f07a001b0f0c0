"""
System configuration: parsing, validation and the reception-space capacity.

Units are fixed: D in um^2/s, R in um, dt in s, mu in 1/s, radii in nm.
The configuration file is a flat JSON object whose keys are the field
aliases below; unknown keys are rejected.
"""
import json
import logging
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from utils.errors import ConfigError

logger = logging.getLogger(__name__)

# Relative distance to an integer below which the capacity ratio snaps to it
CAPACITY_TIE_TOLERANCE = 1e-9


class SystemParams(BaseModel):
    """Physical and protocol constants of one configuration. Immutable."""

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    D: float = Field(alias="D_um2_per_s", gt=0, allow_inf_nan=False)
    R: float = Field(alias="R_um", gt=0, allow_inf_nan=False)
    Q: float = Field(gt=0, allow_inf_nan=False)
    dt: float = Field(alias="dt_s", gt=0, allow_inf_nan=False)
    mu: float = Field(alias="mu_per_s", ge=0, allow_inf_nan=False)
    Kplus: float = Field(gt=0, allow_inf_nan=False)
    Nr: int = Field(ge=1)
    Rr: float = Field(alias="Rr_nm", gt=0, allow_inf_nan=False)
    Re: float = Field(alias="Re_nm", gt=0, allow_inf_nan=False)
    Ra: float = Field(alias="Ra_nm", gt=0, allow_inf_nan=False)
    alpha: float = Field(ge=0, le=1)
    f: float = Field(gt=0)

    @field_validator("f")
    @classmethod
    def f_strictly_below_one(cls, value: float) -> float:
        if value >= 1:
            raise ValueError("f must lie strictly below 1")
        return value

    @model_validator(mode="after")
    def reception_space_is_a_shell(self) -> "SystemParams":
        if self.Re <= self.Rr:
            raise ValueError("Re must exceed Rr")
        return self

    def to_config(self) -> dict:
        """Serialize with the config-file keys."""
        return self.model_dump(by_alias=True)


def describe_errors(exc: ValidationError) -> str:
    messages = []
    for err in exc.errors():
        field = ".".join(str(part) for part in err["loc"]) or "config"
        msg = err["msg"].removeprefix("Value error, ")
        messages.append(f"{field}: {msg}")
    return "; ".join(messages)


def params_from_mapping(data: Mapping[str, Any]) -> SystemParams:
    """Validate an already-parsed mapping into SystemParams."""
    if not isinstance(data, Mapping):
        raise ConfigError(f"configuration must be a JSON object, got {type(data).__name__}")
    try:
        return SystemParams.model_validate(dict(data))
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration: {describe_errors(exc)}") from exc


def load_params(source: str) -> SystemParams:
    """Parse JSON configuration text into validated SystemParams."""
    try:
        data = json.loads(source)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"could not parse configuration: {exc}") from exc
    return params_from_mapping(data)


def load_params_file(path: Union[str, Path]) -> SystemParams:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"could not read configuration {path}: {exc}") from exc
    params = load_params(text)
    logger.info(f"Loaded configuration from {path}")
    return params


def with_overrides(params: SystemParams, **updates: Any) -> SystemParams:
    """Return a re-validated copy with some fields replaced (by field name)."""
    if not updates:
        return params
    data = params.model_dump()
    data.update(updates)
    try:
        return SystemParams.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration: {describe_errors(exc)}") from exc


def capacity_from_radii(Re: float, Rr: float, Ra: float) -> int:
    """floor((Re^3 - Rr^3) / Ra^3), evaluated on the exact decimal values."""
    if Ra <= 0 or Rr <= 0 or Re <= Rr:
        raise ConfigError(f"invalid radii Re={Re}, Rr={Rr}, Ra={Ra}")
    ratio = (Fraction(repr(Re)) ** 3 - Fraction(repr(Rr)) ** 3) / Fraction(repr(Ra)) ** 3
    nearest = round(ratio)
    if nearest >= 1 and abs(ratio - nearest) <= CAPACITY_TIE_TOLERANCE * nearest:
        n_m = int(nearest)
    else:
        n_m = math.floor(ratio)
    if n_m < 1:
        raise ConfigError(
            f"reception space holds no molecule: (Re^3 - Rr^3)/Ra^3 = {float(ratio):.6g} < 1"
        )
    return n_m


def capacity(params: SystemParams) -> int:
    """Maximum number of molecules N_m that fit in the reception space."""
    return capacity_from_radii(params.Re, params.Rr, params.Ra)
