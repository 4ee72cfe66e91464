"""Experiment configuration: a strict JSON schema."""

from __future__ import annotations

import json
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic import ValidationError as PydanticValidationError

from ..errors import ValidationError
from ..functions import ScalarFunction

METHODS = ("rand_svd_exact", "rand_svd_matfun", "krylov_aware", "krylov_aware_direct", "single_vector")
NEEDS_ELL_GE_K = ("rand_svd_exact", "rand_svd_matfun")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class Laplacian2dSpec(_Strict):
    kind: Literal["laplacian2d"]
    grid: int = Field(ge=3)
    kappa: float = Field(default=0.01, gt=0)
    lam: float = Field(default=1.0, alias="lambda")

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)


class SpinChainSpec(_Strict):
    kind: Literal["spin_chain"]
    N: int = Field(ge=1, le=24)
    h: float = 1.0


class SyntheticSpectrum(_Strict):
    family: Literal["inverse_square_log", "exp_decay", "explicit"]
    n: int | None = Field(default=None, ge=1)
    rate: float = 0.1
    values: list[float] | None = None

    @model_validator(mode="after")
    def _check(self):
        if self.family == "explicit":
            if not self.values:
                raise ValueError("explicit spectrum needs a nonempty 'values' list")
        elif self.n is None:
            raise ValueError(f"spectrum family {self.family!r} needs 'n'")
        return self


class SyntheticSpec(_Strict):
    kind: Literal["synthetic"]
    spectrum: SyntheticSpectrum


class MatrixMarketSpec(_Strict):
    kind: Literal["matrix_market"]
    path: str


OperatorSpec = Annotated[
    Union[Laplacian2dSpec, SpinChainSpec, SyntheticSpec, MatrixMarketSpec],
    Field(discriminator="kind"),
]


class FunctionSpec(_Strict):
    kind: Literal["exp_scaled", "exp", "log", "polynomial", "power_series", "identity"]
    t: float = 1.0
    coefficients: list[float] | None = None

    def build(self) -> ScalarFunction:
        d = {"kind": self.kind}
        if self.kind in ("exp_scaled", "exp"):
            d["t"] = self.t
        if self.coefficients is not None:
            d["coefficients"] = self.coefficients
        return ScalarFunction.from_dict(d)


class BoundSpec(_Strict):
    kind: Literal["thm35_tail", "thm35_expectation", "cor41", "cor42", "thm51"]
    delta: float | None = Field(default=None, gt=0, lt=1)

    @model_validator(mode="after")
    def _check(self):
        if self.kind in ("thm35_tail", "thm51") and self.delta is None:
            raise ValueError(f"bound {self.kind} needs 'delta'")
        return self


class SEqualsR(_Strict):
    s_equals_r: tuple[int, int]


class ExperimentConfig(_Strict):
    operator: OperatorSpec
    function: FunctionSpec
    k: int = Field(ge=1)
    ell: int = Field(ge=1)
    budget_schedule: Union[list[tuple[int, int]], SEqualsR]
    trials: int = Field(default=10, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    methods: list[Literal[METHODS]] = Field(default_factory=lambda: ["krylov_aware", "rand_svd_matfun"])
    bounds: list[BoundSpec] = Field(default_factory=list)
    dense_cap: int = Field(default=12000, ge=1)
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _cross(self):
        sched = self.schedule()
        if not sched:
            raise ValueError("budget_schedule is empty")
        for s, r in sched:
            if s < 1 or r < 0:
                raise ValueError(f"schedule entry (s={s}, r={r}) needs s >= 1 and r >= 0")
            if r < 1 and "rand_svd_matfun" in self.methods:
                raise ValueError("rand_svd_matfun needs r >= 1 in every schedule entry")
        bad = [m for m in self.methods if m in NEEDS_ELL_GE_K]
        if self.ell < self.k and bad:
            raise ValueError(f"ell={self.ell} < k={self.k} is not allowed with {', '.join(bad)}")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError("methods contains duplicates")
        return self

    def schedule(self):
        if isinstance(self.budget_schedule, SEqualsR):
            lo, hi = self.budget_schedule.s_equals_r
            return [(s, s) for s in range(lo, hi + 1)]
        return [tuple(p) for p in self.budget_schedule]

    def scalar_function(self):
        return self.function.build()


def _format_pydantic(err: PydanticValidationError):
    parts = []
    for e in err.errors():
        loc = ".".join(str(x) for x in e["loc"]) or "<root>"
        parts.append(f"{loc}: {e['msg']}")
    return "; ".join(parts)


def config_from_dict(data) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ValidationError("config must be a JSON object")
    try:
        return ExperimentConfig.model_validate(data)
    except PydanticValidationError as err:
        raise ValidationError(f"invalid config: {_format_pydantic(err)}") from None


def parse_config(path) -> ExperimentConfig:
    """Load and validate a JSON experiment config.

    Raises
    ------
    ValidationError
        On malformed JSON, unknown keys or schema violations; the message
        names the offending key path.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as err:
        raise ValidationError(f"{path}: invalid JSON at line {err.lineno}: {err.msg}") from None
    except OSError as err:
        raise ValidationError(f"cannot read config {path}: {err}") from None
    return config_from_dict(data)
