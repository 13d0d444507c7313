"""Pydantic models of scenario files.

A scenario names a collection of sets (the JSON forms produced by each
descriptor's ``to_dict``), optional shifts and reference points, a gauge
and the numeric parameters of the subcommand that consumes it. Unknown
fields are rejected everywhere.
"""

from pathlib import Path
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field

from conditions.collection import Collection
from core.gauges import Gauge
from sets.sampling import Region
from sets.serializers import descriptor_from_dict

Vector = list[float]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class HalfspaceSchema(StrictModel):
    type: Literal["halfspace"]
    normal: Vector
    offset: float


class HyperplaneSchema(StrictModel):
    type: Literal["hyperplane"]
    normal: Vector
    offset: float


class AffineSchema(StrictModel):
    type: Literal["affine"]
    point: Vector
    basis: list[Vector] = Field(default_factory=list)


class BallSchema(StrictModel):
    type: Literal["ball"]
    center: Vector
    radius: float


class BoxSchema(StrictModel):
    type: Literal["box"]
    lo: Vector
    hi: Vector


class FaceSchema(StrictModel):
    normal: Vector
    offset: float


class PolytopeSchema(StrictModel):
    type: Literal["polytope"]
    halfspaces: list[FaceSchema] = Field(min_length=1)


class AbsEpigraphSchema(StrictModel):
    type: Literal["abs_epigraph"]
    shift: float = 0.0


class PointsSchema(StrictModel):
    type: Literal["points"]
    points: list[Vector] = Field(min_length=1)


class TranslateSchema(StrictModel):
    type: Literal["translate"]
    inner: "SetSchema"
    by: Vector


class BallRestrictionSchema(StrictModel):
    type: Literal["ball_restriction"]
    inner: "SetSchema"
    center: Vector
    radius: float


SetSchema = Annotated[
    Union[
        HalfspaceSchema,
        HyperplaneSchema,
        AffineSchema,
        BallSchema,
        BoxSchema,
        PolytopeSchema,
        AbsEpigraphSchema,
        PointsSchema,
        TranslateSchema,
        BallRestrictionSchema,
    ],
    Field(discriminator="type"),
]

TranslateSchema.model_rebuild()
BallRestrictionSchema.model_rebuild()


class GaugeSchema(StrictModel):
    kind: Literal["identity", "holder"] = "identity"
    q: float = Field(default=1.0, gt=0)
    alpha: float = Field(default=1.0, gt=0)

    def build(self):
        return Gauge.from_dict(self.model_dump())


class RegionSchema(StrictModel):
    center: Vector
    radius: float = Field(gt=0)

    def build(self):
        return Region.from_dict(self.model_dump())


class Params(StrictModel):
    """Numeric parameters; each subcommand reads the ones it needs."""

    eps: float | None = Field(default=None, gt=0)
    lam: float | None = Field(default=None, gt=0)
    eta: float | None = Field(default=None, gt=0)
    tau: float | None = Field(default=None, gt=0, lt=1)
    rho: float | None = Field(default=None, gt=0)
    q: float | None = Field(default=None, gt=0)
    alpha: float | None = Field(default=None, gt=0)
    delta: float | None = Field(default=None, ge=0)
    x0: Vector | None = None
    max_iter: int | None = Field(default=None, gt=0)
    tol: float | None = Field(default=None, gt=0)
    grid_h: float | None = Field(default=None, gt=0)
    seed: int | None = Field(default=None, ge=0)
    region: RegionSchema | None = None
    variant: str | None = None
    index_method: Literal["exact2", "grid", "cyclic"] | None = None
    budget: int | None = Field(default=None, gt=0)
    eps_list: list[float] | None = None
    weights: list[float] | None = None
    count: int | None = Field(default=None, gt=0)
    slope_directions: int | None = Field(default=None, gt=0)


class Scenario(StrictModel):
    name: str = Field(pattern=r"^[A-Za-z0-9_.-]+$")
    sets: list[SetSchema] = Field(min_length=2)
    shifts: list[Vector] | None = None
    common_point: Vector | None = None
    base_points: list[Vector] | None = None
    gauge: GaugeSchema = Field(default_factory=GaugeSchema)
    params: Params = Field(default_factory=Params)

    def build_sets(self):
        return [descriptor_from_dict(item.model_dump()) for item in self.sets]

    def build_collection(self):
        return Collection(
            sets=self.build_sets(),
            shifts=self.shifts,
            common_point=self.common_point,
            base_points=self.base_points,
        )

    def with_overrides(self, **overrides):
        """Copy with the given non-None parameters replaced, revalidated."""
        updates = {key: value for key, value in overrides.items() if value is not None}
        if not updates:
            return self
        params = Params.model_validate({**self.params.model_dump(exclude_none=True), **updates})
        return self.model_copy(update={"params": params})

    def to_dict(self):
        return self.model_dump(mode="json", exclude_none=True)


def load_scenario(path):
    """Read and validate a scenario file.

    Raises:
        OSError: The file cannot be read.
        pydantic.ValidationError: Malformed JSON or schema violations.
    """
    return Scenario.model_validate_json(Path(path).read_text(encoding="utf-8"))
