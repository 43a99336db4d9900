"""Bundle of the per-root-system objects the kernel and testing modules share."""
from __future__ import annotations

from dataclasses import dataclass

from .geometry import ChamberAtlas, ReflectionGroup, RootSystemSpec, build_atlas
from .heat import HeatContext, make_heat_context
from .measure import MeasureContext

# exponent used in every Gaussian-normalised bound, exp(-c d^2 / s^2)
GAUSS_C = 1.0 / 16.0


@dataclass(frozen=True, eq=False)
class Lab:
    spec: RootSystemSpec
    group: ReflectionGroup
    atlas: ChamberAtlas
    measure: MeasureContext
    heat: HeatContext | None
    gauss_c: float = GAUSS_C

    @property
    def dimension(self) -> int:
        return self.spec.dimension

    def require_heat(self) -> HeatContext:
        if self.heat is None:
            from .errors import ConfigError
            raise ConfigError("this operation needs a Z_2^N root system (exact heat kernel)")
        return self.heat


def make_lab(spec: RootSystemSpec, *, validate: bool = True, seed: int = 0, **measure_kw) -> Lab:
    atlas = build_atlas(spec)
    heat = make_heat_context(spec, validate=validate) if spec.is_product and spec.dimension <= 4 else None
    return Lab(spec, atlas.group, atlas, MeasureContext(spec, seed=seed, **measure_kw), heat)
