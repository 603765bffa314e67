"""String identifiers for the bundled families, as used in experiment configs."""

from __future__ import annotations

from typing import Callable, Union

from ..common.errors import ConfigError
from .service import ProductBivariate
from .shapes import (
    Base1D,
    Shape1D,
    cauchy_base,
    concave_shape,
    convex_shape,
    exponential_base,
    half_normal_base,
    logistic_base,
    normal_base,
)

SHAPES: dict[str, Callable[[], Shape1D]] = {
    "convex-3x2": convex_shape,
    "concave-sqrt": concave_shape,
}

BIVARIATE: dict[str, Callable[[], ProductBivariate]] = {
    "quad-9x2y2": lambda: ProductBivariate(convex_shape(), convex_shape(), name="quad-9x2y2"),
}

LOCATION_BASES: dict[str, Callable[[], Base1D]] = {
    "normal": normal_base,
    "cauchy": cauchy_base,
    "logistic": logistic_base,
}

SCALE_BASES: dict[str, Callable[[], Base1D]] = {
    "exponential": exponential_base,
    "half-normal": half_normal_base,
}

FAMILY_IDS = sorted([*SHAPES, *BIVARIATE, *LOCATION_BASES, *SCALE_BASES])

Family = Union[Shape1D, ProductBivariate, Base1D]


def _unknown(kind: str, value: str, valid) -> ConfigError:
    return ConfigError(f"unknown {kind} '{value}'", [f"valid {kind} ids: {', '.join(sorted(valid))}"])


def resolve_shape(family_id: str) -> Shape1D:
    if family_id not in SHAPES:
        raise _unknown("shape", family_id, SHAPES)
    return SHAPES[family_id]()


def resolve_bivariate(family_id: str) -> ProductBivariate:
    if family_id not in BIVARIATE:
        raise _unknown("bivariate family", family_id, BIVARIATE)
    return BIVARIATE[family_id]()


def resolve_base(family_id: str) -> Base1D:
    if family_id in LOCATION_BASES:
        return LOCATION_BASES[family_id]()
    if family_id in SCALE_BASES:
        return SCALE_BASES[family_id]()
    raise _unknown("base", family_id, {**LOCATION_BASES, **SCALE_BASES})


def resolve_family(family_id: str) -> Family:
    if family_id in SHAPES:
        return resolve_shape(family_id)
    if family_id in BIVARIATE:
        return resolve_bivariate(family_id)
    if family_id in LOCATION_BASES or family_id in SCALE_BASES:
        return resolve_base(family_id)
    raise _unknown("family", family_id, FAMILY_IDS)
