"""Deslexicalization: lexical augmentation with exact span realignment."""

from minutemeta.deslex.apply import (
    DeslexPolicy,
    deslexicalize,
    deslexicalize_corpus,
    deslexicalize_minute,
)
from minutemeta.deslex.datetimes import parse_datetime, perturb_datetime
from minutemeta.deslex.generators import (
    LocaleSurfaceGenerator,
    SurfaceGenerator,
    WordlistGenerator,
    default_generator,
)

__all__ = [
    "DeslexPolicy",
    "LocaleSurfaceGenerator",
    "SurfaceGenerator",
    "WordlistGenerator",
    "default_generator",
    "deslexicalize",
    "deslexicalize_corpus",
    "deslexicalize_minute",
    "parse_datetime",
    "perturb_datetime",
]
