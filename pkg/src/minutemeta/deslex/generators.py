"""Synthetic surface generators for replacement draws.

Two implementations of the same interface: small fixed word lists (hermetic,
for tests) and a locale-aware combinatorial generator (for training runs).
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Protocol

from minutemeta.deslex import wordlists
from minutemeta.errors import PoolExhausted


class SurfaceGenerator(Protocol):
    def draw(self, kind: str, rng: random.Random) -> str:
        """A synthetic surface for ``kind`` in {"name", "location"}."""
        ...


@dataclass
class WordlistGenerator:
    """Finite pools; with ``collision_free`` each draw is distinct until the
    pool runs out, which raises PoolExhausted."""

    names: tuple[str, ...]
    locations: tuple[str, ...]
    collision_free: bool = False
    _used: dict = field(default_factory=dict, repr=False)

    def _pool(self, kind: str) -> tuple[str, ...]:
        if kind == "name":
            return self.names
        if kind == "location":
            return self.locations
        raise ValueError(f"unknown surface kind {kind!r}")

    def draw(self, kind: str, rng: random.Random) -> str:
        pool = self._pool(kind)
        if not pool:
            raise PoolExhausted(f"empty {kind} pool")
        if not self.collision_free:
            return rng.choice(pool)
        used = self._used.setdefault(kind, set())
        available = [s for s in pool if s not in used]
        if not available:
            raise PoolExhausted(
                f"{kind} pool of size {len(pool)} cannot supply another distinct surface"
            )
        choice = rng.choice(available)
        used.add(choice)
        return choice

    def reset(self) -> None:
        self._used.clear()


@dataclass
class LocaleSurfaceGenerator:
    """Combinatorial given-name x surname and venue-pattern generator."""

    language: str = "pt"

    def draw(self, kind: str, rng: random.Random) -> str:
        if self.language == "pt":
            given, surnames = wordlists.PT_GIVEN, wordlists.PT_SURNAMES
            prefixes, suffixes = (
                wordlists.PT_LOCATION_PREFIXES,
                wordlists.PT_LOCATION_SUFFIXES,
            )
        else:
            given, surnames = wordlists.EN_GIVEN, wordlists.EN_SURNAMES
            prefixes, suffixes = (
                wordlists.EN_LOCATION_PREFIXES,
                wordlists.EN_LOCATION_SUFFIXES,
            )
        if kind == "name":
            parts = [rng.choice(given), rng.choice(surnames)]
            if rng.random() < 0.4:
                parts.insert(1, rng.choice(surnames))
            return " ".join(parts)
        if kind == "location":
            return f"{rng.choice(prefixes)} {rng.choice(suffixes)}"
        raise ValueError(f"unknown surface kind {kind!r}")


def default_generator(language: str = "pt") -> SurfaceGenerator:
    return LocaleSurfaceGenerator(language=language)
