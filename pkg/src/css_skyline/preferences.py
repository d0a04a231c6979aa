"""Preference specifications: which attributes to optimize and in which direction."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

DIRECTIONS = ("min", "max")


@dataclass(frozen=True)
class PreferenceSpec:
    attributes: tuple[str, ...]
    directions: tuple[str, ...]

    def __post_init__(self):
        attrs = tuple(self.attributes)
        dirs = tuple(d.lower() for d in self.directions)
        if not attrs:
            raise ValueError("preference set must be non-empty")
        if len(attrs) != len(dirs):
            raise ValueError("one direction per preference attribute is required")
        if len(set(attrs)) != len(attrs):
            raise ValueError(f"duplicate preference attributes in {attrs}")
        bad = [d for d in dirs if d not in DIRECTIONS]
        if bad:
            raise ValueError(f"direction must be min or max, got {bad[0]!r}")
        object.__setattr__(self, "attributes", attrs)
        object.__setattr__(self, "directions", dirs)

    @classmethod
    def parse(cls, text: str) -> "PreferenceSpec":
        """Parse ``"Price:min,Commute:max"``; a bare name means min."""
        attrs, dirs = [], []
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            name, _, d = item.partition(":")
            attrs.append(name.strip())
            dirs.append((d.strip() or "min"))
        return cls(tuple(attrs), tuple(dirs))

    @classmethod
    def all_min(cls, attrs: Iterable[str]) -> "PreferenceSpec":
        attrs = tuple(attrs)
        return cls(attrs, ("min",) * len(attrs))

    def direction(self, attr: str) -> str:
        return self.directions[self.attributes.index(attr)]

    def pairs(self) -> list[tuple[str, str]]:
        """Unordered preference pairs in declaration order."""
        return list(combinations(self.attributes, 2))

    def orientation(self, a: str, b: str) -> int:
        """+1 when both attributes share a direction, -1 otherwise."""
        return 1 if self.direction(a) == self.direction(b) else -1

    def validate(self, names: Iterable[str]) -> None:
        known = set(names)
        missing = [a for a in self.attributes if a not in known]
        if missing:
            raise ValueError(f"preference attributes not found: {missing}")

    def __str__(self):
        return ",".join(f"{a}:{d}" for a, d in zip(self.attributes, self.directions))
