"""Synthetic drift streams, the STAGGER concept generator, and CSV ingestion.

A StreamSpec describes a real-valued stream as distribution segments
joined by sudden or gradual transitions; generate() realizes it
together with the ground-truth drift positions. stagger_stream()
produces labeled categorical instances whose target concept switches on
a schedule. Both are bit-reproducible from their seed on any platform
because all randomness comes from the package's own generator.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from typing import Iterator, Union

from .rng import SplitMix64

__all__ = [
    "Bernoulli",
    "Gaussian",
    "UniformChoice",
    "Sudden",
    "Gradual",
    "StreamSpec",
    "GroundTruth",
    "generate",
    "SIZES",
    "COLORS",
    "SHAPES",
    "STAGGER_ATTRIBUTE_VALUES",
    "StaggerInstance",
    "stagger_stream",
    "CsvFormatError",
    "read_csv_stream",
]


@dataclass(frozen=True, slots=True)
class Bernoulli:
    """Draws 1.0 with probability p, else 0.0."""

    p: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p!r}")

    def sample(self, rng: SplitMix64) -> float:
        return rng.bernoulli(self.p)


@dataclass(frozen=True, slots=True)
class Gaussian:
    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if not self.sigma >= 0.0 or not math.isfinite(self.sigma):
            raise ValueError(f"sigma must be finite and non-negative, got {self.sigma!r}")
        if not math.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu!r}")

    def sample(self, rng: SplitMix64) -> float:
        return rng.gauss(self.mu, self.sigma)


@dataclass(frozen=True, slots=True)
class UniformChoice:
    """Uniform draw from a fixed finite set of values."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError("values must be non-empty")
        for v in self.values:
            if not math.isfinite(v):
                raise ValueError(f"values must be finite, got {v!r}")

    def sample(self, rng: SplitMix64) -> float:
        return rng.choice(self.values)


Distribution = Union[Bernoulli, Gaussian, UniformChoice]


@dataclass(frozen=True, slots=True)
class Sudden:
    """Distribution switches in one step at the segment boundary."""


@dataclass(frozen=True, slots=True)
class Gradual:
    """New distribution phased in linearly over the first ``width`` steps."""

    width: int

    def __post_init__(self) -> None:
        if self.width < 1:
            raise ValueError(f"width must be positive, got {self.width!r}")


Transition = Union[Sudden, Gradual]


@dataclass(frozen=True, slots=True)
class GroundTruth:
    """Stream indices at which each new concept begins, ascending."""

    positions: tuple[int, ...]

    def __post_init__(self) -> None:
        for prev, cur in zip(self.positions, self.positions[1:]):
            if cur <= prev:
                raise ValueError(f"positions must be strictly increasing, got {self.positions!r}")


@dataclass(frozen=True, slots=True)
class StreamSpec:
    """Distribution segments, per-boundary transitions, and a seed.

    A gradual transition's width must stay below both adjacent segment
    lengths so transition zones cannot overlap a further boundary.
    """

    segments: tuple[tuple[Distribution, int], ...]
    transitions: tuple[Transition, ...]
    seed: int

    def __post_init__(self) -> None:
        if not self.segments:
            raise ValueError("need at least one segment")
        for _, length in self.segments:
            if length < 1:
                raise ValueError(f"segment lengths must be positive, got {length!r}")
        if len(self.transitions) != len(self.segments) - 1:
            raise ValueError(
                f"{len(self.segments)} segments need {len(self.segments) - 1} "
                f"transitions, got {len(self.transitions)}"
            )
        for i, tr in enumerate(self.transitions):
            if isinstance(tr, Gradual):
                limit = min(self.segments[i][1], self.segments[i + 1][1])
                if tr.width >= limit:
                    raise ValueError(
                        f"gradual width {tr.width} must be below both adjacent "
                        f"segment lengths (min {limit})"
                    )

    @property
    def total_length(self) -> int:
        return sum(length for _, length in self.segments)

    @classmethod
    def from_dict(cls, doc: dict) -> "StreamSpec":
        """Parse the JSON form: {"seed": ..., "segments": [...], "transitions": [...]}.

        Segment entries look like {"dist": "bernoulli", "p": 0.2, "len": 20000},
        with "gaussian" taking mu/sigma and "uniform" taking values. A
        transition is the string "sudden" or {"kind": "gradual", "width": w}.
        """
        try:
            seed = int(doc["seed"])
            raw_segments = doc["segments"]
            raw_transitions = doc.get("transitions", [])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"bad stream document: {exc}") from exc
        segments = []
        transitions = []
        try:
            for entry in raw_segments:
                kind = entry.get("dist")
                if kind == "bernoulli":
                    dist: Distribution = Bernoulli(float(entry["p"]))
                elif kind == "gaussian":
                    dist = Gaussian(float(entry["mu"]), float(entry["sigma"]))
                elif kind == "uniform":
                    dist = UniformChoice(tuple(float(v) for v in entry["values"]))
                else:
                    raise ValueError(f"unknown distribution kind {kind!r}")
                segments.append((dist, int(entry["len"])))
            for entry in raw_transitions:
                if entry == "sudden":
                    transitions.append(Sudden())
                elif isinstance(entry, dict) and entry.get("kind") == "gradual":
                    transitions.append(Gradual(int(entry["width"])))
                else:
                    raise ValueError(f"unknown transition {entry!r}")
        except (KeyError, TypeError) as exc:
            # a missing or mistyped field is a document problem too
            raise ValueError(f"bad stream document: {exc!r}") from exc
        return cls(tuple(segments), tuple(transitions), seed)


def generate(spec: StreamSpec) -> tuple[list[float], GroundTruth]:
    """Realize a spec into values plus ground-truth drift positions.

    Ground truth marks the first index of each new segment, for sudden
    and gradual transitions alike; a gradual zone covers the first
    ``width`` elements of the new segment, where element j is drawn
    from the new distribution with probability (j + 1) / width and from
    the old one otherwise.
    """
    rng = SplitMix64(spec.seed)
    values: list[float] = []
    positions: list[int] = []
    for i, (dist, length) in enumerate(spec.segments):
        if i > 0:
            positions.append(len(values))
        ramp = 0
        if i > 0 and isinstance(spec.transitions[i - 1], Gradual):
            ramp = spec.transitions[i - 1].width
        old_dist = spec.segments[i - 1][0] if i > 0 else None
        for j in range(length):
            if j < ramp and rng.uniform() >= (j + 1) / ramp:
                values.append(old_dist.sample(rng))
            else:
                values.append(dist.sample(rng))
    return values, GroundTruth(tuple(positions))


SIZES = ("small", "medium", "large")
COLORS = ("red", "green", "blue")
SHAPES = ("circle", "square", "triangle")

# attribute domains in feature order, ready for NaiveBayesModel
STAGGER_ATTRIBUTE_VALUES = (SIZES, COLORS, SHAPES)


@dataclass(frozen=True, slots=True)
class StaggerInstance:
    size: str
    color: str
    shape: str
    label: bool

    @property
    def features(self) -> tuple[str, str, str]:
        return (self.size, self.color, self.shape)


def _concept_1(size: str, color: str, shape: str) -> bool:
    return size == "small" and color == "red"


def _concept_2(size: str, color: str, shape: str) -> bool:
    return color == "green" or shape == "circle"


def _concept_3(size: str, color: str, shape: str) -> bool:
    return size == "medium" or size == "large"


_CONCEPTS = {1: _concept_1, 2: _concept_2, 3: _concept_3}


def stagger_stream(
    schedule: list[tuple[int, int]] | tuple[tuple[int, int], ...],
    seed: int,
) -> tuple[list[StaggerInstance], GroundTruth]:
    """Labeled instances with uniform attributes and scheduled concepts.

    ``schedule`` lists (concept id, length) phases; ids select the
    classic target functions: 1 is small-and-red, 2 is green-or-circle,
    3 is medium-or-large. Ground truth marks each phase boundary.
    """
    if not schedule:
        raise ValueError("schedule must have at least one phase")
    instances: list[StaggerInstance] = []
    positions: list[int] = []
    rng = SplitMix64(seed)
    for i, (concept_id, length) in enumerate(schedule):
        concept = _CONCEPTS.get(concept_id)
        if concept is None:
            raise ValueError(f"unknown concept id {concept_id!r}, expected 1, 2, or 3")
        if length < 1:
            raise ValueError(f"phase lengths must be positive, got {length!r}")
        if i > 0:
            positions.append(len(instances))
        for _ in range(length):
            size = rng.choice(SIZES)
            color = rng.choice(COLORS)
            shape = rng.choice(SHAPES)
            instances.append(StaggerInstance(size, color, shape, concept(size, color, shape)))
    return instances, GroundTruth(tuple(positions))


class CsvFormatError(ValueError):
    """A CSV stream cell failed to parse; the message names the line."""


def read_csv_stream(
    path: str | os.PathLike[str], column: int | str = 0
) -> Iterator[float]:
    """Yield one float per row from a CSV file, streaming.

    ``column`` selects by index or by header name. A header row is
    optional when the column is an index (detected by trying to parse
    the first row) and required when it is a name.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None:
            return
        if isinstance(column, str):
            try:
                index = first.index(column)
            except ValueError:
                raise CsvFormatError(
                    f"{path}: no column named {column!r} in header {first!r}"
                ) from None
        else:
            index = column
            if index >= len(first):
                raise CsvFormatError(
                    f"{path}: line 1: need column {index}, row has {len(first)} cells"
                )
            try:
                yield float(first[index])
            except ValueError:
                pass  # treat the first row as a header
        for row in reader:
            if not row:
                continue
            if index >= len(row):
                raise CsvFormatError(
                    f"{path}: line {reader.line_num}: need column {index}, "
                    f"row has {len(row)} cells"
                )
            try:
                yield float(row[index])
            except ValueError as exc:
                raise CsvFormatError(f"{path}: line {reader.line_num}: {exc}") from None
