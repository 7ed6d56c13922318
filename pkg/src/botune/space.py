"""Hyper-parameter search spaces.

A space is an ordered list of named, typed dimensions. Assignments are plain
dicts mapping dimension names to values. Every dimension maps to a single
coordinate of the unit hyper-cube: real intervals affinely, log intervals
affinely in log10, integers and categoricals onto centered grid cells.

Spaces are immutable; mutations (bound shrinks, added dimensions) return new
spaces. Bound shrinks are clamped so that at least a quarter of the current
interval always survives, so repeated rule firings can never collapse a
dimension to a point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import (
    DuplicateDimension,
    DimensionMismatch,
    InvalidMutation,
    InvalidSpace,
    OutOfDomain,
    UnknownDimension,
)

Value = Union[float, int, str]
Assignment = dict  # name -> Value, one entry per dimension


# --- domains ----------------------------------------------------------------

@dataclass(frozen=True)
class RealLinear:
    """Closed real interval [min, max], sampled and encoded uniformly."""

    min: float
    max: float

    def __post_init__(self):
        if not (math.isfinite(self.min) and math.isfinite(self.max)):
            raise InvalidSpace(f"non-finite bounds ({self.min}, {self.max})")
        if self.min >= self.max:
            raise InvalidSpace(f"empty real interval [{self.min}, {self.max}]")


@dataclass(frozen=True)
class RealLog:
    """Closed real interval [min, max] with min > 0, uniform in log10."""

    min: float
    max: float

    def __post_init__(self):
        if not (math.isfinite(self.min) and math.isfinite(self.max)):
            raise InvalidSpace(f"non-finite bounds ({self.min}, {self.max})")
        if self.min <= 0:
            raise InvalidSpace(f"log interval needs min > 0, got {self.min}")
        if self.min >= self.max:
            raise InvalidSpace(f"empty log interval [{self.min}, {self.max}]")


@dataclass(frozen=True)
class IntegerRange:
    """Integer interval {min, ..., max}; a single-member range is allowed."""

    min: int
    max: int

    def __post_init__(self):
        if self.min != int(self.min) or self.max != int(self.max):
            raise InvalidSpace(f"integer bounds must be integral ({self.min}, {self.max})")
        if self.min > self.max:
            raise InvalidSpace(f"empty integer range [{self.min}, {self.max}]")


@dataclass(frozen=True)
class Categorical:
    """Ordered set of distinct labels."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if len(labels) < 1:
            raise InvalidSpace("categorical needs at least one label")
        if len(set(labels)) != len(labels):
            raise InvalidSpace(f"duplicate categorical labels: {labels}")


Domain = Union[RealLinear, RealLog, IntegerRange, Categorical]


@dataclass(frozen=True)
class Dimension:
    """A named domain, optionally tagged with a semantic role.

    Roles ("unit_count", "batch_size", "learning_rate", "dropout_rate",
    "l2_coefficient") let tuning rules and built-in trainees find the
    hyper-parameter they act on without hard-coding dimension names.
    """

    name: str
    domain: Domain
    role: str | None = None


@dataclass(frozen=True)
class SearchSpace:
    """Ordered, uniquely-named dimensions; insertion order is the encoding order."""

    dimensions: tuple[Dimension, ...]

    def __post_init__(self):
        dims = tuple(self.dimensions)
        object.__setattr__(self, "dimensions", dims)
        names = [d.name for d in dims]
        if len(set(names)) != len(names):
            raise InvalidSpace(f"duplicate dimension names: {names}")

    def __len__(self):
        return len(self.dimensions)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dimensions)

    def dimension(self, name: str) -> Dimension:
        for d in self.dimensions:
            if d.name == name:
                return d
        raise UnknownDimension(name)

    def index(self, name: str) -> int:
        for i, d in enumerate(self.dimensions):
            if d.name == name:
                return i
        raise UnknownDimension(name)

    def by_role(self, role: str) -> tuple[Dimension, ...]:
        return tuple(d for d in self.dimensions if d.role == role)


# --- mutations ----------------------------------------------------------------

@dataclass(frozen=True)
class RaiseLowerBound:
    name: str
    new_min: float


@dataclass(frozen=True)
class LowerUpperBound:
    name: str
    new_max: float


@dataclass(frozen=True)
class AddDimension:
    name: str
    domain: Domain
    role: str | None = None


@dataclass(frozen=True)
class RemoveCategoricalMembers:
    name: str
    labels: tuple[str, ...]


SpaceMutation = Union[RaiseLowerBound, LowerUpperBound, AddDimension, RemoveCategoricalMembers]


# --- membership and sampling -----------------------------------------------

def _value_in_domain(domain: Domain, value) -> bool:
    if isinstance(domain, (RealLinear, RealLog)):
        if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
            return False
        v = float(value)
        return math.isfinite(v) and domain.min <= v <= domain.max
    if isinstance(domain, IntegerRange):
        if isinstance(value, bool):
            return False
        if isinstance(value, (int, np.integer)):
            v = int(value)
        elif isinstance(value, (float, np.floating)) and float(value).is_integer():
            v = int(value)
        else:
            return False
        return domain.min <= v <= domain.max
    return value in domain.labels


def contains(space: SearchSpace, assignment: Assignment) -> bool:
    """True iff the assignment is complete for the space and every value is in-domain."""
    if set(assignment) != set(space.names):
        return False
    return all(_value_in_domain(d.domain, assignment[d.name]) for d in space.dimensions)


def sample_random(space: SearchSpace, rng: np.random.Generator) -> Assignment:
    """Draw one uniform assignment: log domains uniform in log10, the rest uniform.

    Raises InvalidSpace for an empty space.
    """
    if len(space) == 0:
        raise InvalidSpace("cannot sample from an empty space")
    out: Assignment = {}
    for d in space.dimensions:
        dom = d.domain
        if isinstance(dom, RealLinear):
            out[d.name] = float(rng.uniform(dom.min, dom.max))
        elif isinstance(dom, RealLog):
            out[d.name] = float(10.0 ** rng.uniform(math.log10(dom.min), math.log10(dom.max)))
        elif isinstance(dom, IntegerRange):
            out[d.name] = int(rng.integers(dom.min, dom.max + 1))
        else:
            out[d.name] = dom.labels[int(rng.integers(len(dom.labels)))]
    return out


# --- unit-cube encoding ----------------------------------------------------

def _encode_value(domain: Domain, value) -> float:
    if isinstance(domain, RealLinear):
        return (float(value) - domain.min) / (domain.max - domain.min)
    if isinstance(domain, RealLog):
        lo, hi = math.log10(domain.min), math.log10(domain.max)
        return (math.log10(float(value)) - lo) / (hi - lo)
    if isinstance(domain, IntegerRange):
        if domain.min == domain.max:
            return 0.5
        return (int(value) - domain.min) / (domain.max - domain.min)
    k = len(domain.labels)
    return (domain.labels.index(value) + 0.5) / k


def decode_value(domain: Domain, u: float):
    """Map one unit-interval coordinate into the domain (see decode)."""
    if isinstance(domain, RealLinear):
        # clamp: the affine map can overshoot the bounds by an ulp at u = 1
        return float(min(max(domain.min + u * (domain.max - domain.min), domain.min), domain.max))
    if isinstance(domain, RealLog):
        lo, hi = math.log10(domain.min), math.log10(domain.max)
        return float(min(max(10.0 ** (lo + u * (hi - lo)), domain.min), domain.max))
    if isinstance(domain, IntegerRange):
        if domain.min == domain.max:
            return domain.min
        return int(domain.min + math.floor(u * (domain.max - domain.min) + 0.5))
    k = len(domain.labels)
    return domain.labels[min(int(math.floor(u * k)), k - 1)]


def encode(space: SearchSpace, assignment: Assignment) -> np.ndarray:
    """Map an in-domain assignment to a point in [0, 1]^d.

    Reals map affinely (log10-affinely for log domains); integers map onto
    (v - min)/(max - min), collapsing to 0.5 for single-member ranges; a
    categorical with k labels maps index i to (i + 0.5)/k.
    """
    if not contains(space, assignment):
        raise OutOfDomain(f"assignment {assignment} not in space {space.names}")
    return np.array(
        [_encode_value(d.domain, assignment[d.name]) for d in space.dimensions], dtype=float
    )


def decode(space: SearchSpace, point) -> Assignment:
    """Inverse of encode, rounding to the nearest integer/categorical member."""
    u = np.asarray(point, dtype=float)
    if u.shape != (len(space),):
        raise DimensionMismatch(f"expected {len(space)} coordinates, got shape {u.shape}")
    if np.any(u < 0.0) or np.any(u > 1.0) or not np.all(np.isfinite(u)):
        raise OutOfDomain(f"coordinates outside [0, 1]: {u}")
    return {d.name: decode_value(d.domain, float(ui)) for d, ui in zip(space.dimensions, u)}


def snap_to_grid(space: SearchSpace, points: np.ndarray) -> np.ndarray:
    """Snap unit-cube points to encodings of realizable assignments.

    Real columns pass through; integer and categorical columns move to the
    center of the grid cell they decode into. Equivalent to encode(decode(u))
    applied row-wise, but vectorized over an (m, d) batch.
    """
    out = np.array(points, dtype=float, copy=True)
    if out.ndim != 2 or out.shape[1] != len(space):
        raise DimensionMismatch(f"expected (m, {len(space)}) points, got {out.shape}")
    for j, d in enumerate(space.dimensions):
        dom = d.domain
        if isinstance(dom, IntegerRange):
            if dom.min == dom.max:
                out[:, j] = 0.5
            else:
                span = dom.max - dom.min
                out[:, j] = np.floor(out[:, j] * span + 0.5) / span
        elif isinstance(dom, Categorical):
            k = len(dom.labels)
            idx = np.minimum(np.floor(out[:, j] * k), k - 1)
            out[:, j] = (idx + 0.5) / k
    return out


# --- mutation application ----------------------------------------------------

def _quarter(lo: float, hi: float) -> float:
    return (hi - lo) / 4.0


def _raised_domain(domain: Domain, new_min: float) -> Domain:
    if isinstance(domain, RealLinear):
        m = max(float(new_min), domain.min)
        if m >= domain.max:
            m = domain.max - _quarter(domain.min, domain.max)
        return RealLinear(m, domain.max)
    if isinstance(domain, RealLog):
        m = max(float(new_min), domain.min)
        if m >= domain.max:
            llo, lhi = math.log10(domain.min), math.log10(domain.max)
            m = 10.0 ** (lhi - _quarter(llo, lhi))
        return RealLog(m, domain.max)
    if isinstance(domain, IntegerRange):
        m = max(int(new_min), domain.min)
        if m >= domain.max:
            m = domain.max - math.ceil((domain.max - domain.min) / 4.0)
        return IntegerRange(m, domain.max)
    raise InvalidMutation("bound change on a categorical dimension")


def _lowered_domain(domain: Domain, new_max: float) -> Domain:
    if isinstance(domain, RealLinear):
        m = min(float(new_max), domain.max)
        if m <= domain.min:
            m = domain.min + _quarter(domain.min, domain.max)
        return RealLinear(domain.min, m)
    if isinstance(domain, RealLog):
        m = min(float(new_max), domain.max)
        if m <= domain.min:
            llo, lhi = math.log10(domain.min), math.log10(domain.max)
            m = 10.0 ** (llo + _quarter(llo, lhi))
        return RealLog(domain.min, m)
    if isinstance(domain, IntegerRange):
        m = min(int(new_max), domain.max)
        if m <= domain.min:
            m = domain.min + math.ceil((domain.max - domain.min) / 4.0)
        return IntegerRange(domain.min, m)
    raise InvalidMutation("bound change on a categorical dimension")


def apply_mutation(space: SearchSpace, mutation: SpaceMutation) -> SearchSpace:
    """Return a new space with the mutation applied.

    Bound changes never invert or expand an interval: a shrink that would
    leave min >= max is clamped so a quarter of the current interval (top for
    lower-bound raises, bottom for upper-bound cuts) survives.
    """
    if isinstance(mutation, AddDimension):
        if mutation.name in space.names:
            raise DuplicateDimension(mutation.name)
        return SearchSpace(space.dimensions + (Dimension(mutation.name, mutation.domain, mutation.role),))

    if mutation.name not in space.names:
        raise UnknownDimension(mutation.name)

    new_dims = []
    for d in space.dimensions:
        if d.name != mutation.name:
            new_dims.append(d)
            continue
        if isinstance(mutation, RaiseLowerBound):
            dom = _raised_domain(d.domain, mutation.new_min)
        elif isinstance(mutation, LowerUpperBound):
            dom = _lowered_domain(d.domain, mutation.new_max)
        else:  # RemoveCategoricalMembers
            if not isinstance(d.domain, Categorical):
                raise InvalidMutation(f"{d.name} is not categorical")
            kept = tuple(l for l in d.domain.labels if l not in mutation.labels)
            if not kept:
                raise InvalidMutation(f"removal would empty categorical {d.name}")
            dom = Categorical(kept)
        new_dims.append(Dimension(d.name, dom, d.role))
    return SearchSpace(tuple(new_dims))


def domain_midpoint(domain: Domain):
    """Interval midpoint: arithmetic for linear/integer domains, geometric for log."""
    if isinstance(domain, RealLinear):
        return 0.5 * (domain.min + domain.max)
    if isinstance(domain, RealLog):
        return 10.0 ** (0.5 * (math.log10(domain.min) + math.log10(domain.max)))
    if isinstance(domain, IntegerRange):
        return int(math.floor((domain.min + domain.max) / 2.0 + 0.5))
    raise InvalidMutation("categorical domains have no midpoint")


# --- serialization ------------------------------------------------------------

_KIND_TAGS = {RealLinear: "real", RealLog: "real_log", IntegerRange: "int", Categorical: "cat"}


def domain_to_dict(domain: Domain) -> dict:
    tag = _KIND_TAGS[type(domain)]
    if isinstance(domain, Categorical):
        return {"kind": tag, "labels": list(domain.labels)}
    return {"kind": tag, "min": domain.min, "max": domain.max}


def domain_from_dict(data: dict) -> Domain:
    kind = data.get("kind")
    if kind == "real":
        return RealLinear(float(data["min"]), float(data["max"]))
    if kind == "real_log":
        return RealLog(float(data["min"]), float(data["max"]))
    if kind == "int":
        return IntegerRange(int(data["min"]), int(data["max"]))
    if kind == "cat":
        return Categorical(tuple(data["labels"]))
    raise InvalidSpace(f"unknown domain kind {kind!r}")


def space_to_dict(space: SearchSpace) -> list[dict]:
    out = []
    for d in space.dimensions:
        entry = {"name": d.name, **domain_to_dict(d.domain)}
        if d.role is not None:
            entry["role"] = d.role
        out.append(entry)
    return out


def space_from_dict(entries: list[dict]) -> SearchSpace:
    dims = tuple(
        Dimension(e["name"], domain_from_dict(e), e.get("role")) for e in entries
    )
    return SearchSpace(dims)
