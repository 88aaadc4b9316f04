"""State types: energy spectrum, occupation distributions, square-root coordinates, masks.

All types are frozen dataclasses wrapping read-only float64 arrays. Library
functions accept either these types or plain array-likes; use
:func:`as_probs` / :func:`as_levels` to unwrap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidStateError

NORMALIZATION_TOL = 1e-12


def _frozen(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise InvalidStateError(f"{name} must be one-dimensional, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class EnergySpectrum:
    """Energy levels e_1..e_N, stored in the given order (never sorted or deduplicated)."""

    levels: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.levels, "levels")
        if arr.size < 2:
            raise InvalidStateError(f"spectrum needs at least 2 levels, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise InvalidStateError("spectrum contains non-finite energies")
        object.__setattr__(self, "levels", arr)

    def __len__(self) -> int:
        return self.levels.size

    @property
    def span(self) -> float:
        return float(self.levels.max() - self.levels.min())

    def __eq__(self, other):
        return isinstance(other, EnergySpectrum) and np.array_equal(self.levels, other.levels)

    def __hash__(self):
        return hash(self.levels.tobytes())


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    total: float
    negative_indices: tuple[int, ...] = ()
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


def validate_distribution(p, tol: float = NORMALIZATION_TOL) -> ValidationReport:
    """Check nonnegativity and normalization; never raises."""
    try:
        arr = np.asarray(as_probs(p), dtype=float)
    except (TypeError, ValueError) as exc:
        return ValidationReport(False, float("nan"), (), f"not a numeric vector: {exc}")
    if arr.ndim != 1 or arr.size == 0:
        return ValidationReport(False, float("nan"), (), f"expected a nonempty vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        bad = tuple(int(i) for i in np.flatnonzero(~np.isfinite(arr)))
        return ValidationReport(False, float("nan"), bad, f"non-finite components at {list(bad)}")
    total = float(np.sum(arr))
    neg = tuple(int(i) for i in np.flatnonzero(arr < 0))
    problems = []
    if neg:
        problems.append(f"negative components at {list(neg)}")
    if abs(total - 1.0) > tol:
        problems.append(f"sum = {total!r} (|1 - sum| > {tol:g})")
    return ValidationReport(not problems, total, neg, "; ".join(problems))


@dataclass(frozen=True)
class Distribution:
    """Occupation probabilities p_i >= 0 with sum 1 (within 1e-12)."""

    probs: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.probs, "probs")
        report = validate_distribution(arr)
        if not report:
            raise InvalidStateError(f"invalid distribution: {report.message}")
        object.__setattr__(self, "probs", arr)

    @classmethod
    def normalized(cls, values) -> Distribution:
        arr = np.array(values, dtype=float)
        if np.any(arr < 0) or not np.any(arr > 0):
            raise InvalidStateError("cannot normalize: need nonnegative values with positive sum")
        return cls(arr / np.sum(arr))

    def __len__(self) -> int:
        return self.probs.size

    def __eq__(self, other):
        return isinstance(other, Distribution) and np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash(self.probs.tobytes())


@dataclass(frozen=True)
class SqrtState:
    """Square-root coordinates y_i = sqrt(p_i); y >= 0 and (y, y) = 1."""

    coords: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.coords, "coords")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise InvalidStateError("square-root coordinates must be finite and nonnegative")
        norm2 = float(np.dot(arr, arr))
        if abs(norm2 - 1.0) > NORMALIZATION_TOL:
            raise InvalidStateError(f"(y, y) = {norm2!r} is not 1")
        object.__setattr__(self, "coords", arr)

    def __len__(self) -> int:
        return self.coords.size

    def __eq__(self, other):
        return isinstance(other, SqrtState) and np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash(self.coords.tobytes())


@dataclass(frozen=True)
class OccupationMask:
    """Zero/nonzero pattern of a distribution; at least one level occupied."""

    bits: tuple[bool, ...] = field()

    def __post_init__(self):
        bits = tuple(bool(b) for b in self.bits)
        if not any(bits):
            raise InvalidStateError("occupation mask must have at least one occupied level")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_ints(cls, values) -> OccupationMask:
        vals = list(values)
        if any(v not in (0, 1, True, False) for v in vals):
            raise InvalidStateError(f"mask entries must be 0 or 1, got {vals}")
        return cls(tuple(bool(v) for v in vals))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.bits, dtype=bool)

    @property
    def count(self) -> int:
        return sum(self.bits)

    @property
    def is_full(self) -> bool:
        return all(self.bits)

    def __len__(self) -> int:
        return len(self.bits)

    def as_ints(self) -> list[int]:
        return [int(b) for b in self.bits]

    def __str__(self) -> str:
        return "[" + ",".join(str(int(b)) for b in self.bits) + "]"


def as_probs(p) -> np.ndarray:
    if isinstance(p, Distribution):
        return p.probs
    return np.asarray(p, dtype=float)


def as_coords(y) -> np.ndarray:
    if isinstance(y, SqrtState):
        return y.coords
    return np.asarray(y, dtype=float)


def as_levels(spec) -> np.ndarray:
    if isinstance(spec, EnergySpectrum):
        return spec.levels
    return np.asarray(spec, dtype=float)


def as_mask(mask) -> OccupationMask:
    if isinstance(mask, OccupationMask):
        return mask
    return OccupationMask.from_ints(mask)


def to_sqrt(p) -> SqrtState:
    dist = p if isinstance(p, Distribution) else Distribution(p)
    return SqrtState(np.sqrt(dist.probs))


def to_probs(y) -> Distribution:
    state = y if isinstance(y, SqrtState) else SqrtState(y)
    return Distribution(state.coords * state.coords)


def mask_of(p, zero_threshold: float = 0.0) -> OccupationMask:
    if zero_threshold < 0:
        raise InvalidStateError("zero_threshold must be nonnegative")
    arr = as_probs(p)
    bits = arr > zero_threshold
    if not bits.any():
        raise InvalidStateError(f"every component is <= {zero_threshold:g}; mask would be empty")
    return OccupationMask(tuple(bits.tolist()))
