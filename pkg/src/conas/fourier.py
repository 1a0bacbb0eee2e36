"""Algebra of real-valued functions on the Boolean hypercube in the parity basis.

An encoding is a length-n vector over {-1, +1}.  A parity is identified by the
strictly increasing tuple of coordinates it multiplies; the empty tuple is the
constant parity.  Coordinates are zero-based everywhere, including serialized
output.

The canonical parity order (ascending degree, then lexicographic by indices)
is a frozen public contract: sampling-matrix columns and serialized expansions
both depend on it.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Protocol, runtime_checkable

import numpy as np

from .validation import check_encoding, check_encodings

ParityIndex = tuple[int, ...]

EXACT_TRANSFORM_CAP = 16
COEFFICIENT_DROP_TOLERANCE = 1e-12


@runtime_checkable
class Evaluator(Protocol):
    """A black-box objective over {-1, +1}^n encodings; lower values are better."""

    n: int
    thread_safe: bool

    def evaluate(self, alpha) -> float: ...


def parity_index(indices: Iterable[int], n: int | None = None) -> ParityIndex:
    """Canonicalize coordinates into a sorted tuple, rejecting duplicates."""
    out = tuple(sorted(int(i) for i in indices))
    for a, b in zip(out, out[1:]):
        if a == b:
            raise ValueError(f"duplicate coordinate {a} in parity index")
    if out and out[0] < 0:
        raise ValueError(f"negative coordinate {out[0]} in parity index")
    if n is not None and out and out[-1] >= n:
        raise ValueError(f"coordinate {out[-1]} out of range for dimension {n}")
    return out


def canonical_key(s: ParityIndex) -> tuple[int, ParityIndex]:
    """Sort key realizing the canonical parity order."""
    return (len(s), s)


def parity_eval(indices: Iterable[int], alpha) -> float:
    """Product of the selected coordinates of an encoding; the empty product is +1."""
    alpha = check_encoding(alpha)
    result = 1
    for i in indices:
        i = int(i)
        if not 0 <= i < alpha.shape[0]:
            raise ValueError(
                f"parity coordinate {i} out of range for encoding of length {alpha.shape[0]}"
            )
        result *= int(alpha[i])
    return float(result)


def enumerate_parities(n: int, degree: int) -> list[ParityIndex]:
    """All parities of degree <= degree over n coordinates, in canonical order."""
    if n < 0:
        raise ValueError("dimension must be nonnegative")
    if not 0 <= degree <= n:
        raise ValueError(f"degree must lie in [0, {n}], got {degree}")
    out: list[ParityIndex] = []
    for size in range(degree + 1):
        out.extend(itertools.combinations(range(n), size))
    return out


@dataclass(frozen=True, eq=True)
class FourierExpansion:
    """A sparse parity expansion: a coefficient map over subsets of [0, n).

    Coefficients that are exactly zero are dropped on construction; duplicate
    keys that canonicalize to the same parity are summed.  Instances are
    immutable and safe to share between threads.
    """

    n: int
    terms: Mapping[ParityIndex, float]

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("dimension must be nonnegative")
        cleaned: dict[ParityIndex, float] = {}
        for s, c in self.terms.items():
            s = parity_index(s, self.n)
            cleaned[s] = cleaned.get(s, 0.0) + float(c)
        cleaned = {s: c for s, c in cleaned.items() if c != 0.0}
        ordered = dict(sorted(cleaned.items(), key=lambda kv: canonical_key(kv[0])))
        object.__setattr__(self, "terms", MappingProxyType(ordered))

    def __len__(self) -> int:
        return len(self.terms)

    def degree(self) -> int:
        return max((len(s) for s in self.terms), default=0)

    def variables(self) -> tuple[int, ...]:
        """Coordinates appearing in any non-constant term, ascending."""
        return tuple(sorted({i for s in self.terms if s for i in s}))

    def evaluate(self, alpha) -> float:
        alpha = check_encoding(alpha, self.n)
        total = 0.0
        for s, c in self.terms.items():
            prod = 1
            for i in s:
                prod *= int(alpha[i])
            total += c * prod
        return total

    def evaluate_batch(self, X) -> np.ndarray:
        """Evaluate every row of a (m, n) encoding array."""
        X = check_encodings(X, self.n).astype(np.float64)
        out = np.zeros(X.shape[0])
        for s, c in self.terms.items():
            if s:
                out += c * np.prod(X[:, list(s)], axis=1)
            else:
                out += c
        return out

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "terms": [{"s": list(s), "c": c} for s, c in self.terms.items()],
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "FourierExpansion":
        return cls(int(data["n"]), {tuple(t["s"]): float(t["c"]) for t in data["terms"]})


def expansion_eval(g: FourierExpansion, alpha) -> float:
    """Sum of coefficient times parity value over all terms of g."""
    return g.evaluate(alpha)


def all_encodings(n: int) -> np.ndarray:
    """All 2**n encodings; row g has coordinate i equal to +1 when bit i of g is 0."""
    if n < 0:
        raise ValueError("dimension must be nonnegative")
    if n == 0:
        return np.zeros((1, 0), dtype=np.int8)
    g = np.arange(1 << n, dtype=np.int64)
    bits = (g[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1
    return (1 - 2 * bits).astype(np.int8)


def fwht(values) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform.

    out[k] = sum_g values[g] * (-1)^popcount(k & g); the input length must be a
    power of two.  Applying it to point values in all_encodings order and
    dividing by 2**n yields parity coefficients indexed by coordinate bitmask.
    """
    a = np.array(values, dtype=np.float64, copy=True)
    size = a.shape[0]
    if size == 0 or size & (size - 1):
        raise ValueError("input length must be a power of two")
    h = 1
    while h < size:
        a = a.reshape(-1, 2, h)
        top = a[:, 0, :].copy()
        a[:, 0, :] += a[:, 1, :]
        a[:, 1, :] = top - a[:, 1, :]
        a = a.reshape(size)
        h *= 2
    return a


def evaluate_many(f, X) -> np.ndarray:
    """Evaluate an evaluator or plain callable on every row of X, in row order.

    Uses f.evaluate_batch when available, falling back to one call per row.
    """
    batch = getattr(f, "evaluate_batch", None)
    if batch is not None:
        return np.asarray(batch(X), dtype=np.float64)
    evaluate = getattr(f, "evaluate", None)
    if evaluate is None:
        evaluate = f
    return np.array([float(evaluate(row)) for row in np.asarray(X)])


def _mask_to_parity(mask: int, n: int) -> ParityIndex:
    return tuple(i for i in range(n) if (mask >> i) & 1)


def exact_transform(
    f,
    n: int,
    *,
    cap: int = EXACT_TRANSFORM_CAP,
    drop_tolerance: float = COEFFICIENT_DROP_TOLERANCE,
) -> FourierExpansion:
    """Exact parity coefficients of f over all 2**n points.

    Each coefficient is the average of f times the parity over the full
    hypercube, computed with one butterfly transform.  Coefficients with
    magnitude below drop_tolerance are removed.
    """
    if n < 0:
        raise ValueError("dimension must be nonnegative")
    if n > cap:
        raise ValueError(
            f"dimension {n} exceeds the exact-transform cap {cap}; "
            f"pass cap= explicitly if 2**{n} evaluations are acceptable"
        )
    values = evaluate_many(f, all_encodings(n))
    coeffs = fwht(values) / float(1 << n)
    keep = np.flatnonzero(np.abs(coeffs) >= drop_tolerance)
    terms = {_mask_to_parity(int(mask), n): float(coeffs[mask]) for mask in keep}
    return FourierExpansion(n, terms)


@dataclass(frozen=True, eq=True)
class Restriction:
    """A partial assignment fixing some coordinates of [0, n) to +-1 bits."""

    n: int
    fixed: Mapping[int, int]

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("dimension must be nonnegative")
        cleaned: dict[int, int] = {}
        for coord, value in self.fixed.items():
            coord = int(coord)
            value = int(value)
            if not 0 <= coord < self.n:
                raise ValueError(f"fixed coordinate {coord} out of range for dimension {self.n}")
            if value not in (-1, 1):
                raise ValueError(f"fixed value for coordinate {coord} must be -1 or +1, got {value}")
            if coord in cleaned:
                raise ValueError(f"coordinate {coord} fixed twice")
            cleaned[coord] = value
        object.__setattr__(self, "fixed", MappingProxyType(dict(sorted(cleaned.items()))))

    @classmethod
    def empty(cls, n: int) -> "Restriction":
        return cls(n, {})

    @property
    def free(self) -> tuple[int, ...]:
        """Unfixed coordinates, ascending."""
        return tuple(i for i in range(self.n) if i not in self.fixed)

    def compose(self, other: "Restriction") -> "Restriction":
        """Combine with another restriction over the same ambient dimension."""
        if other.n != self.n:
            raise ValueError(f"cannot compose restrictions over dimensions {self.n} and {other.n}")
        overlap = sorted(set(self.fixed) & set(other.fixed))
        if overlap:
            raise ValueError(f"overlapping fixed coordinates: {overlap}")
        return Restriction(self.n, {**self.fixed, **other.fixed})


def merge_point(partial, restriction: Restriction) -> np.ndarray:
    """Fill a full encoding from a partial one over the restriction's free coordinates."""
    free = restriction.free
    partial = check_encoding(partial, len(free))
    out = np.empty(restriction.n, dtype=np.int8)
    for value, coord in zip(partial, free):
        out[coord] = value
    for coord, value in restriction.fixed.items():
        out[coord] = value
    return out


def merge_points(X, restriction: Restriction) -> np.ndarray:
    """Row-wise merge_point for a batch of partial encodings."""
    free = restriction.free
    X = check_encodings(X, len(free))
    out = np.empty((X.shape[0], restriction.n), dtype=np.int8)
    if free:
        out[:, list(free)] = X
    for coord, value in restriction.fixed.items():
        out[:, coord] = value
    return out


def restrict_expansion(g: FourierExpansion, restriction: Restriction) -> FourierExpansion:
    """Expansion of the subfunction with the restricted coordinates folded in.

    Free coordinates are re-indexed by ascending original coordinate; fixed
    coordinates of each monomial become a +-1 multiplier on its coefficient,
    and colliding residual monomials are summed.
    """
    if restriction.n != g.n:
        raise ValueError(f"restriction dimension {restriction.n} != expansion dimension {g.n}")
    position = {coord: t for t, coord in enumerate(restriction.free)}
    out: dict[ParityIndex, float] = {}
    for s, c in g.terms.items():
        multiplier = 1
        residual = []
        for i in s:
            if i in restriction.fixed:
                multiplier *= restriction.fixed[i]
            else:
                residual.append(position[i])
        key = tuple(residual)
        out[key] = out.get(key, 0.0) + multiplier * c
    return FourierExpansion(len(position), out)


class RestrictedEvaluator:
    """An evaluator over the free coordinates of a restricted base evaluator."""

    def __init__(self, base, restriction: Restriction):
        if restriction.n != base.n:
            raise ValueError(f"restriction dimension {restriction.n} != evaluator dimension {base.n}")
        self.base = base
        self.restriction = restriction
        self.n = len(restriction.free)
        self.thread_safe = bool(getattr(base, "thread_safe", False))
        if getattr(base, "evaluate_batch", None) is not None:
            self.evaluate_batch = self._evaluate_batch

    def evaluate(self, alpha) -> float:
        return float(self.base.evaluate(merge_point(alpha, self.restriction)))

    def _evaluate_batch(self, X) -> np.ndarray:
        return np.asarray(self.base.evaluate_batch(merge_points(X, self.restriction)), dtype=np.float64)


def restrict_oracle(f, restriction: Restriction) -> RestrictedEvaluator:
    """Evaluator of the subfunction of f under a restriction.

    Restricting an already-restricted evaluator composes into a single
    restriction of the underlying base, so chained restrictions behave exactly
    like one combined restriction.
    """
    if isinstance(f, RestrictedEvaluator):
        if restriction.n != f.n:
            raise ValueError(f"restriction dimension {restriction.n} != evaluator dimension {f.n}")
        free = f.restriction.free
        lifted = {free[coord]: value for coord, value in restriction.fixed.items()}
        combined = f.restriction.compose(Restriction(f.restriction.n, lifted))
        return RestrictedEvaluator(f.base, combined)
    return RestrictedEvaluator(f, restriction)
