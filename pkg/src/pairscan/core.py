"""Shared domain types: conditions, sample containers, score matrices, relations."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

Pair = tuple[int, int]


class DataError(ValueError):
    """Raised for malformed or inconsistent input data."""


class NumericError(ArithmeticError):
    """Raised when a numerical routine produces non-finite values."""


def canonical_pair(i: int, j: int) -> Pair:
    i, j = int(i), int(j)
    if i == j:
        raise DataError(f"self-pair ({i}, {i}) is not a valid perturbation pair")
    return (i, j) if i < j else (j, i)


def all_pairs(n: int) -> list[Pair]:
    """All unordered pairs of ``range(n)`` in canonical (lexicographic) order."""
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


# ---------------------------------------------------------------------------
# Conditions


@dataclass(frozen=True, order=True)
class Condition:
    """Experimental condition: control, a single perturbation, or a double.

    Use the :meth:`control`, :meth:`single` and :meth:`double` constructors;
    doubles are canonicalised so that ``i < j``.
    """

    rank: int
    i: int = -1
    j: int = -1

    @classmethod
    def control(cls) -> "Condition":
        return cls(0)

    @classmethod
    def single(cls, i: int) -> "Condition":
        if int(i) < 0:
            raise DataError(f"negative perturbation index {i}")
        return cls(1, int(i))

    @classmethod
    def double(cls, i: int, j: int) -> "Condition":
        a, b = canonical_pair(i, j)
        if a < 0:
            raise DataError(f"negative perturbation index {a}")
        return cls(2, a, b)

    @property
    def kind(self) -> str:
        return ("control", "single", "double")[self.rank]

    @property
    def indices(self) -> tuple[int, ...]:
        return ((), (self.i,), (self.i, self.j))[self.rank]

    def __str__(self) -> str:
        if self.rank == 0:
            return "control"
        if self.rank == 1:
            return f"single({self.i})"
        return f"double({self.i},{self.j})"

    @classmethod
    def from_record(cls, rec: Mapping) -> "Condition":
        kind = rec.get("kind")
        try:
            if kind == "control":
                return cls.control()
            if kind == "single":
                return cls.single(rec["i"])
            if kind == "double":
                return cls.double(rec["i"], rec["j"])
        except KeyError as exc:
            raise DataError(f"condition {rec!r} lacks field {exc}") from None
        raise DataError(f"unknown condition kind {kind!r}")

    def to_record(self) -> dict:
        rec: dict = {"kind": self.kind}
        if self.rank >= 1:
            rec["i"] = self.i
        if self.rank == 2:
            rec["j"] = self.j
        return rec


CONTROL = Condition.control()


def as_samples(data, name: str = "samples") -> np.ndarray:
    """Validate and return a 2-D float64 sample matrix (rows are samples)."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DataError(f"{name}: expected a non-empty 2-D sample matrix, got shape {arr.shape}")
    bad = ~np.isfinite(arr)
    if bad.any():
        row = int(np.argwhere(bad)[0, 0])
        raise DataError(f"{name}: non-finite value in row {row}")
    return arr


@dataclass(frozen=True)
class ExperimentDataset:
    """Per-condition sample matrices sharing one feature dimension."""

    n_perturbations: int
    samples: Mapping[Condition, np.ndarray]
    names: tuple[str, ...] | None = None
    metadata: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if CONTROL not in self.samples:
            raise DataError("control condition absent")
        clean = {}
        dim = None
        for cond in sorted(self.samples):
            for idx in cond.indices:
                if idx >= self.n_perturbations:
                    raise DataError(f"{cond}: index {idx} >= n_perturbations={self.n_perturbations}")
            arr = as_samples(self.samples[cond], str(cond))
            if dim is None:
                dim = arr.shape[1]
            elif arr.shape[1] != dim:
                raise DataError(f"{cond}: dimension {arr.shape[1]} differs from {dim}")
            arr.setflags(write=False)
            clean[cond] = arr
        if self.names is not None and len(self.names) != self.n_perturbations:
            raise DataError("names list length differs from n_perturbations")
        object.__setattr__(self, "samples", clean)
        object.__setattr__(self, "_dim", dim)

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def conditions(self) -> list[Condition]:
        return list(self.samples)

    def __contains__(self, cond: Condition) -> bool:
        return cond in self.samples

    def __getitem__(self, cond: Condition) -> np.ndarray:
        try:
            return self.samples[cond]
        except KeyError:
            raise DataError(f"condition {cond} absent from dataset") from None

    def double_pairs(self) -> list[Pair]:
        return [(c.i, c.j) for c in self.samples if c.rank == 2]

    def require(self, *conds: Condition) -> None:
        missing = [str(c) for c in conds if c not in self.samples]
        if missing:
            raise DataError("missing condition(s): " + ", ".join(missing))

    def label(self, i: int) -> str:
        return self.names[i] if self.names else str(i)


# ---------------------------------------------------------------------------
# Score matrix


class ScoreMatrix:
    """Symmetric n x n matrix of pairwise scores with an observed mask.

    Only the strict upper triangle is stored, so ``get(i, j) == get(j, i)``
    holds by construction. Unobserved entries are NaN internally.
    """

    __slots__ = ("n", "_upper")

    def __init__(self, n: int, entries: Mapping[Pair, float] | None = None):
        self.n = int(n)
        if self.n < 1:
            raise DataError("score matrix needs n >= 1")
        upper = np.full((self.n, self.n), np.nan)
        for (i, j), v in (entries or {}).items():
            a, b = canonical_pair(i, j)
            if b >= self.n or a < 0:
                raise DataError(f"pair ({i}, {j}) out of range for n={self.n}")
            v = float(v)
            if not np.isfinite(v):
                raise DataError(f"non-finite score at ({a}, {b})")
            upper[a, b] = v
        upper.setflags(write=False)
        self._upper = upper

    @classmethod
    def from_dense(cls, R, mask=None) -> "ScoreMatrix":
        """Build from a square array using its strict upper triangle."""
        R = np.asarray(R, dtype=np.float64)
        if R.ndim != 2 or R.shape[0] != R.shape[1]:
            raise DataError(f"expected a square matrix, got shape {R.shape}")
        n = R.shape[0]
        iu, ju = np.triu_indices(n, 1)
        keep = np.ones(len(iu), bool) if mask is None else np.asarray(mask, bool)[iu, ju]
        return cls(n, {(int(a), int(b)): R[a, b] for a, b, k in zip(iu, ju, keep) if k})

    def get(self, i: int, j: int) -> float | None:
        a, b = canonical_pair(i, j)
        v = self._upper[a, b]
        return None if np.isnan(v) else float(v)

    def is_observed(self, i: int, j: int) -> bool:
        a, b = canonical_pair(i, j)
        return not np.isnan(self._upper[a, b])

    def observed(self) -> dict[Pair, float]:
        iu, ju = np.nonzero(~np.isnan(self._upper))
        return {(int(a), int(b)): float(self._upper[a, b]) for a, b in zip(iu, ju)}

    def n_observed(self) -> int:
        return int((~np.isnan(self._upper)).sum())

    def is_complete(self) -> bool:
        return self.n_observed() == self.n * (self.n - 1) // 2

    def with_entries(self, entries: Mapping[Pair, float]) -> "ScoreMatrix":
        merged = self.observed()
        merged.update({canonical_pair(*p): v for p, v in entries.items()})
        return ScoreMatrix(self.n, merged)

    def restrict(self, pairs: Iterable[Pair]) -> "ScoreMatrix":
        obs = self.observed()
        keep = {canonical_pair(*p) for p in pairs}
        return ScoreMatrix(self.n, {p: v for p, v in obs.items() if p in keep})

    def to_dense(self, fill: float = np.nan) -> np.ndarray:
        """Symmetric dense copy; unobserved entries and the diagonal get ``fill``."""
        out = np.where(np.isnan(self._upper), fill, self._upper)
        low = np.tril_indices(self.n, -1)
        out[low] = out.T[low]
        np.fill_diagonal(out, fill)
        return out

    def values(self, pairs: Iterable[Pair]) -> np.ndarray:
        pairs = list(pairs)
        if not pairs:
            return np.empty(0)
        a, b = np.array(pairs).T
        return self._upper[np.minimum(a, b), np.maximum(a, b)].copy()

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScoreMatrix) or other.n != self.n:
            return NotImplemented
        return bool(np.array_equal(self._upper, other._upper, equal_nan=True))

    def __repr__(self) -> str:
        return f"ScoreMatrix(n={self.n}, observed={self.n_observed()})"


# ---------------------------------------------------------------------------
# Relations


class RelationSet(frozenset):
    """Set of canonical unordered pairs flagged as known interactions."""

    def __new__(cls, pairs: Iterable[Pair] = ()):
        return super().__new__(cls, (canonical_pair(*p) for p in pairs))

    def count_in(self, pairs: Iterable[Pair]) -> int:
        return sum(1 for p in pairs if canonical_pair(*p) in self)


# ---------------------------------------------------------------------------
# Randomness


def make_rng(seed: int | np.random.Generator | None) -> np.random.Generator:
    """PCG64 generator; the only source of randomness across the package."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise ValueError("an explicit seed is required")
    return np.random.Generator(np.random.PCG64(int(seed)))


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent stream for ``(seed, *keys)``, stable regardless of call order."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def seed_from(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**63 - 1))

