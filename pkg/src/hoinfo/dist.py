"""Discrete joint distributions over finite alphabets.

A :class:`JointDistribution` is a dense probability table stored flat in
row-major order (last variable varies fastest), together with the
:class:`SystemShape` naming each variable and its alphabet size. Every
information quantity in the package is assembled from
:func:`subset_entropy`, so this module is the single numerical kernel.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

DEFAULT_STATE_CAP = 2**26
NORMALIZATION_TOL = 1e-6


class DistributionError(ValueError):
    """Base class for malformed shapes, tables and subsets."""


class LengthMismatchError(DistributionError):
    pass


class NegativeProbabilityError(DistributionError):
    pass


class NormalizationError(DistributionError):
    pass


class StateCapError(DistributionError):
    pass


class InvalidSubsetError(DistributionError):
    pass


class ZeroProbabilityError(DistributionError):
    """Raised by :func:`condition` when the conditioning event has mass 0.

    Callers averaging over conditionals catch this and skip the term,
    following the ``0 * (anything) = 0`` convention.
    """


@dataclass(frozen=True)
class SystemShape:
    names: tuple[str, ...]
    cards: tuple[int, ...]
    target_index: int | None = None
    state_cap: int = field(default=DEFAULT_STATE_CAP, compare=False, repr=False)
    # only marginalization onto the empty block builds a variable-free shape
    _allow_empty: bool = field(default=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(str(s) for s in self.names))
        object.__setattr__(self, "cards", tuple(int(c) for c in self.cards))
        if len(self.names) != len(self.cards):
            raise DistributionError("names and cardinalities differ in length")
        if len(self.cards) == 0 and not self._allow_empty:
            raise DistributionError("a system needs at least one variable")
        if any(c < 1 for c in self.cards):
            raise DistributionError(f"cardinalities must be >= 1, got {self.cards}")
        if len(set(self.names)) != len(self.names):
            raise DistributionError(f"variable names must be unique, got {self.names}")
        if self.target_index is not None and not 0 <= self.target_index < len(self.cards):
            raise DistributionError(f"target index {self.target_index} out of range")
        if self.n_states > self.state_cap:
            raise StateCapError(
                f"{self.n_states} states exceeds the dense-storage cap of {self.state_cap}"
            )

    @classmethod
    def from_cards(cls, cards: Sequence[int], target: bool = False, **kwargs) -> "SystemShape":
        """Binary-style naming: ``X1..Xn`` plus a trailing ``Y`` when ``target``."""
        cards = list(cards)
        names = [f"X{i + 1}" for i in range(len(cards) - int(target))]
        if target:
            names.append("Y")
        return cls(tuple(names), tuple(cards), len(cards) - 1 if target else None, **kwargs)

    @property
    def n_vars(self) -> int:
        return len(self.cards)

    @property
    def n_states(self) -> int:
        return math.prod(self.cards)

    @property
    def target(self) -> str | None:
        return None if self.target_index is None else self.names[self.target_index]

    @property
    def sources(self) -> tuple[int, ...]:
        """All indices except the target."""
        return tuple(i for i in range(self.n_vars) if i != self.target_index)

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise InvalidSubsetError(f"unknown variable {name!r}") from None

    def subset(self, indices: Iterable[int]) -> tuple[int, ...]:
        """Validate ``indices`` and return them as a sorted tuple without repeats."""
        out = set()
        for i in indices:
            i = int(i)
            if not 0 <= i < self.n_vars:
                raise InvalidSubsetError(f"variable index {i} out of range for {self.n_vars} variables")
            out.add(i)
        return tuple(sorted(out))

    def restrict(self, keep: Sequence[int]) -> "SystemShape":
        keep = tuple(keep)
        target = keep.index(self.target_index) if self.target_index in keep else None
        return SystemShape(
            tuple(self.names[i] for i in keep),
            tuple(self.cards[i] for i in keep),
            target,
            state_cap=self.state_cap,
            _allow_empty=True,
        )

    def with_target(self, target: int | None) -> "SystemShape":
        return SystemShape(self.names, self.cards, target, state_cap=self.state_cap)


@dataclass(frozen=True, eq=False)
class JointDistribution:
    shape: SystemShape
    probs: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def table(self) -> np.ndarray:
        """View of the probabilities with one axis per variable."""
        return self.probs.reshape(self.shape.cards)

    @property
    def n_vars(self) -> int:
        return self.shape.n_vars

    def __repr__(self):
        return f"JointDistribution({self.shape.names}, cards={self.shape.cards})"


def make_distribution(shape: SystemShape, probs, tol: float = NORMALIZATION_TOL) -> JointDistribution:
    p = np.array(probs, dtype=float).ravel()
    if p.size != shape.n_states:
        raise LengthMismatchError(f"expected {shape.n_states} probabilities, got {p.size}")
    if np.any(~np.isfinite(p)):
        raise NormalizationError("probabilities must be finite")
    if np.any(p < 0):
        raise NegativeProbabilityError(f"negative probability at state {int(np.argmax(p < 0))}")
    total = p.sum()
    if abs(total - 1.0) > tol:
        raise NormalizationError(f"probabilities sum to {total!r}, not 1 within {tol}")
    p = p / total
    p.setflags(write=False)
    return JointDistribution(shape, p)


def _from_table(shape: SystemShape, table: np.ndarray) -> JointDistribution:
    # Internal constructor for tables already normalized by construction.
    p = np.ascontiguousarray(table, dtype=float).ravel()
    p = p / p.sum()
    p.setflags(write=False)
    return JointDistribution(shape, p)


def marginalize(dist: JointDistribution, keep: Iterable[int]) -> JointDistribution:
    keep = dist.shape.subset(keep)
    if len(keep) == dist.n_vars:
        return dist
    drop = tuple(i for i in range(dist.n_vars) if i not in keep)
    table = dist.table.sum(axis=drop)
    return _from_table(dist.shape.restrict(keep), np.atleast_1d(table))


def condition(dist: JointDistribution, on: Iterable[int], values: Sequence[int]) -> tuple[JointDistribution, float]:
    """Distribution of the remaining variables given ``X_on = values``.

    Returns the conditional and the weight ``P(X_on = values)``; raises
    :class:`ZeroProbabilityError` when that weight is 0.
    """
    on = dist.shape.subset(on)
    values = tuple(int(v) for v in values)
    if len(values) != len(on):
        raise InvalidSubsetError("need one value per conditioning variable")
    for i, v in zip(on, values):
        if not 0 <= v < dist.shape.cards[i]:
            raise InvalidSubsetError(f"value {v} out of range for {dist.shape.names[i]}")
    index = [slice(None)] * dist.n_vars
    for i, v in zip(on, values):
        index[i] = v
    sub = dist.table[tuple(index)]
    weight = float(sub.sum())
    if weight <= 0.0:
        raise ZeroProbabilityError(f"P({dict(zip(on, values))}) = 0")
    rest = tuple(i for i in range(dist.n_vars) if i not in on)
    return _from_table(dist.shape.restrict(rest), np.atleast_1d(sub)), weight


def iter_conditionals(dist: JointDistribution, on: Iterable[int]) -> Iterator[tuple[JointDistribution, float]]:
    """Yield ``(conditional, weight)`` over every positive-mass value of ``on``."""
    on = dist.shape.subset(on)
    for values in itertools.product(*(range(dist.shape.cards[i]) for i in on)):
        try:
            yield condition(dist, on, values)
        except ZeroProbabilityError:
            continue


def logb(x: np.ndarray, base: float) -> np.ndarray:
    if base == 2:
        return np.log2(x)
    return np.log(x) / math.log(base)


def entropy(dist: JointDistribution | np.ndarray, base: float = 2) -> float:
    p = dist.probs if isinstance(dist, JointDistribution) else np.asarray(dist, dtype=float).ravel()
    p = p[p > 0]
    h = -float(np.sum(p * logb(p, base)))
    # -sum p log p of a point mass may come out as -0.0
    return h + 0.0


def subset_entropy(dist: JointDistribution, subset: Iterable[int], base: float = 2) -> float:
    """Entropy of the marginal on ``subset``; the empty subset has entropy 0."""
    subset = dist.shape.subset(subset)
    if not subset:
        return 0.0
    key = (subset, base)
    h = dist._cache.get(key)
    if h is None:
        drop = tuple(i for i in range(dist.n_vars) if i not in subset)
        marg = dist.table.sum(axis=drop) if drop else dist.probs
        h = entropy(np.asarray(marg), base)
        dist._cache[key] = h
    return h


# --------------------------------------------------------------------- #
# JSON distribution files
# --------------------------------------------------------------------- #

_FILE_KEYS = {"variables", "target", "probs"}


def dumps(dist: JointDistribution) -> str:
    shape = dist.shape
    variables = ",\n    ".join(
        json.dumps({"name": n, "cardinality": c}) for n, c in zip(shape.names, shape.cards)
    )
    probs = ", ".join(format(float(p), ".17g") for p in dist.probs)
    parts = [f'  "variables": [\n    {variables}\n  ]']
    if shape.target is not None:
        parts.append(f'  "target": {json.dumps(shape.target)}')
    parts.append(f'  "probs": [{probs}]')
    return "{\n" + ",\n".join(parts) + "\n}\n"


def loads(text: str, state_cap: int = DEFAULT_STATE_CAP) -> JointDistribution:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DistributionError(f"invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise DistributionError("distribution file must hold a JSON object")
    unknown = set(obj) - _FILE_KEYS
    if unknown:
        raise DistributionError(f"unknown keys: {sorted(unknown)}")
    for key in ("variables", "probs"):
        if key not in obj:
            raise DistributionError(f"missing key {key!r}")
    variables = obj["variables"]
    if not isinstance(variables, list) or not all(
        isinstance(v, dict) and set(v) == {"name", "cardinality"} for v in variables
    ):
        raise DistributionError("'variables' must be a list of {name, cardinality} objects")
    names = tuple(v["name"] for v in variables)
    cards = []
    for v in variables:
        c = v["cardinality"]
        if not isinstance(c, int) or isinstance(c, bool):
            raise DistributionError(f"cardinality of {v['name']!r} must be an integer")
        cards.append(c)
    shape = SystemShape(names, tuple(cards), state_cap=state_cap)
    if obj.get("target") is not None:
        shape = shape.with_target(shape.index_of(obj["target"]))
    probs = obj["probs"]
    if not isinstance(probs, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in probs
    ):
        raise DistributionError("'probs' must be a flat list of numbers")
    return make_distribution(shape, probs)


def save(dist: JointDistribution, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(dist))


def load(path, state_cap: int = DEFAULT_STATE_CAP) -> JointDistribution:
    with open(path) as fh:
        return loads(fh.read(), state_cap=state_cap)
