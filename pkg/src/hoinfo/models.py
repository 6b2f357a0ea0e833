"""Graphical-model classes, their M-projections, and synthetic systems.

Every class here is a product of conditional factors ``q(block | cond)``
whose blocks partition the variables. The KL-minimizing member for a
given ``p`` takes each factor from ``p`` itself, so projections are
closed-form and no optimizer is involved.

Class names on the wire: ``tail-to-tail``, ``head-to-head``,
``k-tail:<j>``, ``k-head:<j>`` (``j`` is the 1-based cut position).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import metrics
from .dist import (
    DistributionError,
    JointDistribution,
    SystemShape,
    logb,
    make_distribution,
)

TAIL_TO_TAIL = "tail-to-tail"
HEAD_TO_HEAD = "head-to-head"
K_TAIL = "k-tail"
K_HEAD = "k-head"
KINDS = (TAIL_TO_TAIL, HEAD_TO_HEAD, K_TAIL, K_HEAD)


class ModelClassError(DistributionError):
    pass


@dataclass(frozen=True)
class ModelClass:
    """One of the four factorization classes over ``shape``.

    ``tail-to-tail``: ``q(y) prod_j q(x_j | y)``.
    ``head-to-head``: ``q(y | x) prod_j q(x_j)``.
    ``k-tail`` at cut ``j``: ``q(x_j) q(x^{j-1} | x_j) q(x_{j+1}^n | x_j)``.
    ``k-head`` at cut ``j``: ``q(x_j | x_-j) q(x^{j-1}) q(x_{j+1}^n)``.

    The tail/head classes need ``shape.target_index``; the K classes cut the
    variables in shape order and ignore any target designation.
    """

    kind: str
    shape: SystemShape
    cut: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ModelClassError(f"unknown model class {self.kind!r}")
        if self.kind in (TAIL_TO_TAIL, HEAD_TO_HEAD):
            if self.shape.target_index is None:
                raise ModelClassError(f"{self.kind} needs a shape with a target variable")
            if self.cut is not None:
                raise ModelClassError(f"{self.kind} takes no cut index")
        else:
            n = self.shape.n_vars
            if self.cut is None or not 2 <= self.cut <= n - 1:
                raise ModelClassError(f"cut index must satisfy 2 <= j <= {n - 1}, got {self.cut}")

    @classmethod
    def parse(cls, name: str, shape: SystemShape) -> "ModelClass":
        kind, _, cut = name.partition(":")
        if cut:
            try:
                return cls(kind, shape, int(cut))
            except ValueError:
                raise ModelClassError(f"bad cut index in {name!r}") from None
        return cls(kind, shape)

    def __str__(self):
        return self.kind if self.cut is None else f"{self.kind}:{self.cut}"

    def blocks(self) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
        """``(before, pivot, after)`` for K classes, ``(sources, (target,), ())`` otherwise."""
        if self.cut is None:
            t = self.shape.target_index
            return self.shape.sources, (t,), ()
        j = self.cut
        idx = tuple(range(self.shape.n_vars))
        return idx[: j - 1], (idx[j - 1],), idx[j:]

    def factors(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        """``(block, cond)`` pairs; the blocks partition the variables."""
        if self.kind == TAIL_TO_TAIL:
            xs, y, _ = self.blocks()
            return [(y, ())] + [((x,), y) for x in xs]
        if self.kind == HEAD_TO_HEAD:
            xs, y, _ = self.blocks()
            return [(y, xs)] + [((x,), ()) for x in xs]
        a, b, c = self.blocks()
        if self.kind == K_TAIL:
            return [(b, ()), (a, b), (c, b)]
        return [(b, a + c), (a, ()), (c, ())]


@dataclass(frozen=True)
class ProjectionResult:
    projected: JointDistribution
    divergence: float


def _conditional_factor(table: np.ndarray, block, cond) -> np.ndarray:
    # p(block | cond) with singleton axes for every other variable;
    # rows with p(cond) = 0 become uniform.
    axes = set(block) | set(cond)
    joint = table.sum(axis=tuple(i for i in range(table.ndim) if i not in axes), keepdims=True)
    marg = joint.sum(axis=tuple(block), keepdims=True)
    n_block = math.prod(table.shape[i] for i in block)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(marg > 0, joint / np.where(marg > 0, marg, 1.0), 1.0 / n_block)
    return out


def _check_shape(p: JointDistribution, cls: ModelClass) -> None:
    if p.shape.cards != cls.shape.cards or (
        cls.cut is None and p.shape.target_index != cls.shape.target_index
    ):
        raise ModelClassError(f"distribution {p.shape} does not match class shape {cls.shape}")


def closed_form_divergence(p: JointDistribution, cls: ModelClass, base: float = 2) -> float:
    """``min_{q in cls} D(p || q)`` from entropies.

    tail-to-tail: ``TC(X|Y)``; head-to-head: ``TC(X)``;
    k-tail: ``I(X^{j-1}; X_{j+1}^n | X_j)``; k-head: ``I(X^{j-1}; X_{j+1}^n)``.
    """
    _check_shape(p, cls)
    a, b, c = cls.blocks()
    if cls.kind == TAIL_TO_TAIL:
        return metrics.total_correlation(p, a, given=b, base=base)
    if cls.kind == HEAD_TO_HEAD:
        return metrics.total_correlation(p, a, base=base)
    if cls.kind == K_TAIL:
        return metrics.mutual_information(p, a, c, given=b, base=base)
    return metrics.mutual_information(p, a, c, base=base)


def project(p: JointDistribution, cls: ModelClass, base: float = 2) -> ProjectionResult:
    _check_shape(p, cls)
    table = p.table
    q = np.ones_like(table)
    for block, cond in cls.factors():
        q = q * _conditional_factor(table, block, cond)
    projected = make_distribution(p.shape, q.ravel())
    return ProjectionResult(projected, closed_form_divergence(p, cls, base))


def kl_divergence(p: JointDistribution, q: JointDistribution, base: float = 2) -> float:
    """``D(p || q)``; ``math.inf`` when ``p`` is not absolutely continuous w.r.t. ``q``."""
    if p.shape.cards != q.shape.cards:
        raise DistributionError(f"shape mismatch: {p.shape.cards} vs {q.shape.cards}")
    support = p.probs > 0
    if np.any(q.probs[support] <= 0):
        return math.inf
    pp, qq = p.probs[support], q.probs[support]
    return float(np.sum(pp * (logb(pp, base) - logb(qq, base)))) + 0.0


def membership_residual(p: JointDistribution, cls: ModelClass) -> float:
    """Max-norm distance between ``p`` and its projection onto ``cls``."""
    return float(np.max(np.abs(p.probs - project(p, cls).projected.probs)))


# --------------------------------------------------------------------- #
# Synthetic systems
# --------------------------------------------------------------------- #


def _uniform_over(shape: SystemShape, states) -> JointDistribution:
    probs = np.zeros(shape.n_states)
    for s in states:
        probs[np.ravel_multi_index(s, shape.cards)] = 1.0
    return make_distribution(shape, probs / probs.sum())


def gen_copy(n: int, with_target: bool = False) -> JointDistribution:
    """``X_1 = ... = X_n (= Y)`` with ``X_1`` a fair bit."""
    if n < 1:
        raise ValueError("need n >= 1")
    k = n + int(with_target)
    shape = SystemShape.from_cards([2] * k, target=with_target)
    return _uniform_over(shape, [(0,) * k, (1,) * k])


def _parity_states(k: int):
    for s in np.ndindex(*(2,) * (k - 1)):
        yield s + (sum(s) % 2,)


def gen_xor(n: int) -> JointDistribution:
    """``X_1..X_{n-1}`` fair i.i.d. bits and ``X_n`` their parity."""
    if n < 2:
        raise ValueError("need n >= 2")
    return _uniform_over(SystemShape.from_cards([2] * n), _parity_states(n))


def gen_parity_target(n: int) -> JointDistribution:
    """``X_1..X_n`` fair i.i.d. bits and target ``Y`` their parity."""
    if n < 1:
        raise ValueError("need n >= 1")
    return _uniform_over(SystemShape.from_cards([2] * (n + 1), target=True), _parity_states(n + 1))


def gen_random(shape: SystemShape, seed: int) -> JointDistribution:
    """Flat-Dirichlet draw over the full table (i.i.d. unit exponentials, normalized)."""
    rng = np.random.default_rng(seed)
    cells = rng.exponential(1.0, size=shape.n_states)
    return make_distribution(shape, cells / cells.sum())


def gen_random_in_class(cls: ModelClass, seed: int) -> JointDistribution:
    """Random member of ``cls``: every factor row is a flat-Dirichlet draw."""
    rng = np.random.default_rng(seed)
    cards = cls.shape.cards
    q = np.ones(cards)
    for block, cond in cls.factors():
        axes = sorted(set(block) | set(cond))
        local = rng.exponential(1.0, size=tuple(cards[i] for i in axes))
        block_axes = tuple(axes.index(i) for i in block)
        local = local / local.sum(axis=block_axes, keepdims=True)
        full = [1] * len(cards)
        for i in axes:
            full[i] = cards[i]
        q = q * local.reshape(full)
    return make_distribution(cls.shape, q.ravel() / q.sum())
