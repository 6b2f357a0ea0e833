"""High-order information metrics on discrete joint distributions.

Direct definitions (TC, DTC, interaction information, O-information,
RSI) are written as signed sums of :func:`~hoinfo.dist.subset_entropy`
terms. Each accepts ``given=`` for the conditional version, evaluated on
the same entropy kernel via ``H(S | C) = H(S, C) - H(C)``.

:func:`conditional_metric` is the second, definitional route to
conditional quantities: it literally averages the metric over the
conditional distributions. The ``*_via_*`` functions re-derive the
direct quantities through chain decompositions; agreement between the
two routes is what the identity suite checks.
"""

from __future__ import annotations

import itertools
import math
import numbers
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Sequence

from .dist import (
    InvalidSubsetError,
    JointDistribution,
    SystemShape,
    iter_conditionals,
    subset_entropy,
)

II_SUBSET_CAP = 20


class OverlapError(InvalidSubsetError):
    """Blocks passed to a metric share variables."""


def units_for(base: float) -> str:
    if base == 2:
        return "bits"
    if base == math.e:
        return "nats"
    return f"log{base:g}"


def _ordered(shape: SystemShape, indices: Iterable[int] | None) -> tuple[int, ...]:
    # Validates like SystemShape.subset but keeps caller order (it fixes the chain cuts).
    if indices is None:
        return tuple(range(shape.n_vars))
    out: list[int] = []
    for i in indices:
        i = int(i)
        if not 0 <= i < shape.n_vars:
            raise InvalidSubsetError(f"variable index {i} out of range for {shape.n_vars} variables")
        if i not in out:
            out.append(i)
    return tuple(out)


def _disjoint(*blocks: Sequence[int]) -> None:
    seen: set[int] = set()
    for block in blocks:
        if seen & set(block):
            raise OverlapError(f"blocks overlap on variables {sorted(seen & set(block))}")
        seen |= set(block)


def _h(dist: JointDistribution, block: Iterable[int], given: Sequence[int], base: float) -> float:
    block = tuple(block)
    if not given:
        return subset_entropy(dist, block, base)
    return subset_entropy(dist, block + tuple(given), base) - subset_entropy(dist, given, base)


def _resolve_sources(dist, sources, target):
    if target is None:
        target = dist.shape.target_index
        if target is None:
            raise InvalidSubsetError("no target given and the distribution has none")
    target = int(target)
    if not 0 <= target < dist.n_vars:
        raise InvalidSubsetError(f"target index {target} out of range")
    if sources is None:
        sources = [i for i in range(dist.n_vars) if i != target]
    sources = _ordered(dist.shape, sources)
    if target in sources:
        raise OverlapError(f"target {target} is also listed as a source")
    return sources, target


# --------------------------------------------------------------------- #
# Direct definitions
# --------------------------------------------------------------------- #


def mutual_information(dist, a, b, given=(), base: float = 2) -> float:
    a, b, given = (_ordered(dist.shape, x) for x in (a, b, given))
    _disjoint(a, b, given)
    if not a or not b:
        return 0.0
    return (
        _h(dist, a, given, base)
        + _h(dist, b, given, base)
        - _h(dist, a + b, given, base)
    )


def conditional_mutual_information(dist, a, b, c, base: float = 2) -> float:
    return mutual_information(dist, a, b, given=c, base=base)


def total_correlation(dist, subset=None, given=(), base: float = 2) -> float:
    """``sum_j H(X_j) - H(X)`` over the variables in ``subset``."""
    subset, given = _ordered(dist.shape, subset), _ordered(dist.shape, given)
    _disjoint(subset, given)
    if len(subset) < 2:
        return 0.0
    return sum(_h(dist, (j,), given, base) for j in subset) - _h(dist, subset, given, base)


def dual_total_correlation(dist, subset=None, given=(), base: float = 2) -> float:
    """``H(X) - sum_j H(X_j | X_-j)``."""
    subset, given = _ordered(dist.shape, subset), _ordered(dist.shape, given)
    _disjoint(subset, given)
    if len(subset) < 2:
        return 0.0
    h_all = _h(dist, subset, given, base)
    residual = 0.0
    for j in subset:
        rest = tuple(i for i in subset if i != j)
        residual += h_all - _h(dist, rest, given, base)
    return h_all - residual


def interaction_information(dist, subset=None, given=(), base: float = 2, cap: int = II_SUBSET_CAP) -> float:
    """Alternating sum of entropies over all non-empty sub-blocks of ``subset``.

    Costs ``2**len(subset)`` entropy evaluations, so subsets larger than
    ``cap`` are refused.
    """
    subset, given = _ordered(dist.shape, subset), _ordered(dist.shape, given)
    _disjoint(subset, given)
    if len(subset) < 2:
        raise InvalidSubsetError("interaction information needs at least 2 variables")
    if len(subset) > cap:
        raise InvalidSubsetError(
            f"{len(subset)} variables exceeds the subset-enumeration cap of {cap}"
        )
    total = 0.0
    for k in range(1, len(subset) + 1):
        sign = 1.0 if k % 2 else -1.0
        for gamma in itertools.combinations(subset, k):
            total += sign * _h(dist, gamma, given, base)
    return total


def three_way_interaction(dist, a, b, c, given=(), base: float = 2) -> float:
    """``I(A;B;C) = I(A;B) - I(A;B|C)`` for disjoint blocks; empty blocks give 0."""
    a, b, c, given = (_ordered(dist.shape, x) for x in (a, b, c, given))
    _disjoint(a, b, c, given)
    if not (a and b and c):
        return 0.0
    return (
        mutual_information(dist, a, b, given=given, base=base)
        - mutual_information(dist, a, b, given=given + c, base=base)
    )


def o_information(dist, subset=None, given=(), base: float = 2) -> float:
    """``(n-2) H(X) + sum_j [H(X_j) - H(X_-j)]``; 0 for fewer than 3 variables."""
    subset, given = _ordered(dist.shape, subset), _ordered(dist.shape, given)
    _disjoint(subset, given)
    n = len(subset)
    if n < 2:
        return 0.0
    total = (n - 2) * _h(dist, subset, given, base)
    for j in subset:
        rest = tuple(i for i in subset if i != j)
        total += _h(dist, (j,), given, base) - _h(dist, rest, given, base)
    return total


def rsi(dist, sources=None, target=None, given=(), base: float = 2) -> float:
    """``sum_j I(X_j; Y) - I(X; Y)``."""
    sources, target = _resolve_sources(dist, sources, target)
    given = _ordered(dist.shape, given)
    _disjoint(sources, (target,), given)
    if len(sources) < 2:
        return 0.0
    y = (target,)
    return sum(mutual_information(dist, (j,), y, given, base) for j in sources) - mutual_information(
        dist, sources, y, given, base
    )


METRICS: dict[str, Callable[..., float]] = {
    "tc": total_correlation,
    "dtc": dual_total_correlation,
    "o_info": o_information,
    "rsi": rsi,
    "ii": interaction_information,
    "mi": mutual_information,
    "three_way": three_way_interaction,
}


def conditional_metric(metric: str | Callable[..., float], dist: JointDistribution, given, *args, base: float = 2) -> float:
    """Average of ``metric`` over the conditionals of ``dist`` given ``given``.

    ``args`` are the metric's variable arguments (blocks or a target index)
    in the indexing of ``dist``; they are re-indexed for each conditional.
    Zero-probability values of ``given`` contribute nothing.
    """
    fn = METRICS[metric] if isinstance(metric, str) else metric
    given = dist.shape.subset(given)
    if not given:
        return fn(dist, *args, base=base)
    keep = [i for i in range(dist.n_vars) if i not in given]
    remap = {old: new for new, old in enumerate(keep)}

    def translate(arg):
        if arg is None:
            return [remap[i] for i in keep]
        if isinstance(arg, numbers.Integral):
            if arg in given:
                raise OverlapError(f"variable {arg} is both an argument and conditioned on")
            return remap[arg]
        arg = list(arg)
        if set(arg) & set(given):
            raise OverlapError(f"variables {sorted(set(arg) & set(given))} are also conditioned on")
        return [remap[int(i)] for i in arg]

    local = [translate(a) for a in args]
    return sum(w * fn(cond, *local, base=base) for cond, w in iter_conditionals(dist, given))


# --------------------------------------------------------------------- #
# Re-derivations through chain decompositions
# --------------------------------------------------------------------- #


def tc_via_chain(dist, subset=None, base: float = 2) -> float:
    """``TC(X) = sum_{j=2}^n I(X^{j-1}; X_j)``."""
    x = _ordered(dist.shape, subset)
    return sum(mutual_information(dist, x[: j - 1], (x[j - 1],), base=base) for j in range(2, len(x) + 1))


def dtc_via_chain(dist, subset=None, base: float = 2) -> float:
    """``DTC(X) = I(X^{n-1}; X_n) + sum_{j=2}^{n-1} I(X^{j-1}; X_j | X_{j+1}^n)``."""
    x = _ordered(dist.shape, subset)
    n = len(x)
    if n < 2:
        return 0.0
    total = mutual_information(dist, x[:-1], (x[-1],), base=base)
    for j in range(2, n):
        total += mutual_information(dist, x[: j - 1], (x[j - 1],), given=x[j:], base=base)
    return total


def o_info_via_decomposition(dist, subset=None, base: float = 2) -> float:
    """``sum_{j=2}^{n-1} I(X^{j-1}; X_j; X_{j+1}^n)``."""
    x = _ordered(dist.shape, subset)
    if len(x) < 3:
        raise InvalidSubsetError("the three-way decomposition needs at least 3 variables")
    return sum(o_info_cut_terms(dist, x, base=base))


def o_info_cut_terms(dist, subset=None, base: float = 2) -> list[float]:
    """Per-cut terms ``I(X^{j-1}; X_j; X_{j+1}^n)`` for ``j = 2..n-1``."""
    x = _ordered(dist.shape, subset)
    return [
        three_way_interaction(dist, x[: j - 1], (x[j - 1],), x[j:], base=base)
        for j in range(2, len(x))
    ]


def rsi_via_decomposition(dist, sources=None, target=None, base: float = 2) -> float:
    """``sum_{j=2}^n I(X^{j-1}; X_j; Y)``."""
    x, y = _resolve_sources(dist, sources, target)
    return sum(three_way_interaction(dist, x[: j - 1], (x[j - 1],), (y,), base=base) for j in range(2, len(x) + 1))


def rsi_via_oinfo(dist, sources=None, target=None, base: float = 2) -> float:
    """``Omega(X, Y) - Omega(X | Y)``, the conditional term by averaging."""
    x, y = _resolve_sources(dist, sources, target)
    return o_information(dist, x + (y,), base=base) - conditional_metric("o_info", dist, (y,), x, base=base)


def rsi_via_tc(dist, sources=None, target=None, base: float = 2) -> float:
    """``TC(X) - TC(X | Y)``, the conditional term by averaging."""
    x, y = _resolve_sources(dist, sources, target)
    return total_correlation(dist, x, base=base) - conditional_metric("tc", dist, (y,), x, base=base)


def oinfo_via_rsi_chain(dist, subset=None, base: float = 2) -> float:
    """``sum_{j=2}^{n-1} RSI(X^j; X_{j+1} | X_{j+2}^n)``, each term by averaging."""
    x = _ordered(dist.shape, subset)
    total = 0.0
    for j in range(2, len(x)):
        total += conditional_metric("rsi", dist, x[j + 1 :], x[:j], x[j], base=base)
    return total


def chain_rule_check(dist, a, b, c, d, base: float = 2) -> float:
    """Residual of ``I(A;B;CD) = I(A;B;C) + I(A;B;D|C)``."""
    a, b, c, d = (_ordered(dist.shape, x) for x in (a, b, c, d))
    _disjoint(a, b, c, d)
    lhs = three_way_interaction(dist, a, b, c + d, base=base)
    rhs = three_way_interaction(dist, a, b, c, base=base)
    if c:
        rhs += conditional_metric("three_way", dist, c, a, b, d, base=base)
    else:
        rhs += three_way_interaction(dist, a, b, d, base=base)
    return abs(lhs - rhs)


# --------------------------------------------------------------------- #
# Bounds
# --------------------------------------------------------------------- #


class Interval(NamedTuple):
    lower: float
    upper: float

    def contains(self, value: float, tol: float = 1e-9) -> bool:
        return self.lower - tol <= value <= self.upper + tol


def oinfo_bounds(shape: SystemShape, subset=None, base: float = 2) -> Interval:
    """``|Omega| <= (n-2) log max_j |X_j|``."""
    x = _ordered(shape, subset)
    k = max(len(x) - 2, 0)
    if k == 0:
        return Interval(0.0, 0.0)
    width = k * math.log(max(shape.cards[i] for i in x), base)
    return Interval(-width, width)


def rsi_bounds(shape: SystemShape, sources=None, target=None, base: float = 2) -> Interval:
    """``-log|T'| <= RSI <= (n-1) log|T|``.

    ``|T| = min(|Y|, max_j |X_j|)`` and ``|T'| = min(|Y|, prod_j |X_j|)``.
    """
    if target is None:
        target = shape.target_index
    if target is None:
        raise InvalidSubsetError("RSI bounds need a target")
    if sources is None:
        sources = [i for i in range(shape.n_vars) if i != target]
    x = _ordered(shape, sources)
    if target in x:
        raise OverlapError("target is also listed as a source")
    if len(x) < 2:
        return Interval(0.0, 0.0)
    card_y = shape.cards[target]
    t_upper = min(card_y, max(shape.cards[i] for i in x))
    t_lower = min(card_y, math.prod(shape.cards[i] for i in x))
    return Interval(-math.log(t_lower, base) + 0.0, (len(x) - 1) * math.log(t_upper, base))


def bounds(shape: SystemShape, sources=None, target=None, base: float = 2) -> dict[str, Interval]:
    """O-information bounds over ``sources`` and, with a target, RSI bounds."""
    out = {"o_info": oinfo_bounds(shape, sources, base)}
    if target is None:
        target = shape.target_index
    if target is not None:
        out["rsi"] = rsi_bounds(shape, sources, target, base)
    return out


# --------------------------------------------------------------------- #
# Reports
# --------------------------------------------------------------------- #


@dataclass
class MetricReport:
    tc: float
    dtc: float
    o_info: float
    interaction_info: float | None = None
    rsi: float | None = None
    residuals: dict[str, float] = field(default_factory=dict)
    units: str = "bits"

    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def to_dict(self) -> dict:
        out: dict = {"tc": self.tc, "dtc": self.dtc, "o_info": self.o_info}
        if self.interaction_info is not None:
            out["interaction_info"] = self.interaction_info
        if self.rsi is not None:
            out["rsi"] = self.rsi
        out["residuals"] = dict(self.residuals)
        out["units"] = self.units
        return out


def metric_report(dist, sources=None, target=None, base: float = 2, ii_cap: int = II_SUBSET_CAP) -> MetricReport:
    """All metrics on ``sources`` (default: every non-target variable).

    RSI is included when a target is given or the shape carries one.
    """
    if target is None:
        target = dist.shape.target_index
    if sources is None:
        sources = [i for i in range(dist.n_vars) if i != target]
    x = _ordered(dist.shape, sources)
    if target is not None and target in x:
        raise OverlapError("target is also listed as a source")

    tc = total_correlation(dist, x, base=base)
    dtc = dual_total_correlation(dist, x, base=base)
    omega = o_information(dist, x, base=base)
    report = MetricReport(tc=tc, dtc=dtc, o_info=omega, units=units_for(base))
    if 2 <= len(x) <= ii_cap:
        report.interaction_info = interaction_information(dist, x, base=base)

    res = report.residuals
    res["oinfo_tc_minus_dtc"] = abs(omega - (tc - dtc))
    res["tc_chain_expansion"] = abs(tc - tc_via_chain(dist, x, base=base))
    res["dtc_chain_expansion"] = abs(dtc - dtc_via_chain(dist, x, base=base))
    if len(x) >= 3:
        res["oinfo_three_way_decomposition"] = abs(omega - o_info_via_decomposition(dist, x, base=base))
        res["oinfo_rsi_chain"] = abs(omega - oinfo_via_rsi_chain(dist, x, base=base))
    if len(x) == 3:
        res["oinfo_equals_interaction_info"] = abs(omega - report.interaction_info)

    if target is not None:
        r = rsi(dist, x, target, base=base)
        report.rsi = r
        res["rsi_tc_difference"] = abs(r - rsi_via_tc(dist, x, target, base=base))
        res["rsi_three_way_decomposition"] = abs(r - rsi_via_decomposition(dist, x, target, base=base))
        res["rsi_via_oinfo"] = abs(r - rsi_via_oinfo(dist, x, target, base=base))
    return report
