"""Sampling, plug-in fits and generalized likelihood ratio tests.

The GLRT between two model classes needs the maximum-likelihood member
of each class. For the product-of-conditionals classes in
:mod:`hoinfo.models` that member is the projection of the empirical
distribution, so ``log sup_q Lambda(S; q)`` is just the sample
log-likelihood under ``project(empirical(S), cls).projected``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from . import metrics
from .dist import DistributionError, JointDistribution, SystemShape, logb, make_distribution, subset_entropy
from .models import HEAD_TO_HEAD, K_HEAD, K_TAIL, TAIL_TO_TAIL, ModelClass, project

# λ/m computed from per-sample log-likelihoods vs. from entropies
_CROSS_CHECK_TOL = 1e-8


class SampleError(DistributionError):
    pass


@dataclass(frozen=True, eq=False)
class SampleSet:
    shape: SystemShape
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2 or data.shape[1] != self.shape.n_vars:
            raise SampleError(f"expected an m x {self.shape.n_vars} symbol matrix, got shape {data.shape}")
        if data.shape[0] < 1:
            raise SampleError("need at least one sample")
        if not np.issubdtype(data.dtype, np.integer):
            raise SampleError("symbols must be integers")
        bad = (data < 0) | (data >= np.asarray(self.shape.cards))
        if bad.any():
            row, col = map(int, np.argwhere(bad)[0])
            raise SampleError(
                f"row {row + 1}: symbol {int(data[row, col])} out of range for "
                f"{self.shape.names[col]} (cardinality {self.shape.cards[col]})"
            )
        data = data.astype(np.int64)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def m(self) -> int:
        return self.data.shape[0]

    def flat_indices(self) -> np.ndarray:
        return np.ravel_multi_index(self.data.T, self.shape.cards)


def sample(dist: JointDistribution, m: int, seed: int) -> SampleSet:
    """``m`` i.i.d. draws by inverse CDF over the flat table."""
    if m < 1:
        raise SampleError(f"m must be >= 1, got {m}")
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(dist.probs)
    # scaling by cdf[-1] keeps every draw strictly below the total mass, so
    # trailing zero-probability states are never selected
    u = rng.random(m) * cdf[-1]
    flat = np.searchsorted(cdf, u, side="right")
    data = np.stack(np.unravel_index(flat, dist.shape.cards), axis=1)
    return SampleSet(dist.shape, data)


def empirical(samples: SampleSet) -> JointDistribution:
    counts = np.bincount(samples.flat_indices(), minlength=samples.shape.n_states)
    return make_distribution(samples.shape, counts / samples.m)


def log_likelihood(samples: SampleSet, q: JointDistribution, base: float = 2) -> float:
    """``sum_k log q(sample_k)``; ``-math.inf`` if any sample has ``q = 0``."""
    if q.shape.cards != samples.shape.cards:
        raise SampleError("distribution and samples have different shapes")
    probs = q.probs[samples.flat_indices()]
    if np.any(probs <= 0):
        return -math.inf
    return float(np.sum(logb(probs, base)))


@dataclass
class GlrtResult:
    m: int
    lambda_t_per_m: float
    lambda_h_per_m: float
    glrt_per_m: float
    plugin_metric: float
    metric: str = "rsi"
    units: str = "bits"
    per_cut: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {
            "m": self.m,
            "metric": self.metric,
            "lambda_T_per_m": self.lambda_t_per_m,
            "lambda_H_per_m": self.lambda_h_per_m,
            "glrt_per_m": self.glrt_per_m,
            "plugin_metric": self.plugin_metric,
            "units": self.units,
        }
        if self.per_cut:
            out["per_cut"] = self.per_cut
        return out


def _class_loglik_per_m(samples: SampleSet, p_hat: JointDistribution, cls: ModelClass, base: float) -> float:
    q = project(p_hat, cls, base).projected
    return log_likelihood(samples, q, base) / samples.m


def _closed_form_loglik_per_m(p_hat: JointDistribution, cls: ModelClass, base: float) -> float:
    # -sum over factors of H(block | cond) at the empirical distribution
    total = 0.0
    for block, cond in cls.factors():
        total -= subset_entropy(p_hat, block + cond, base) - subset_entropy(p_hat, cond, base)
    return total


def _fit(samples: SampleSet, p_hat: JointDistribution, cls: ModelClass, base: float) -> float:
    direct = _class_loglik_per_m(samples, p_hat, cls, base)
    closed = _closed_form_loglik_per_m(p_hat, cls, base)
    if not abs(direct - closed) <= _CROSS_CHECK_TOL * max(1.0, abs(closed)):
        raise ArithmeticError(
            f"{cls}: sample log-likelihood {direct!r} disagrees with entropy form {closed!r}"
        )
    return direct


def glrt_rsi(samples: SampleSet, base: float = 2) -> GlrtResult:
    """Per-sample GLRT of tail-to-tail against head-to-head; estimates the RSI."""
    shape = samples.shape
    if shape.target_index is None:
        raise SampleError("the RSI test needs a target variable")
    p_hat = empirical(samples)
    lam_t = _fit(samples, p_hat, ModelClass(TAIL_TO_TAIL, shape), base)
    lam_h = _fit(samples, p_hat, ModelClass(HEAD_TO_HEAD, shape), base)
    return GlrtResult(
        m=samples.m,
        lambda_t_per_m=lam_t,
        lambda_h_per_m=lam_h,
        glrt_per_m=lam_t - lam_h,
        plugin_metric=metrics.rsi(p_hat, base=base),
        metric="rsi",
        units=metrics.units_for(base),
    )


def glrt_oinfo(samples: SampleSet, base: float = 2) -> GlrtResult:
    """Sum over cuts ``j = 2..n-1`` of the K-tail vs K-head GLRT; estimates Omega."""
    shape = samples.shape
    p_hat = empirical(samples)
    lam_t = lam_h = 0.0
    cuts = []
    for j in range(2, shape.n_vars):
        t = _fit(samples, p_hat, ModelClass(K_TAIL, shape, j), base)
        h = _fit(samples, p_hat, ModelClass(K_HEAD, shape, j), base)
        idx = tuple(range(shape.n_vars))
        cuts.append({
            "cut": j,
            "glrt_per_m": t - h,
            "plugin": metrics.three_way_interaction(p_hat, idx[: j - 1], (j - 1,), idx[j:], base=base),
        })
        lam_t += t
        lam_h += h
    return GlrtResult(
        m=samples.m,
        lambda_t_per_m=lam_t,
        lambda_h_per_m=lam_h,
        glrt_per_m=lam_t - lam_h,
        plugin_metric=metrics.o_information(p_hat, base=base),
        metric="o_info",
        units=metrics.units_for(base),
        per_cut=cuts,
    )


def glrt(samples: SampleSet, base: float = 2) -> GlrtResult:
    """RSI test when the shape has a target, O-information test otherwise."""
    if samples.shape.target_index is not None:
        return glrt_rsi(samples, base)
    return glrt_oinfo(samples, base)


# --------------------------------------------------------------------- #
# Convergence sweeps
# --------------------------------------------------------------------- #

SWEEP_COLUMNS = ("m", "trial", "seed", "glrt_per_m", "plugin", "analytic", "abs_error")


@dataclass(frozen=True)
class SweepRow:
    m: int
    trial: int
    seed: int
    glrt_per_m: float
    plugin: float
    analytic: float
    abs_error: float


def convergence_sweep(
    true_dist: JointDistribution,
    m_grid: Sequence[int],
    trials: int,
    base_seed: int = 0,
    base: float = 2,
) -> list[SweepRow]:
    """GLRT error against the true metric for every ``(m, trial)``.

    Trial ``t`` uses seed ``base_seed + t`` at every ``m``. The metric is
    the RSI when ``true_dist`` has a target, the O-information otherwise.
    """
    if true_dist.shape.target_index is not None:
        analytic = metrics.rsi(true_dist, base=base)
    else:
        analytic = metrics.o_information(true_dist, base=base)
    rows = []
    for m in m_grid:
        for trial in range(trials):
            seed = base_seed + trial
            res = glrt(sample(true_dist, int(m), seed), base)
            rows.append(SweepRow(int(m), trial, seed, res.glrt_per_m, res.plugin_metric,
                                 analytic, abs(res.glrt_per_m - analytic)))
    return rows


def median_errors(rows: Iterable[SweepRow]) -> dict[int, float]:
    by_m: dict[int, list[float]] = {}
    for r in rows:
        by_m.setdefault(r.m, []).append(r.abs_error)
    return {m: float(np.median(v)) for m, v in by_m.items()}


def count_inversions(values: Sequence[float]) -> int:
    """Number of consecutive increases in ``values``."""
    return sum(1 for a, b in zip(values, values[1:]) if b > a)


# --------------------------------------------------------------------- #
# CSV I/O
# --------------------------------------------------------------------- #


def write_sweep_csv(rows: Iterable[SweepRow], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([r.m, r.trial, r.seed] + [format(v, ".17g") for v in
                   (r.glrt_per_m, r.plugin, r.analytic, r.abs_error)])


def write_samples_csv(samples: SampleSet, fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(samples.shape.names)
    w.writerows(samples.data.tolist())


def read_samples_csv(
    fh: TextIO,
    cards: Sequence[int] | None = None,
    target: str | None = None,
) -> SampleSet:
    """Parse a header-plus-integer-rows CSV.

    Without ``cards`` each alphabet size is inferred as ``max symbol + 1``.
    Errors name the offending 1-based data row.
    """
    reader = csv.reader(fh)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise SampleError("empty samples file") from None
    rows = []
    lineno = 0
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        lineno += 1
        if len(row) != len(header):
            raise SampleError(f"row {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            rows.append([int(c) for c in row])
        except ValueError:
            raise SampleError(f"row {lineno}: non-integer symbol in {row}") from None
    if not rows:
        raise SampleError("no sample rows")
    data = np.array(rows, dtype=np.int64)
    if (data < 0).any():
        row = int(np.argwhere(data < 0)[0][0])
        raise SampleError(f"row {row + 1}: negative symbol")
    if cards is None:
        cards = (data.max(axis=0) + 1).tolist()
    if len(cards) != len(header):
        raise SampleError(f"{len(cards)} cardinalities given for {len(header)} columns")
    shape = SystemShape(tuple(header), tuple(cards))
    if target is not None:
        shape = shape.with_target(shape.index_of(target))
    return SampleSet(shape, data)


def samples_to_csv(samples: SampleSet) -> str:
    buf = io.StringIO()
    write_samples_csv(samples, buf)
    return buf.getvalue()
