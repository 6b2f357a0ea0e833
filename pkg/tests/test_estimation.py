import io
import math

import numpy as np
import pytest

from hoinfo import estimation as est
from hoinfo import metrics as mt
from hoinfo.dist import SystemShape, make_distribution
from hoinfo.models import (
    HEAD_TO_HEAD,
    TAIL_TO_TAIL,
    ModelClass,
    gen_copy,
    gen_parity_target,
    gen_random,
    gen_xor,
    kl_divergence,
    project,
)

import oracle


def bit():
    return make_distribution(SystemShape.from_cards([2]), [0.5, 0.5])


def random_sample_sets(k, seed0=0):
    shapes = [[2, 2, 2], [2, 3, 2], [3, 2, 2, 2], [2, 2, 3]]
    out = []
    for i in range(k):
        shape = SystemShape.from_cards(shapes[i % len(shapes)], target=True)
        m = (10, 100, 1000)[i % 3]
        out.append(est.sample(gen_random(shape, seed0 + i), m, seed0 + 100 + i))
    return out


# ------------------------------------------------------------------ sampling


def test_sample_point_mass():
    d = make_distribution(SystemShape.from_cards([3, 2]), [0, 0, 0, 1, 0, 0])
    s = est.sample(d, 50, 1)
    assert (s.data == [1, 1]).all()


def test_sample_uniform_bit_frequency():
    s = est.sample(bit(), 100_000, 123)
    assert abs(s.data[:, 0].mean() - 0.5) < 0.01


def test_sample_deterministic():
    d = gen_random(SystemShape.from_cards([2, 3, 2]), 0)
    a, b = est.sample(d, 500, 9), est.sample(d, 500, 9)
    assert np.array_equal(a.data, b.data)
    assert not np.array_equal(a.data, est.sample(d, 500, 10).data)


def test_sample_never_hits_zero_mass_states():
    d = gen_parity_target(3)
    s = est.sample(d, 5000, 4)
    assert np.all(d.probs[s.flat_indices()] > 0)


def test_sample_invalid_m():
    with pytest.raises(est.SampleError):
        est.sample(bit(), 0, 1)


def test_sample_set_validation():
    shape = SystemShape.from_cards([2, 3])
    with pytest.raises(est.SampleError, match="row 2"):
        est.SampleSet(shape, np.array([[0, 0], [0, 3]]))
    with pytest.raises(est.SampleError):
        est.SampleSet(shape, np.array([[0, 0, 0]]))
    with pytest.raises(est.SampleError):
        est.SampleSet(shape, np.zeros((0, 2), dtype=int))
    with pytest.raises(est.SampleError):
        est.SampleSet(shape, np.array([[0.5, 1.0]]))


# ------------------------------------------------------------------ empirical and likelihood


def test_empirical_examples():
    shape = SystemShape.from_cards([2])
    assert est.empirical(est.SampleSet(shape, np.array([[1]] * 7))).probs.tolist() == [0.0, 1.0]
    assert est.empirical(est.SampleSet(shape, np.array([[0], [1]]))).probs.tolist() == [0.5, 0.5]
    copy = gen_copy(3)
    p_hat = est.empirical(est.sample(copy, 100_000, 2))
    assert 0.5 * np.abs(p_hat.probs - copy.probs).sum() < 0.01


def test_log_likelihood_examples():
    shape = SystemShape.from_cards([2])
    ones = est.SampleSet(shape, np.array([[1]] * 4))
    assert est.log_likelihood(ones, make_distribution(shape, [0, 1])) == 0.0
    assert est.log_likelihood(ones, bit()) == -4.0
    zeros = est.SampleSet(shape, np.array([[0]]))
    assert est.log_likelihood(zeros, make_distribution(shape, [0, 1])) == -math.inf


def test_log_likelihood_nats():
    s = est.SampleSet(SystemShape.from_cards([2]), np.array([[0], [1], [1]]))
    assert est.log_likelihood(s, bit(), base=math.e) == pytest.approx(-3 * math.log(2), abs=1e-15)


def test_in_sample_likelihood_is_finite():
    # unobserved conditioning events never meet a sample
    for s in random_sample_sets(12, seed0=50):
        p_hat = est.empirical(s)
        for kind in (TAIL_TO_TAIL, HEAD_TO_HEAD):
            q = project(p_hat, ModelClass(kind, s.shape)).projected
            assert math.isfinite(est.log_likelihood(s, q))


# ------------------------------------------------------------------ GLRT


def test_glrt_rsi_examples():
    copy = est.glrt_rsi(est.sample(gen_copy(3, with_target=True), 10_000, 1))
    assert abs(copy.glrt_per_m - 2.0) < 0.05
    parity = est.glrt_rsi(est.sample(gen_parity_target(3), 10_000, 1))
    assert abs(parity.glrt_per_m + 1.0) < 0.05
    assert parity.metric == "rsi"


def test_glrt_rsi_needs_target():
    with pytest.raises(est.SampleError):
        est.glrt_rsi(est.sample(gen_copy(3), 10, 0))


def test_glrt_identity_against_counting_oracle():
    for s in random_sample_sets(50):
        res = est.glrt_rsi(s)
        lam_t, lam_h = oracle.glrt_rsi_by_counting(s.data.tolist(), s.shape.target_index)
        assert res.lambda_t_per_m == pytest.approx(lam_t, abs=1e-9)
        assert res.lambda_h_per_m == pytest.approx(lam_h, abs=1e-9)
        pd = oracle.as_dict(est.empirical(s))
        plugin = oracle.RSI(pd, s.shape.sources, s.shape.target_index)
        assert res.glrt_per_m == pytest.approx(plugin, abs=1e-9)
        assert res.glrt_per_m == pytest.approx(res.plugin_metric, abs=1e-9)


def test_glrt_equals_projection_divergence_difference():
    for s in random_sample_sets(20, seed0=900):
        p_hat = est.empirical(s)
        d_t = kl_divergence(p_hat, project(p_hat, ModelClass(TAIL_TO_TAIL, s.shape)).projected)
        d_h = kl_divergence(p_hat, project(p_hat, ModelClass(HEAD_TO_HEAD, s.shape)).projected)
        assert est.glrt_rsi(s).glrt_per_m == pytest.approx(d_h - d_t, abs=1e-9)


def test_glrt_oinfo_examples():
    xor = est.glrt_oinfo(est.sample(gen_xor(4), 10_000, 3))
    assert abs(xor.glrt_per_m + 2.0) < 0.1
    copy = est.glrt_oinfo(est.sample(gen_copy(4), 10_000, 3))
    assert abs(copy.glrt_per_m - 2.0) < 0.1
    assert [c["cut"] for c in copy.per_cut] == [2, 3]


def test_glrt_oinfo_per_cut_identity():
    for i in range(20):
        cards = [2, 3, 2, 2][: 3 + i % 2]
        s = est.sample(gen_random(SystemShape.from_cards(cards), i), 200, i)
        res = est.glrt_oinfo(s)
        pd = oracle.as_dict(est.empirical(s))
        n = len(cards)
        for cut in res.per_cut:
            j = cut["cut"]
            a, b, c = tuple(range(j - 1)), (j - 1,), tuple(range(j, n))
            term = oracle.MI(pd, a, c) - oracle.MI(pd, a, c, b)
            assert cut["glrt_per_m"] == pytest.approx(term, abs=1e-9)
            assert cut["plugin"] == pytest.approx(term, abs=1e-9)
        assert res.glrt_per_m == pytest.approx(oracle.OINFO(pd, tuple(range(n))), abs=1e-9)


def test_glrt_dispatch_and_dict():
    s = est.sample(gen_parity_target(2), 100, 0)
    out = est.glrt(s).to_dict()
    assert set(out) == {"m", "metric", "lambda_T_per_m", "lambda_H_per_m", "glrt_per_m", "plugin_metric", "units"}
    assert est.glrt(est.sample(gen_xor(3), 100, 0)).metric == "o_info"


# ------------------------------------------------------------------ sweeps


def test_sweep_single_row_matches_glrt():
    d = gen_parity_target(2)
    (row,) = est.convergence_sweep(d, [500], 1, base_seed=7)
    direct = est.glrt_rsi(est.sample(d, 500, 7))
    assert row.seed == 7
    assert row.glrt_per_m == direct.glrt_per_m
    assert row.analytic == pytest.approx(-1.0)
    assert row.abs_error == abs(row.glrt_per_m - row.analytic)


def test_sweep_copy_strictly_decreasing():
    rows = est.convergence_sweep(gen_copy(3, with_target=True), [100, 1000, 10_000, 100_000], 20)
    med = est.median_errors(rows)
    values = [med[m] for m in sorted(med)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_sweep_parity_errors_small_at_large_m():
    rows = est.convergence_sweep(gen_parity_target(3), [100_000], 20)
    assert max(r.abs_error for r in rows) < 0.02


def test_sweep_deterministic():
    d = gen_xor(3)
    a = est.convergence_sweep(d, [50, 500], 3, base_seed=11)
    b = est.convergence_sweep(d, [50, 500], 3, base_seed=11)
    assert a == b


def test_count_inversions():
    assert est.count_inversions([4, 3, 2, 1]) == 0
    assert est.count_inversions([4, 5, 2, 3]) == 2
    assert est.count_inversions([1]) == 0


# ------------------------------------------------------------------ CSV


def test_samples_csv_round_trip():
    s = est.sample(gen_random(SystemShape.from_cards([2, 3, 4], target=True), 1), 40, 2)
    text = est.samples_to_csv(s)
    assert text.splitlines()[0] == "X1,X2,Y"
    back = est.read_samples_csv(io.StringIO(text), cards=[2, 3, 4], target="Y")
    assert np.array_equal(back.data, s.data)
    assert back.shape == s.shape


def test_read_samples_infers_cards():
    back = est.read_samples_csv(io.StringIO("a,b\n0,2\n1,0\n"))
    assert back.shape.cards == (2, 3)


@pytest.mark.parametrize(
    "text, match",
    [
        ("", "empty"),
        ("a,b\n", "no sample rows"),
        ("a,b\n0,1\n0\n", "row 2"),
        ("a,b\n0,x\n", "row 1"),
        ("a,b\n0,1\n-1,0\n", "row 2"),
    ],
)
def test_read_samples_errors(text, match):
    with pytest.raises(est.SampleError, match=match):
        est.read_samples_csv(io.StringIO(text))


def test_row_numbers_skip_blank_lines():
    with pytest.raises(est.SampleError, match="row 2"):
        est.read_samples_csv(io.StringIO("a,b\n0,1\n\n1\n"))
    with pytest.raises(est.SampleError, match="row 2"):
        est.read_samples_csv(io.StringIO("a,b\n0,1\n\n1,5\n"), cards=[2, 2])


def test_read_samples_out_of_range():
    with pytest.raises(est.SampleError, match="row 3"):
        est.read_samples_csv(io.StringIO("a,b\n0,1\n1,1\n2,0\n"), cards=[2, 2])


def test_sweep_csv_format():
    rows = est.convergence_sweep(gen_copy(2, with_target=True), [20], 2)
    buf = io.StringIO()
    est.write_sweep_csv(rows, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(est.SWEEP_COLUMNS)
    assert len(lines) == 3
    assert float(lines[1].split(",")[3]) == rows[0].glrt_per_m
