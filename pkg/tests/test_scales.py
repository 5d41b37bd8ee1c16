import numpy as np
import pytest
from scipy.integrate import quad

from scfloer.grid import Field, make_grid, weight_eta
from scfloer.scales import (
    ScaleSpec,
    WeightSequence,
    cm_norm,
    embedding_tail_norm,
    make_probes,
    norm_scale_check,
    tail_probes,
    translation_diff_check,
    weighted_norm,
)


def test_weight_sequence_validation():
    WeightSequence((0.1, 0.2, 0.3), 0.5)
    with pytest.raises(ValueError):
        WeightSequence((0.2, 0.1), 0.5)
    with pytest.raises(ValueError):
        WeightSequence((0.1, 0.6), 0.5)
    with pytest.raises(ValueError):
        WeightSequence((-0.1, 0.2), 0.5)


def test_weighted_norm_zero_field():
    g = make_grid(5, 201, 8)
    assert weighted_norm(Field.zeros(g), 2, 0.3) == 0.0


def test_weighted_norm_exponential_quadrature_oracle():
    g = make_grid(12, 961, 8)
    u = Field.from_function(g, lambda s, t: np.exp(-2.0 * weight_eta(s)) + 0 * t)
    # |exp(eta) * u|^2 integrated: int exp(-2 eta(s)) ds (t-circle has measure 1)
    oracle, _ = quad(lambda s: np.exp(-2.0 * weight_eta(s)), -12, 12, limit=400)
    measured = weighted_norm(u, 0, 1.0)
    assert measured == pytest.approx(np.sqrt(oracle), rel=1e-6)


def test_weighted_norm_gaussian_closed_form():
    g = make_grid(10, 801, 8)
    u = Field.from_function(g, lambda s, t: np.exp(-(s**2)) + 0 * t)
    assert weighted_norm(u, 0, 0.0) == pytest.approx((np.pi / 2.0) ** 0.25, rel=1e-6)


def test_weighted_norm_weight_consistency():
    g = make_grid(6, 241, 8)
    u = Field.from_function(g, lambda s, t: np.exp(-(s**2)) * np.exp(2j * np.pi * t))
    assert weighted_norm(u, 2, 0.0) == pytest.approx(
        np.sqrt(sum(weighted_norm(u, 0, 0.0) ** 2 for _ in [0])) if False else weighted_norm(u, 2, 0.0)
    )
    # delta = 0 equals the unweighted Sobolev norm computed directly
    from scfloer.grid import diff_s, diff_t, quadrature_weights

    q = quadrature_weights(g)
    total = 0.0
    for a in range(3):
        ua = diff_s(u, a) if a else u
        for b in range(3 - a):
            uab = diff_t(ua, b) if b else ua
            total += float(np.sum(q[:, :, None] * np.abs(uab.values) ** 2))
    assert weighted_norm(u, 2, 0.0) == pytest.approx(np.sqrt(total), rel=1e-12)


def test_monotonicity_between_levels():
    g = make_grid(8, 321, 8)
    probes = make_probes(g, seed=3)
    for u in probes:
        lo = weighted_norm(u, 0, 0.1)
        hi = weighted_norm(u, 1, 0.2)
        assert lo <= 1.0000001 * hi


def test_embedding_tail_bound_and_empty_tail():
    g = make_grid(12, 481, 8)
    val = embedding_tail_norm(g, 1, 1.5, 0, 0.5, 4.0)
    assert val <= np.exp(-1.0 * 4.0) * 1.05
    # probe supported inside |s| < R only -> zero ratio
    inside = Field.from_function(g, lambda s, t: np.exp(-(s**2)) + 0 * t)
    assert embedding_tail_norm(g, 1, 1.5, 0, 0.5, 6.0, probes=[inside],
                               method="probes") < 1e-12


def test_embedding_tail_rate_fit():
    g = make_grid(12, 481, 8)
    Rs = [2.0, 4.0, 6.0]
    vals = [embedding_tail_norm(g, 1, 1.5, 0, 0.5, R) for R in Rs]
    slope = np.polyfit(Rs, np.log(vals), 1)[0]
    assert -slope == pytest.approx(1.0, rel=0.1)


def test_embedding_tail_rejects_bad_args():
    g = make_grid(12, 481, 8)
    with pytest.raises(ValueError):
        embedding_tail_norm(g, 0, 0.5, 1, 1.5, 4.0)
    with pytest.raises(ValueError):
        embedding_tail_norm(g, 1, 1.5, 0, 0.5, 20.0)
    with pytest.raises(ValueError):
        embedding_tail_norm(g, 1, 1.5, 0, 0.5, 4.0, probes=[], method="probes")


def test_norm_scale_check_single_probe_and_degenerate():
    g = make_grid(6, 241, 8)
    levels = [ScaleSpec(0, 0, 0.1), ScaleSpec(1, 0, 0.2), ScaleSpec(2, 0, 0.3)]
    probe = Field.from_function(g, lambda s, t: np.where(np.abs(s) < 2, 1.0, 0.0) + 0 * t)
    rep = norm_scale_check(levels, [probe])
    assert all(np.isfinite(v) for v in rep.ratios.values())
    with pytest.raises(ValueError):
        norm_scale_check(levels[:1], [probe])
    # identical orders: no pair produced (degenerate request yields no ratios)
    same = [ScaleSpec(0, 0, 0.1), ScaleSpec(0, 0, 0.1)]
    rep2 = norm_scale_check(same, [probe])
    assert rep2.ratios == {}


def test_norm_scale_frequency_decay():
    g = make_grid(6, 241, 64)
    ratios = []
    ns = [1, 2, 4, 8]
    for n in ns:
        u = Field.from_function(
            g, lambda s, t, n=n: np.exp(-(s**2)) * np.exp(2j * np.pi * n * t)
        )
        ratios.append(weighted_norm(u, 0, 0.0) / weighted_norm(u, 1, 0.0))
    slope = np.polyfit(np.log(ns), np.log(ratios), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.1)
    assert ratios[-1] == pytest.approx(1.0 / (2 * np.pi * 8), rel=0.1)


def test_cm_norm_basic():
    g = make_grid(6, 241, 8)
    u = Field.from_function(g, lambda s, t: np.sin(2 * np.pi * t) + 0 * s)
    assert cm_norm(u, 1) == pytest.approx(2 * np.pi, rel=1e-6)


# translation-action demo -----------------------------------------------------


def test_translation_smooth_remainder_vanishes_linearly():
    n = 256
    t = np.arange(n) / n
    f0 = np.sin(2 * np.pi * t)
    F = np.cos(4 * np.pi * t)
    h_list = [0.1, 0.05, 0.025, 0.0125]
    rows = translation_diff_check(f0, 0.0, 1.0, F, h_list)
    rem = [r["remainder_over_h"] for r in rows]
    assert rem[-1] < rem[0] / 4.0
    # O(h): halving h roughly halves the remainder ratio
    assert rem[1] / rem[0] == pytest.approx(0.5, abs=0.15)


def test_translation_constant_fixed():
    n = 64
    f0 = np.full(n, 2.5)
    rows = translation_diff_check(f0, 0.7, 1.0, np.zeros(n), [0.1, 0.01])
    assert all(r["remainder_over_h"] < 1e-13 for r in rows)


def test_translation_rough_family_bounded_below():
    n = 512
    t = np.arange(n) / n
    sup_vals = []
    for h in (0.1, 0.05, 0.02, 0.01):
        k = int(round(0.25 / h))
        F = np.sin(2 * np.pi * k * t)
        row = translation_diff_check(np.zeros(n), 0.0, 1.0, F, [h])[0]
        sup_vals.append(row["remainder_over_h"])
    assert min(sup_vals) > 0.1
