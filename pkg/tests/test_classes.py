import itertools
import math
import random

import numpy as np
import pytest

from rarevc.bounds import sauer_log_cap
from rarevc.classes import (
    FiniteClassSpec,
    brute_force_shattering,
    brute_force_vc_dim,
    get_class,
    make_intervals,
    make_tail_halflines,
    shattering_at_real,
)

BUILTINS = [make_tail_halflines, make_intervals]


def realized_spec(set_class, points):
    """FiniteClassSpec whose sets are the traces of ``set_class`` on ``points``.

    Traces come from the membership predicate over candidate parameters placed
    between consecutive points, so every realizable trace shows up.
    """
    q = set_class.quantile_q
    xs = sorted(points)
    cuts = [0.0] + [(a + b) / 2 for a, b in zip(xs, xs[1:])] + [q]
    cuts += xs
    if set_class.identifier == "tail-halflines":
        params = cuts + [-1.0]
    else:
        params = [(a, b) for a in cuts for b in cuts if a <= b]
    sets = [[x for x in xs if set_class.contains(prm, x)] for prm in params]
    return FiniteClassSpec(xs, sets)


def test_shattering_at_real_examples():
    h = make_tail_halflines(1e-3)
    assert shattering_at_real(h, 3.9) == pytest.approx(math.log(4))
    assert shattering_at_real(h, 0.7) == 0.0
    assert shattering_at_real(make_intervals(0.1), 0.7) == 0.0
    assert shattering_at_real(make_intervals(0.1), 4.2) == pytest.approx(math.log(11))
    with pytest.raises(ValueError):
        shattering_at_real(h, -0.1)


def test_tail_halflines_descriptor():
    c = make_tail_halflines(1e-3)
    assert c.quantile_q == 1e-3 and c.rare_mass_p == 1e-3 and c.vc_dim == 1
    assert c.log_shattering(10) == pytest.approx(math.log(11))
    assert c.contains(0.001, 0.0005)
    assert not c.contains(0.001, 0.002)
    for bad in [0.0, 1.0, -0.5]:
        with pytest.raises(ValueError):
            make_tail_halflines(bad)


def test_tail_halflines_conditional_mean():
    c = make_tail_halflines(1e-3)
    y = c.sample_conditional(np.random.default_rng(1), 10**6)
    se = c.quantile_q / math.sqrt(12) / math.sqrt(y.size)
    assert abs(y.mean() - c.quantile_q / 2) < 3 * se


def test_intervals_descriptor():
    c = make_intervals(0.2)
    assert c.vc_dim == 2
    assert math.exp(c.log_shattering(2)) == pytest.approx(4)
    assert shattering_at_real(c, 0) == 0.0
    assert c.contains((0.05, 0.1), 0.07)
    assert not c.contains((0.05, 0.3), 0.07)  # b beyond the rare region: not a member
    # exact for huge m
    assert c.log_shattering(10**12) == pytest.approx(math.log(10**12 * (10**12 + 1) // 2 + 1))


@pytest.mark.parametrize("factory", BUILTINS)
@pytest.mark.parametrize("m", range(0, 13))
def test_closed_form_matches_brute_force(factory, m):
    c = factory(0.3)
    rng = random.Random(m)
    pts = [rng.uniform(0, 0.3) for _ in range(m)]
    spec = realized_spec(c, pts) if m else FiniteClassSpec([], [[]])
    count = brute_force_shattering(spec, pts)
    assert math.log(count) == pytest.approx(c.log_shattering(m) if m else 0.0, abs=1e-12)


@pytest.mark.parametrize("factory, dim", [(make_tail_halflines, 1), (make_intervals, 2)])
def test_builtin_vc_dim_by_enumeration(factory, dim):
    c = factory(0.5)
    pts = [0.05, 0.15, 0.25, 0.35, 0.45]
    assert brute_force_vc_dim(realized_spec(c, pts)) == dim == c.vc_dim


@pytest.mark.parametrize("factory", BUILTINS)
def test_conditional_sampler_stays_in_region(factory):
    c = factory(0.01)
    y = c.sample_conditional(np.random.default_rng(3), 10**5)
    assert np.all(c.in_rare_region(y)) and np.all(y >= 0)


@pytest.mark.parametrize("factory", BUILTINS)
def test_members_inside_rare_region(factory):
    c = factory(0.1)
    rng = np.random.default_rng(5)
    outside = rng.uniform(0.1 + 1e-12, 1.0, 200)
    params = (
        rng.uniform(-1, 2, 200)
        if c.identifier == "tail-halflines"
        else [tuple(sorted(rng.uniform(-1, 2, 2))) for _ in range(200)]
    )
    assert not any(c.contains(prm, x) for prm in params for x in outside)


@pytest.mark.parametrize("factory", BUILTINS)
def test_log_shattering_monotone_and_capped(factory):
    c = factory(0.1)
    vals = [c.log_shattering(m) if m else 0.0 for m in range(200)]
    assert vals[0] == 0.0
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert all(v <= m * math.log(2) + 1e-12 for m, v in enumerate(vals))


def test_registry():
    assert get_class("tail-intervals", 0.1).identifier == "tail-intervals"
    with pytest.raises(KeyError):
        get_class("rectangles", 0.1)


# ---------------------------------------------------------------- finite oracles


def test_brute_force_shattering_examples():
    spec = FiniteClassSpec(["a", "b"], [["a"], ["b"], ["a", "b"]])
    assert brute_force_shattering(spec, []) == 1
    assert brute_force_shattering(spec, ["a", "b"]) == 3


def test_single_set_class_has_dim_zero():
    spec = FiniteClassSpec([1, 2, 3], [[1, 2]])
    assert brute_force_vc_dim(spec) == 0


def test_halfline_traces_dim_one():
    pts = [1, 2, 3, 4, 5]
    spec = FiniteClassSpec(pts, [pts[:k] for k in range(6)])
    assert brute_force_vc_dim(spec) == 1


def test_interval_traces_dim_two():
    pts = [1, 2, 3, 4, 5]
    sets = [[]] + [pts[i:j] for i in range(5) for j in range(i + 1, 6)]
    assert brute_force_vc_dim(FiniteClassSpec(pts, sets)) == 2


def test_finite_spec_validation():
    with pytest.raises(ValueError):
        FiniteClassSpec([1, 1], [[1]])
    with pytest.raises(ValueError):
        FiniteClassSpec([1, 2], [])
    with pytest.raises(ValueError):
        FiniteClassSpec([1, 2], [[3]])
    with pytest.raises(OverflowError):
        brute_force_vc_dim(FiniteClassSpec(range(21), [[0]]))


def shattering_coefficient(spec, m):
    ground = spec.ground_points
    m = min(m, len(ground))
    return max(brute_force_shattering(spec, c) for c in itertools.combinations(ground, m))


def random_finite_class(rng):
    g = rng.randint(1, 10)
    ground = list(range(g))
    sets = [[x for x in ground if rng.random() < rng.random()] for _ in range(rng.randint(1, 40))]
    return FiniteClassSpec(ground, sets)


def test_shattering_bounded_by_power_set():
    rng = random.Random(11)
    for _ in range(30):
        spec = random_finite_class(rng)
        for m in range(len(spec.ground_points) + 1):
            assert shattering_coefficient(spec, m) <= 2**m


def test_sauer_cap_dominates_brute_force():
    rng = random.Random(2024)
    for _ in range(50):
        spec = random_finite_class(rng)
        v = brute_force_vc_dim(spec)
        for m in range(11):
            s = shattering_coefficient(spec, m)
            assert s <= (m + 1) ** v
            if v:
                assert math.log(s) <= sauer_log_cap(m, v) + 1e-12
