import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semalloc.knapsack import KnapsackInfeasible, KnapsackInstance, fractional_bound, solve_exact


def enumerate_best(values, weights, capacity, forced_zero=()):
    """Exhaustive reference with the same tie-break: value, then fewer items, then smallest index tuple."""
    n = len(values)
    cap = capacity * (1 + 1e-12) + 1e-15
    best = None
    for r in range(n + 1):
        for idx in itertools.combinations(range(n), r):
            if any(i in forced_zero for i in idx):
                continue
            if math.fsum(weights[i] for i in idx) > cap:
                continue
            # zero-weight positive-value items are always worth taking; the library does so too
            value = math.fsum(values[i] for i in idx)
            key = (-value, len(idx), idx)
            if best is None or key < best:
                best = key
    return -best[0], best[2]


def test_example_three_items():
    inst = KnapsackInstance([0.9, 0.6, 0.5], [5, 4, 3], 7)
    x, value = solve_exact(inst)
    assert x.tolist() == [0, 1, 1]
    assert value == pytest.approx(1.1)


def test_fractional_bound_example():
    inst = KnapsackInstance([0.9, 0.6, 0.5], [5, 4, 3], 7)
    assert fractional_bound(inst) == pytest.approx(0.9 + 0.5 * 2 / 3)
    assert fractional_bound(inst) == pytest.approx(1.2333, abs=1e-4)


def test_trivial_cases():
    inst = KnapsackInstance([0.2, 0.3], [1, 2], 10)
    assert fractional_bound(inst) == pytest.approx(0.5)
    assert solve_exact(inst)[0].tolist() == [1, 1]
    zero = KnapsackInstance([0.0, 0.0], [1, 2], 10)
    assert fractional_bound(zero) == 0.0
    x, v = solve_exact(zero)
    assert x.tolist() == [0, 0] and v == 0.0
    empty = KnapsackInstance([], [], 1.0)
    assert solve_exact(empty)[0].tolist() == []


def test_zero_weight_items_are_taken_and_forced_zero_respected():
    inst = KnapsackInstance([0.4, 0.7, 0.5], [0.0, 1.0, 1.0], 1.0, forced_zero={1})
    x, v = solve_exact(inst)
    assert x.tolist() == [1, 0, 1]
    assert v == pytest.approx(0.9)


def test_tie_prefers_fewer_items_then_smallest_indices():
    # {0} and {1, 2} both worth 1.0
    x, _ = solve_exact(KnapsackInstance([1.0, 0.5, 0.5], [1, 0.5, 0.5], 1.0))
    assert x.tolist() == [1, 0, 0]
    x, _ = solve_exact(KnapsackInstance([0.5, 0.5, 0.5], [1, 1, 1], 1.0))
    assert x.tolist() == [1, 0, 0]


def test_negative_capacity_raises():
    with pytest.raises(KnapsackInfeasible):
        solve_exact(KnapsackInstance([1.0], [1.0], -0.5))
    with pytest.raises(KnapsackInfeasible):
        fractional_bound(KnapsackInstance([1.0], [1.0], -0.5))
    # zero capacity still admits the empty set and weightless items
    x, v = solve_exact(KnapsackInstance([1.0, 0.3], [1.0, 0.0], 0.0))
    assert x.tolist() == [0, 1] and v == pytest.approx(0.3)


@pytest.mark.parametrize("bad", [dict(values=[1, 2], weights=[1]), dict(values=[-1], weights=[1]), dict(values=[1], weights=[math.inf])])
def test_invalid_instances(bad):
    with pytest.raises(ValueError):
        KnapsackInstance(capacity=1.0, **bad)


def test_matches_enumeration_on_seeded_instances():
    rng = np.random.default_rng(12345)
    for _ in range(100):
        n = int(rng.integers(1, 13))
        v, w = rng.uniform(size=n), rng.uniform(size=n)
        cap = rng.uniform(0, w.sum())
        x, val = solve_exact(KnapsackInstance(v, w, cap))
        ref_val, ref_idx = enumerate_best(v, w, cap)
        assert val == ref_val
        assert tuple(np.flatnonzero(x)) == ref_idx


# ---- properties ---------------------------------------------------------

items = st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=0, max_size=9)


@settings(max_examples=200, deadline=None)
@given(items=items, frac=st.floats(0, 1.2))
def test_bound_dominates_and_selection_feasible(items, frac):
    v = [a for a, _ in items]
    w = [b for _, b in items]
    inst = KnapsackInstance(v, w, frac * sum(w))
    x, value = solve_exact(inst)
    assert fractional_bound(inst) >= value - 1e-12
    assert float(np.dot(x, w)) <= inst.effective_capacity + 1e-12
    ref_val, ref_idx = enumerate_best(v, w, inst.capacity)
    assert value == pytest.approx(ref_val, abs=1e-12)


@settings(max_examples=150, deadline=None)
@given(items=items, frac=st.floats(0, 1), c=st.sampled_from([0.5, 2.0, 4.0, 0.125]))
def test_value_scaling_preserves_argmax(items, frac, c):
    # power-of-two factors keep every sum exact, so the tie-break is unaffected
    v = np.array([a for a, _ in items])
    w = [b for _, b in items]
    cap = frac * sum(w)
    x1, v1 = solve_exact(KnapsackInstance(v, w, cap))
    x2, v2 = solve_exact(KnapsackInstance(c * v, w, cap))
    assert x1.tolist() == x2.tolist()
    assert v2 == pytest.approx(c * v1, rel=1e-12, abs=1e-300)


@settings(max_examples=150, deadline=None)
@given(items=items.filter(len), frac=st.floats(0, 1), data=st.data())
def test_forcing_zero_never_helps(items, frac, data):
    v = [a for a, _ in items]
    w = [b for _, b in items]
    cap = frac * sum(w)
    i = data.draw(st.integers(0, len(items) - 1))
    _, base = solve_exact(KnapsackInstance(v, w, cap))
    x, forced = solve_exact(KnapsackInstance(v, w, cap, forced_zero={i}))
    assert forced <= base + 1e-12
    assert x[i] == 0
