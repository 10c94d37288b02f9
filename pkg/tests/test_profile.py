import math

import pytest
from hypothesis import assume, given, settings, strategies as st

from evprofile.profile import (INFEASIBLE, ZERO, EnergyProfile, Envelope, Segment, dominates,
                               dominates_ordered, evaluate, join_fw_bw, link_backward,
                               link_forward, link_path, lower_envelope, simulate_soc,
                               transition_point)
from conftest import EXAMPLE_COSTS, EXAMPLE_E_MAX

P = EnergyProfile
E = EXAMPLE_E_MAX

costs_st = st.lists(st.integers(-8, 8), min_size=0, max_size=8)
emax_st = st.integers(1, 20)


def test_forward_link_examples():
    assert link_forward(ZERO, 0, 5) == P(0, 0, 0)
    assert link_forward(ZERO, 1, 5) == P(1, 1, 1)
    assert link_forward(ZERO, -2, 5) == P(0, -2, 0)


def test_backward_link_chain():
    p = link_backward(ZERO, 1, E)
    assert p == P(1, 1, 1)
    p = link_backward(p, -2, E)
    assert p == P(0, -1, 1)
    p = link_backward(p, 3, E)
    assert p == P(3, 2, 2)
    p = link_backward(p, -1, E)
    assert p == P(2, 1, 2)


def test_recuperation_clamped_at_capacity():
    assert link_forward(ZERO, -9, 5).g_min == -5
    assert link_backward(ZERO, -9, 5).g_min == -5


def test_evaluate_examples():
    p = P(2, 1, 2)
    assert evaluate(p, 2, E) == 1
    assert evaluate(p, 4, E) == 1
    assert evaluate(p, 5, E) == 2
    assert evaluate(p, 1, E) == INFEASIBLE
    assert transition_point(p, E) == 4


def test_evaluate_rejects_out_of_range():
    with pytest.raises(ValueError):
        evaluate(P(0, 0, 0), 6, 5)
    with pytest.raises(ValueError):
        evaluate(P(0, 0, 0), -0.5, 5)


def test_dominance_examples():
    assert dominates(P(1, 1, 1), P(2, 2, 2))
    assert not dominates(P(1, 0, 3), P(2, 1, 2))
    assert not dominates(P(2, 1, 2), P(1, 0, 3))
    assert dominates(P(2, 1, 2), P(2, 1, 2))
    assert dominates_ordered(P(1, 9, 1), P(2, 0, 2))
    assert not dominates_ordered(P(1, 0, 3), P(2, 0, 2))


def test_join_identity():
    assert join_fw_bw(ZERO, P(2, 1, 2), E) == P(2, 1, 2)
    assert join_fw_bw(P(2, 1, 2), ZERO, E) == P(2, 1, 2)


def test_join_of_split_path():
    fw = link_path(EXAMPLE_COSTS[:2], E)
    bw = link_path(EXAMPLE_COSTS[2:], E, backward=True)
    assert join_fw_bw(fw, bw, E) == P(2, 1, 2)


def test_join_infeasible_when_full_charge_too_low():
    # prefix leaves at most E - 3 = 2 at the meeting state, suffix needs 4
    assert join_fw_bw(P(3, 3, 3), P(4, 4, 4), 5) is None


def test_example_envelope():
    env = lower_envelope([P(2, 1, 2)], E)
    assert env.segments == (Segment(2, 1, 0), Segment(4, 1, 1))
    assert env.describe() == "infeasible <2; 1 on [2,4]; rising to 2 at 5"
    assert [env(e) for e in range(6)] == [INFEASIBLE, INFEASIBLE, 1, 1, 1, 2]


def test_envelope_idempotent():
    assert lower_envelope([P(2, 1, 2), P(2, 1, 2)], E) == lower_envelope([P(2, 1, 2)], E)


def test_envelope_two_profiles():
    env = lower_envelope([P(0, 0, 4), P(3, -1, -1)], 5)
    for i in range(501):
        e = i / 100
        want = min(evaluate(P(0, 0, 4), e, 5), evaluate(P(3, -1, -1), e, 5))
        assert env(e) == pytest.approx(want, abs=1e-12)
    assert env(2.99) == pytest.approx(1.99) and env(3) == -1 and env(5) == -1


def test_envelope_point_at_capacity():
    # second profile is feasible only at a full battery, where it is cheaper
    env = lower_envelope([P(20, 14, 14), P(17, 15, 15)], 20)
    assert env(20) == 14 and env(19.5) == 15 and env(16) == INFEASIBLE


def test_empty_envelope():
    env = lower_envelope([], 5)
    assert env.segments == () and env(5) == INFEASIBLE
    assert env.describe() == "infeasible everywhere"
    assert lower_envelope([P(6, 6, 6)], 5) == Envelope(5)


def test_envelope_json_shape():
    d = lower_envelope([P(2, 1, 2)], E).to_json()
    assert d["feasible_from"] == 2 and len(d["segments"]) == 2


# -- properties ---------------------------------------------------------------

@settings(max_examples=300)
@given(costs=costs_st, e_max=emax_st, data=st.data())
def test_linked_profile_matches_battery_simulation(costs, e_max, data):
    fw = link_path(costs, e_max)
    bw = link_path(costs, e_max, backward=True)
    for e in range(e_max + 1):
        want = simulate_soc(costs, e, e_max)
        assert evaluate(fw, e, e_max) == want
        assert evaluate(bw, e, e_max) == want
    x = data.draw(st.floats(0, e_max))
    assert evaluate(fw, x, e_max) == pytest.approx(simulate_soc(costs, x, e_max), abs=1e-9)


@settings(max_examples=300)
@given(costs=costs_st, e_max=emax_st, backward=st.booleans())
def test_linking_keeps_invariants(costs, e_max, backward):
    p = ZERO
    seq = costs if not backward else list(reversed(costs))
    for c in seq:
        p = link_forward(p, c, e_max) if not backward else link_backward(p, c, e_max)
        assert p.invariant_violations(e_max) == []


@settings(max_examples=300)
@given(costs=costs_st, e_max=emax_st, data=st.data())
def test_join_equals_sequential_link(costs, e_max, data):
    k = data.draw(st.integers(0, len(costs)))
    full = link_path(costs, e_max)
    j = join_fw_bw(link_path(costs[:k], e_max), link_path(costs[k:], e_max, backward=True), e_max)
    for e in range(e_max + 1):
        got = INFEASIBLE if j is None else evaluate(j, e, e_max)
        assert got == evaluate(full, e, e_max)


@settings(max_examples=200)
@given(paths=st.lists(costs_st, min_size=1, max_size=6), e_max=emax_st)
def test_envelope_is_pointwise_minimum(paths, e_max):
    profs = [link_path(c, e_max) for c in paths]
    env = lower_envelope(profs, e_max)
    for i in range(4 * e_max + 1):
        e = i / 4
        want = min(evaluate(p, e, e_max) for p in profs)
        assert env(e) == want
    # slopes alternate only between 0 and 1 and segments start in order
    starts = [s.e_from for s in env.segments]
    assert starts == sorted(starts) and all(s.slope in (0, 1) for s in env.segments)


@settings(max_examples=300)
@given(a=st.tuples(st.integers(0, 10), st.integers(-10, 10), st.integers(0, 10)),
       b=st.tuples(st.integers(0, 10), st.integers(-10, 10), st.integers(0, 10)))
def test_dominance_means_pointwise_no_worse(a, b):
    x, y = P(*a), P(*b)
    assume(not x.invariant_violations(10) and not y.invariant_violations(10))
    if dominates(x, y):
        assert dominates_ordered(x, y)
        assert all(evaluate(x, e, 10) <= evaluate(y, e, 10) for e in range(11))


@settings(max_examples=200)
@given(costs=costs_st, e_max=emax_st)
def test_cost_has_slope_at_most_one(costs, e_max):
    p = link_path(costs, e_max)
    vals = [evaluate(p, e, e_max) for e in range(e_max + 1)]
    for lo, hi in zip(vals, vals[1:]):
        if lo < INFEASIBLE:
            assert hi < INFEASIBLE and hi <= lo + 1


def test_infeasible_constant_is_inf():
    assert INFEASIBLE == math.inf
