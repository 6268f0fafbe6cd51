from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from couplex import (
    coupled_transitions,
    coupling_table,
    gg_symmetrized,
    increasing_rates,
    is_ordered,
    leq,
    marginal_errors,
    oneD_cross_check,
    rate,
    sep,
    traffic2,
    two_star_step,
    two_step,
)
from couplex.coupling import (
    PartialSumSeries,
    build_sets,
    h_term,
    partial_sums,
)
from couplex.golden import ordered_pairs

MODELS = {
    "sep": sep(),
    "sep-sym": sep({1: F(1, 2), -1: F(1, 2)}),
    "traffic2": traffic2(F(7, 10), F(1, 5)),
    "gg": gg_symmetrized(2, 1, 1, 2),
    "two_star_step": two_star_step(),
}

KINDS = ("increasing", "attractive", "strict")


def pairs(size):
    import itertools

    for xi in itertools.product((0, 1), repeat=size):
        for zeta in itertools.product((0, 1), repeat=size):
            yield xi, zeta


def test_marginals_match_single_generator():
    # coupled marginals must reproduce the single chain exactly in every flavor
    for spec in list(MODELS.values()) + [two_step()]:
        for kind in KINDS:
            assert marginal_errors(spec, 5, kind) == 0, (spec.name, kind)


def test_non_monotone_marginals():
    # the overlap constructions stay marginal-consistent even off the
    # monotone region; the proportional one can overshoot a marginal there
    # and must refuse loudly rather than return a broken table
    assert marginal_errors(traffic2(0, 2), 5, "increasing") == 0
    assert marginal_errors(traffic2(0, 2), 5, "attractive") == 0
    with pytest.raises(ValueError, match="exceed the marginal"):
        marginal_errors(traffic2(0, 2), 5, "strict")


def test_unknown_kind_rejected():
    with pytest.raises(ValueError, match="kind"):
        coupling_table(sep(), (1, 0, 1, 0, 0), (1, 1, 0, 0, 0), "bogus")


def test_identical_copies_move_in_lockstep():
    for spec in MODELS.values():
        eta = (1, 0, 1, 0, 0)
        for kind in KINDS:
            _, audits = coupled_transitions(spec, eta, eta, kind)
            assert audits
            for move in audits:
                assert move.move == "coupled"
                assert move.first_jump == move.second_jump
                assert move.discrepancy_delta == 0


def test_increasing_on_unordered_pairs_is_empty():
    table = increasing_rates(sep(), (1, 0, 0, 1, 0), (0, 1, 0, 1, 0))
    assert table.coupled == {}
    # the residuals then carry the full marginal rates
    assert table.residual_first[(0, 1)] == 1


def test_increasing_transpose_symmetry():
    spec = MODELS["traffic2"]
    lo = (0, 1, 0, 0, 1, 0)
    hi = (0, 1, 1, 0, 1, 0)
    assert leq(lo, hi)
    a = increasing_rates(spec, lo, hi)
    b = increasing_rates(spec, hi, lo)
    assert b.coupled == {(x2, y2, x1, y1): g for (x1, y1, x2, y2), g in a.coupled.items()}
    assert b.residual_first == a.residual_second
    assert b.residual_second == a.residual_first


def test_table_invariants_exhaustive_small_ring():
    spec = MODELS["sep-sym"]
    for xi, zeta in pairs(5):
        for kind in KINDS:
            table = coupling_table(spec, xi, zeta, kind)
            assert all(g > 0 for g in table.coupled.values())
            assert all(g >= 0 for g in table.residual_first.values())
            assert all(g >= 0 for g in table.residual_second.values())


@given(st.integers(5, 6), st.data())
def test_marginal_identity_per_jump(size, data):
    spec = data.draw(st.sampled_from(list(MODELS.values())))
    kind = data.draw(st.sampled_from(KINDS))
    xi = tuple(data.draw(st.integers(0, 1)) for _ in range(size))
    zeta = tuple(data.draw(st.integers(0, 1)) for _ in range(size))
    _, audits = coupled_transitions(spec, xi, zeta, kind)
    first_rates = {}
    second_rates = {}
    for move in audits:
        if move.first_jump is not None:
            first_rates[move.first_jump] = first_rates.get(move.first_jump, 0) + move.rate
        if move.second_jump is not None:
            second_rates[move.second_jump] = second_rates.get(move.second_jump, 0) + move.rate
    for x in range(size):
        for d in spec.jump_offsets:
            y = (x + d) % size
            want_first = rate(spec, xi, x, y) if xi[x] == 1 and xi[y] == 0 else 0
            want_second = rate(spec, zeta, x, y) if zeta[x] == 1 and zeta[y] == 0 else 0
            assert first_rates.get((x, y), 0) == want_first
            assert second_rates.get((x, y), 0) == want_second


def test_ordered_pairs_attractive_equals_increasing():
    # on comparable pairs the composed coupling generates exactly the moves
    # of the plain ordered coupling
    for spec in (MODELS["traffic2"], MODELS["gg"], MODELS["sep"]):
        for xi, zeta in ordered_pairs(5):
            a = {}
            for move in coupled_transitions(spec, xi, zeta, "increasing")[1]:
                key = (move.first_jump, move.second_jump)
                a[key] = a.get(key, 0) + move.rate
            b = {}
            for move in coupled_transitions(spec, xi, zeta, "attractive")[1]:
                key = (move.first_jump, move.second_jump)
                b[key] = b.get(key, 0) + move.rate
            assert a == b, (spec.name, xi, zeta)


def test_attractive_never_creates_discrepancies_on_ordered_pairs():
    spec = MODELS["gg"]
    for xi, zeta in ordered_pairs(5):
        for move in coupled_transitions(spec, xi, zeta, "attractive")[1]:
            assert move.order_preserving, (xi, zeta, move)


def test_cross_formulation_report():
    spec = MODELS["traffic2"]
    good = 0
    for xi, zeta in list(ordered_pairs(5))[:120]:
        report = oneD_cross_check(spec, xi, zeta)
        assert bool(report) and report.mismatches == []
        good += 1
    assert good == 120


def test_build_sets_frozen_example():
    spec = MODELS["sep-sym"]
    xi = (0, 0, 1, 0, 0, 0)
    zeta = (0, 1, 1, 0, 1, 0)
    dep = build_sets(spec, xi, zeta, 2, "departure")
    assert dep.main == (1,) and dep.bar == ()
    arr = build_sets(spec, xi, zeta, 3, "arrival")
    assert arr.main == () and arr.bar == (4,)


def test_build_sets_membership_conditions():
    spec = MODELS["gg"]
    xi = (0, 1, 1, 0, 0, 0, 1, 0)
    zeta = (0, 1, 1, 0, 1, 0, 1, 1)
    assert leq(xi, zeta)
    for site in range(8):
        if xi[site] == 1 and zeta[site] == 1:
            sets = build_sets(spec, xi, zeta, site, "departure")
            for y in sets.main:
                assert xi[y] == 0 and zeta[y] == 1 and rate(spec, xi, site, y) > 0
            for y in sets.bar:
                assert xi[y] == 0 and zeta[y] == 0
                assert rate(spec, zeta, site, y) > rate(spec, xi, site, y)
        if xi[site] == 0 and zeta[site] == 0:
            sets = build_sets(spec, xi, zeta, site, "arrival")
            for x in sets.main:
                assert xi[x] == 1 and zeta[x] == 1
                assert rate(spec, xi, x, site) > rate(spec, zeta, x, site)
            for x in sets.bar:
                assert xi[x] == 0 and zeta[x] == 1 and rate(spec, zeta, x, site) > 0


def test_partial_sums_are_nondecreasing():
    spec = MODELS["gg"]
    xi = (0, 1, 1, 0, 0, 0, 1, 0)
    zeta = (0, 1, 1, 0, 1, 0, 1, 1)
    for site in range(8):
        for role, both in (("departure", 1), ("arrival", 0)):
            if xi[site] == both and zeta[site] == both:
                sets = build_sets(spec, xi, zeta, site, role)
                s, t = partial_sums(spec, xi, zeta, sets)
                for series in (s, t):
                    steps = series.partials
                    assert steps[0] == 0
                    assert all(a <= b for a, b in zip(steps, steps[1:]))


series_strategy = st.lists(
    st.fractions(min_value=0, max_value=3, max_denominator=6), min_size=0, max_size=5
).map(PartialSumSeries.from_terms)


@given(series_strategy, series_strategy, st.integers(1, 7), st.integers(1, 7))
def test_h_term_nonnegative(s, t, m, n):
    assert h_term(m, n, s, t) >= 0


@given(series_strategy, series_strategy, st.integers(1, 6))
def test_h_term_rows_sum_to_clamped_increment(s, t, m):
    # summing the overlap over all n recovers the part of s's m-th increment
    # that lies below t's limit
    total = sum(h_term(m, n, s, t) for n in range(1, len(t.partials) + 1))
    assert total == min(s.at(m), t.limit) - min(s.at(m - 1), t.limit)


def test_h_term_rejects_zero_indices():
    series = PartialSumSeries.from_terms([1, 2])
    with pytest.raises(ValueError):
        h_term(0, 1, series, series)


def test_sep_attractive_is_the_basic_coupling():
    # for range-1 laws the composed coupling degenerates to: both copies try
    # the same jump; each moves when its own exclusion constraint allows
    spec = MODELS["sep"]
    for xi, zeta in pairs(4):
        _, audits = coupled_transitions(spec, xi, zeta, "attractive")
        seen = {}
        for move in audits:
            key = (move.first_jump, move.second_jump)
            seen[key] = seen.get(key, 0) + move.rate
        want = {}
        for x in range(4):
            y = (x + 1) % 4
            first_ok = xi[x] == 1 and xi[y] == 0
            second_ok = zeta[x] == 1 and zeta[y] == 0
            if first_ok and second_ok:
                want[((x, y), (x, y))] = 1
            elif first_ok:
                want[((x, y), None)] = 1
            elif second_ok:
                want[(None, (x, y))] = 1
        assert seen == want, (xi, zeta)
