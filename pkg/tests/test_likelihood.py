import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chainorder.counts import SymbolSequence, build_counts
from chainorder.errors import InfeasibleError
from chainorder.likelihood import (
    argmin_first,
    criteria,
    estimate_order,
    log_likelihood,
    penalty,
)


def table_of(symbols, m, max_len):
    return build_counts(SymbolSequence(np.asarray(symbols), m), max_len)


def naive_log_lik(symbols, eta):
    """Transition-by-transition log likelihood with MLE probabilities."""
    from collections import Counter

    pairs = Counter()
    ctx = Counter()
    for j in range(len(symbols) - eta):
        a = tuple(symbols[j : j + eta])
        pairs[a, symbols[j + eta]] += 1
        ctx[a] += 1
    return sum(c * math.log(c / ctx[a]) for (a, _), c in pairs.items())


def test_alternating_order_one_is_degenerate():
    assert log_likelihood(table_of([1, 2, 1, 2], 2, 2), 1) == 0.0


def test_alternating_order_zero():
    value = log_likelihood(table_of([1, 2, 1, 2], 2, 2), 0)
    assert value == pytest.approx(4 * math.log(0.5), abs=1e-12)
    assert value == pytest.approx(-2.772589, abs=1e-6)


@given(st.integers(2, 3).flatmap(
    lambda m: st.tuples(st.just(m), st.lists(st.integers(1, m), min_size=4, max_size=40))))
def test_matches_transition_oracle(data):
    m, symbols = data
    t = table_of(symbols, m, 4)
    for eta in range(4):
        assert log_likelihood(t, eta) == pytest.approx(naive_log_lik(symbols, eta), abs=1e-9)


@given(st.integers(2, 4).flatmap(
    lambda m: st.tuples(st.just(m), st.lists(st.integers(1, m), min_size=6, max_size=200))))
def test_nonpositive_and_monotone(data):
    m, symbols = data
    t = table_of(symbols, m, 6)
    ll = [log_likelihood(t, eta) for eta in range(6)]
    assert all(v <= 1e-12 for v in ll)
    assert all(b >= a - 1e-9 for a, b in zip(ll, ll[1:]))


def test_rejects_order_beyond_table():
    with pytest.raises(ValueError):
        log_likelihood(table_of([1, 2, 1, 2], 2, 2), 2)


class TestPenalties:
    def test_printed_values(self):
        p = penalty(3, 1000, 1, "printed")
        assert p["aic"] == 36
        # 18 ln(1000) = 54 ln(10) = 124.33960 (independent route through ln 10)
        assert p["bic"] == pytest.approx(54 * 2.302585092994046, abs=1e-9)
        assert p["bic"] == pytest.approx(124.3396, abs=5e-5)
        assert p["edc"] == pytest.approx(17.3938, abs=5e-5)
        assert p["edc"] == pytest.approx(9 * math.log(math.log(1000)), rel=1e-14)

    def test_free_parameter_values(self):
        p = penalty(3, 1000, 1)
        # an order-1 chain on 3 symbols has 3 * 2 free probabilities
        assert p["aic"] == 12
        assert p["bic"] == pytest.approx(6 * math.log(1000), rel=1e-14)
        assert p["edc"] == pytest.approx(12 * math.log(math.log(1000)), rel=1e-14)

    def test_unknown_convention(self):
        with pytest.raises(ValueError):
            penalty(3, 1000, 1, "made-up")

    @given(st.integers(2, 6), st.integers(3, 10**7), st.integers(0, 6))
    def test_edc_below_bic(self, m, n, eta):
        for conv in ("free-parameters", "printed"):
            p = penalty(m, n, eta, conv)
            assert p["edc"] <= p["bic"]

    @given(st.integers(2, 6), st.integers(3, 10**7), st.integers(0, 6))
    def test_aic_below_edc_exactly_when_condition_holds(self, m, n, eta):
        lnln = math.log(math.log(n))
        free = penalty(m, n, eta)
        assert (free["aic"] <= free["edc"]) == (lnln >= 1)
        printed = penalty(m, n, eta, "printed")
        assert (printed["aic"] <= printed["edc"]) == (lnln >= 2 * (m - 1))


def test_criteria_curve_layout():
    t = table_of([1, 2, 3, 1, 2, 3, 1, 1, 2, 3] * 10, 3, 3)
    curve = criteria(t, 2)
    for eta in range(3):
        p = penalty(3, 100, eta)
        for name in ("aic", "bic", "edc"):
            assert curve.values(name)[eta] == -2 * curve.log_lik[eta] + p[name]
    header, *rows = curve.to_csv().splitlines()
    assert header == "eta,log_lik,aic,bic,edc"
    assert len(rows) == 3


def test_criteria_deterministic():
    t = table_of([1, 2, 2, 1, 3, 3, 2, 1] * 20, 3, 4)
    a, b = criteria(t, 3), criteria(t, 3)
    assert a.aic.tobytes() == b.aic.tobytes()
    assert a.log_lik.tobytes() == b.log_lik.tobytes()


def test_criteria_rejects_tiny_n():
    with pytest.raises(InfeasibleError):
        criteria(table_of([1, 2], 2, 1), 0)


def test_criteria_needs_deep_enough_table():
    with pytest.raises(InfeasibleError):
        criteria(table_of([1, 2, 1, 2, 1], 2, 2), 2)


def test_argmin_examples():
    assert argmin_first([10, 5, 7, 9, 11, 13]) == 1
    assert argmin_first([5, 5, 7, 9]) == 0


def test_alternating_chain_selects_order_one():
    t = table_of([1, 2] * 50, 2, 4)
    curve = criteria(t, 3)
    for name in ("aic", "bic", "edc"):
        assert estimate_order(curve, name) == 1
