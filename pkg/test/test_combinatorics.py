#!/usr/bin/env python
# -*- coding: utf-8 -*-
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import comb

from .common_test_data import BaseTestClass

from symbext import (
    Curve,
    MapSequence,
    bernoulli_entropy,
    count_admitting,
    iter_admitting,
    enumerate_admitting,
    combinatorial_bound_check,
    clamped_integer_part,
    DefectSequence,
    defect_sequence,
    defect_sequences,
    class_count_threshold,
    realized_class_bound,
    DomainError,
    EscapeError,
    BudgetExceededError,
    DegenerateTangencyError,
    PreconditionError,
)

hyperbolic = [[2.0, 0.0], [0.0, 0.5]]


class TestCounting(BaseTestClass):
    def test_bernoulli_entropy(self):
        assert bernoulli_entropy(1) == 0.0
        assert bernoulli_entropy(2) == pytest.approx(math.log(2))
        assert bernoulli_entropy(4) == pytest.approx(-0.25 * math.log(0.25) - 0.75 * math.log(0.75))
        with pytest.raises(DomainError):
            bernoulli_entropy(0.5)

    def test_small_enumeration(self):
        assert enumerate_admitting(2, 2) == [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (3, 1)]
        assert count_admitting(2, 2) == 6
        assert enumerate_admitting(1, 1) == [(1,)]

    def test_enumeration_matches_binomial(self):
        for n in range(1, 7):
            for S in range(1, 5):
                assert len(enumerate_admitting(n, S)) == comb(n * S, n, exact=True)

    def test_enumeration_is_sorted_and_admitting(self):
        sequences = list(iter_admitting(3, 3))
        assert sequences == sorted(sequences)
        assert all(min(s) >= 1 and sum(s) <= 9 for s in sequences)

    def test_enumeration_guard(self):
        with pytest.raises(BudgetExceededError) as err:
            enumerate_admitting(9, 2)
        assert err.value.diagnostics.count == count_admitting(9, 2)
        with pytest.raises(DomainError):
            count_admitting(0, 2)

    def test_bound_holds_on_range(self):
        for n in range(1, 41):
            for S in range(1, 11):
                assert combinatorial_bound_check(n, S).holds

    @settings(max_examples=100, deadline=None)
    @given(st.integers(min_value=1, max_value=200), st.integers(min_value=1, max_value=50))
    def test_bound_property(self, n, S):
        check = combinatorial_bound_check(n, S)
        assert check.log_count <= check.bound

    def test_clamped_integer_part(self):
        assert clamped_integer_part(-0.5) == 0
        assert clamped_integer_part(2.5) == 2
        assert clamped_integer_part(3 - 1e-14) == 3
        assert clamped_integer_part(math.inf) == math.inf
        assert clamped_integer_part([0.2, 1.7, -3.0]).tolist() == [0.0, 1.0, 0.0]


class TestDefects(BaseTestClass):
    def test_defect_sequence_type(self):
        seq = DefectSequence((1, 2, 3))
        assert seq.n == 3 and seq.total == 6
        assert seq.admits(2) and not seq.admits(1)
        assert seq.admitted_value() == 2
        assert seq.to_list() == [1, 2, 3]
        with pytest.raises(DomainError):
            DefectSequence((0, 1))

    def test_expanding_axis(self):
        maps = MapSequence.constant(hyperbolic, 4)
        curve = Curve.segment((0, 0), (0.01, 0))
        assert defect_sequence(maps, curve, 0.5, 3).entries == (1, 1, 1)

    def test_contracting_axis(self):
        maps = MapSequence.constant(hyperbolic, 4)
        curve = Curve.segment((0, 0), (0, 0.01))
        # |DT| = 2 while the curve contracts by 1/2, log 4 has integer part 1
        assert defect_sequence(maps, curve, 0.5, 3).entries == (2, 2, 2)

    def test_escape_and_tangency(self):
        maps = MapSequence.constant(hyperbolic, 4)
        with pytest.raises(EscapeError):
            defect_sequences(maps, Curve.segment((0, 0), (1, 0)), [1.0], 3)
        # n = 2 checks up to 0.15 * 2^3 = 1.2, n = 3 reaches 0.15 * 2^4 = 2.4
        assert defect_sequences(maps, Curve.segment((0, 0), (1, 0)), [0.15], 2).tolist() == [[1, 1]]
        with pytest.raises(EscapeError):
            defect_sequences(maps, Curve.segment((0, 0), (1, 0)), [0.15], 3)
        with pytest.raises(DomainError):
            defect_sequence(maps, Curve.segment((0, 0), (0.01, 0)), 1.5, 3)
        flat = MapSequence.constant([[1.0, 0.0], [0.0, 0.0]], 3)
        with pytest.raises(DegenerateTangencyError):
            defect_sequence(flat, Curve.segment((0, 0), (0, 0.01)), 0.5, 2)

    def test_class_threshold(self):
        assert class_count_threshold(2) == 0
        with pytest.raises(DomainError):
            class_count_threshold(1)

    def test_realized_classes_expanding_axis(self):
        maps = MapSequence.constant(hyperbolic, 6)
        curve = Curve.segment((0, 0), (1, 0))
        bound = realized_class_bound(maps, curve, math.log(2), 0.1, 2.0, 4, ts=np.linspace(0, 1, 2001))
        assert bound.observed == 1
        assert bound.classes == ((1, 1, 1),)
        assert bound.lyapunov_rate == pytest.approx(math.log(2))
        assert bound.log_bound == pytest.approx(10.0)
        assert bound.holds
        assert "below_threshold" not in bound.flags

    def test_realized_classes_empty(self):
        maps = MapSequence.constant(hyperbolic, 6)
        curve = Curve.segment((0, 0), (1, 0))
        bound = realized_class_bound(maps, curve, 5.0, 0.1, 2.0, 3, ts=np.linspace(0, 1, 101))
        assert bound.observed == 0
        assert "empty_hyperbolic_sample" in bound.flags
        with pytest.raises(PreconditionError) as err:
            realized_class_bound(maps, curve, math.log(2), 0.5, 2.0, 3)
        assert err.value.hypothesis == "gamma_range"
