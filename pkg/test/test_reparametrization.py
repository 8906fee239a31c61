#!/usr/bin/env python
# -*- coding: utf-8 -*-
import math

import numpy as np
import pytest

from .common_test_data import BaseTestClass, cat_exponent

from symbext import (
    Curve,
    MapSequence,
    AffineChart,
    ChartFamily,
    PropertyReport,
    builtin_system,
    defect_table,
    cover_budget,
    per_step_factor,
    sublevel_charts,
    build_chart_family,
    verify_chart_properties,
    fit_count_constants,
    constants_stable,
    reparametrize_bowen_ball,
    derivative_comparability,
    monotone_branch_check,
    DomainError,
    PreconditionError,
    BudgetExceededError,
)

hyperbolic = [[2.0, 0.0], [0.0, 0.5]]


class TestCharts(BaseTestClass):
    def test_affine_chart(self):
        chart = AffineChart(0.2, 0.6)
        assert chart.length == pytest.approx(0.4)
        assert chart.apply(0.5) == pytest.approx(0.4)
        assert chart.local(0.4) == pytest.approx(0.5)
        assert chart.contains([0.1, 0.3]).tolist() == [False, True]
        halves = chart.split(2, "half")
        assert [(h.lo, h.hi) for h in halves] == [pytest.approx((0.2, 0.4)), pytest.approx((0.4, 0.6))]
        assert halves[0].tags == ("half:2",)
        with pytest.raises(DomainError):
            AffineChart(0.6, 0.2)
        with pytest.raises(DomainError):
            AffineChart(-0.1, 0.5)

    def test_family_cover(self):
        family = ChartFamily(charts=(AffineChart(0.0, 0.25), AffineChart(0.5, 1.0)), step=1, defects=(), r=2.0)
        assert family.count == len(family) == 2
        assert family.log_count == pytest.approx(math.log(2))
        assert family.covers([0.1, 0.4, 0.75]).tolist() == [True, False, True]
        assert family.union().length == pytest.approx(0.75)
        assert family.to_dict()["count"] == 2
        assert ChartFamily(charts=(), step=0, defects=(), r=2.0).log_count == -math.inf

    def test_property_report(self):
        report = PropertyReport(
            {"i": False, "ii": True, "iii": True, "iv": True, "v": True},
            {},
            (("i", 0, 2), ("i", 3, 1), ("iv", None, None)),
        )
        assert not report.all_passed
        assert report.first_failure == ("i", 0, 2)
        assert report.failing_steps("i") == [1, 2]
        assert report.failing_steps("iv") == []


class TestSublevel(BaseTestClass):
    def test_segment_example(self):
        g = Curve.segment((-0.5, 0), (0.5, 0))
        charts = sublevel_charts(g, 0.25, r=2)
        assert len(charts) == 66
        assert charts[0].lo == pytest.approx(0.25, abs=1e-8)
        assert charts[-1].hi == pytest.approx(0.75, abs=1e-8)
        assert all(c.length == pytest.approx(0.5 / 66, abs=1e-8) for c in charts)

    def test_arguments(self):
        g = Curve.segment((-0.5, 0), (0.5, 0))
        with pytest.raises(DomainError):
            sublevel_charts(g, 0.0, r=2)
        with pytest.raises(DomainError):
            sublevel_charts(g, 0.25, r=1)
        with pytest.raises(PreconditionError) as err:
            sublevel_charts(g, 0.25, r=2, certificate=0.5)
        assert err.value.hypothesis == "norm_certificate"
        with pytest.raises(BudgetExceededError):
            sublevel_charts(g, 0.25, r=2, max_charts=10)

    def test_empty_sublevel(self):
        assert sublevel_charts(Curve.segment((1, 1), (2, 1)), 0.25, r=2) == []

    def test_budgets(self):
        assert cover_budget(2) == 400
        assert cover_budget(1.5) == 2200
        assert per_step_factor(1, 2, C_LK=4.0, C_cover=400) == 3 * 13 * 400


class TestChartFamily(BaseTestClass):
    @classmethod
    def setUpClass(cls):
        cls.maps = MapSequence.constant(hyperbolic, 6)
        cls.curve = Curve.segment((0, 0), (0.1, 0))
        cls.defects = tuple(int(k) for k in defect_table(cls.maps, cls.curve, [0.5], 1).entries[0])
        cls.family = build_chart_family(cls.maps, cls.curve, cls.defects, 2.0, n=2, grid=1001)

    def test_defects_along_expanding_axis(self):
        assert self.defects == (1,)

    def test_family(self):
        assert self.family.step == 2
        assert len(self.family.history) == 3
        assert self.family.count >= 3
        assert self.family.covers(np.linspace(0, 1, 1001)).all()

    def test_lineage_tags(self):
        for chart in self.family.charts:
            assert chart.tags[0].startswith("norm:")
            assert sum(tag.startswith("theta:") for tag in chart.tags) == 2
            assert chart.to_dict()["tags"] == list(chart.tags)

    def test_properties(self):
        report = verify_chart_properties(self.family, self.maps, self.curve, self.defects, 2.0, grid=1001)
        assert report.all_passed, report.to_dict()
        assert report.worst["cover_misses"] == 0
        assert report.worst["ratio"] == pytest.approx(0.0, abs=1e-9)

    def test_monotone_branches(self):
        assert monotone_branch_check(self.family, self.maps, self.curve).holds

    def test_derivative_comparability(self):
        result = derivative_comparability(self.maps, self.curve, self.family.charts[0], 2)
        assert result.max_ratio == pytest.approx(1.0)
        assert result.min_ratio == pytest.approx(1.0)
        assert result.pairs > 0

    def test_bad_arguments(self):
        with pytest.raises(DomainError):
            build_chart_family(self.maps, self.curve, (0,), 2.0, n=2)
        with pytest.raises(DomainError):
            build_chart_family(self.maps, self.curve, (), 2.0, n=3)
        with pytest.raises(DomainError):
            build_chart_family(self.maps, self.curve, (1,), 1.0)
        with pytest.raises(DomainError):
            build_chart_family(MapSequence.constant(hyperbolic, 1), self.curve, (1,), 2.0, n=2)
        with pytest.raises(PreconditionError) as err:
            build_chart_family(self.maps, Curve.segment((0, 0), (2, 0)), (1,), 2.0, n=2)
        assert err.value.hypothesis == "curve_normalization"


class TestCountConstants(BaseTestClass):
    def test_fit_doubling_counts(self):
        fit = fit_count_constants([1, 2, 4, 8], (), 2.0)
        assert fit.A == pytest.approx(math.log(2))
        assert fit.B == pytest.approx(0.0, abs=1e-9)
        assert fit.residual == pytest.approx(0.0, abs=1e-9)

    def test_fit_without_charts(self):
        fit = fit_count_constants([0, 0, 0], (1, 1), 2.0)
        assert (fit.A, fit.B, fit.residual) == (0.0, 0.0, 0.0)

    def test_stability(self):
        assert constants_stable([1.0, 1.1, 0.95])
        assert not constants_stable([1.0, 2.0])
        assert constants_stable([])


class TestBowenReparametrization(BaseTestClass):
    def test_cat_bowen_ball(self):
        cat = builtin_system("cat", r=2.0)
        result = reparametrize_bowen_ball(
            cat, [0.1, 0.2], Curve.segment((0, 0), (0.1, 0)), 0.5, 0.1, 2.0, 2, 0.05, 2.0, grid=1001
        )
        assert result.lyapunov_rate == pytest.approx(cat_exponent)
        assert result.lyapunov_term >= 0
        assert result.holds
        summary = result.to_dict()
        assert summary["count"] == result.family.count
        assert summary["holds"]

    def test_needs_a_step(self):
        with pytest.raises(DomainError):
            reparametrize_bowen_ball(
                builtin_system("cat"), [0.1, 0.2], Curve.segment((0, 0), (0.1, 0)), 0.5, 0.1, 2.0, 0, 0.05, 2.0
            )
