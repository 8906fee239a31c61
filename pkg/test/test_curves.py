#!/usr/bin/env python
# -*- coding: utf-8 -*-
import math
from dataclasses import replace

import numpy as np
import pytest

from .common_test_data import BaseTestClass

from symbext import (
    Curve,
    MapSequence,
    IntervalUnion,
    curve_length,
    hyperbolic_time_set,
    local_volume_growth,
    oscillation_trim,
    landau_kolmogorov_constant,
    landau_kolmogorov_check,
    calibrated_constant,
    polynomial_corpus,
    calibrate_landau_kolmogorov,
    DomainError,
    PreconditionError,
)

hyperbolic = [[2.0, 0.0], [0.0, 0.5]]


def bent_curve(rng):
    """Quadratic through a point of the 0.8 disc with derivative oscillation <= |c|_1 / 6"""
    angle = rng.uniform(0, 2 * math.pi)
    v = rng.uniform(2, 10) * np.array([math.cos(angle), math.sin(angle)])
    bend = rng.uniform(0, 2 * math.pi)
    q = rng.uniform(0, 1) * np.linalg.norm(v) / 12 * np.array([math.cos(bend), math.sin(bend)])
    radius, phase = 0.8 * math.sqrt(rng.uniform()), rng.uniform(0, 2 * math.pi)
    center = radius * np.array([math.cos(phase), math.sin(phase)])
    t0 = rng.uniform()
    coefficients = [center - t0 * v + t0**2 * q, v - 2 * t0 * q, q]
    return Curve.polynomial(coefficients)


class TestIntervals(BaseTestClass):
    def test_merge_and_length(self):
        union = IntervalUnion(((0.5, 0.7), (0.1, 0.2), (0.15, 0.3)))
        assert union.intervals == ((0.1, 0.3), (0.5, 0.7))
        assert union.length == pytest.approx(0.4)
        assert union.contains([0.25, 0.4]).tolist() == [True, False]
        with pytest.raises(DomainError):
            IntervalUnion(((0.4, 0.2),))
        with pytest.raises(DomainError):
            IntervalUnion(((0.5, 1.5),))

    def test_cells_and_intersection(self):
        union = IntervalUnion.from_cells([True, True, False, True])
        assert union.intervals == ((0.0, 0.5), (0.75, 1.0))
        other = IntervalUnion(((0.25, 0.8),))
        assert union.intersect(other).intervals == ((0.25, 0.5), (0.75, 0.8))
        assert IntervalUnion.from_cells([False, False]).is_empty


class TestLengths(BaseTestClass):
    def test_circle_length(self):
        circle = Curve.circle(radius=0.5)
        assert curve_length(circle) == pytest.approx(math.pi, abs=1e-5)
        assert curve_length(circle, [(0.0, 0.5)]) == pytest.approx(math.pi / 2, abs=1e-5)

    def test_hyperbolic_times_expanding_axis(self):
        maps = MapSequence.constant(hyperbolic, 4)
        times = hyperbolic_time_set(maps, Curve.segment((0, 0), (1, 0)), math.log(2), 0.1, 2.0, 3, grid=1000)
        # B(3, sqrt 2) along the expanding axis is t < sqrt(2) / 4
        assert times.inner.length <= times.outer.length
        assert times.outer.length == pytest.approx(math.sqrt(2) / 4, abs=2e-3)
        assert times.inner.length == pytest.approx(math.sqrt(2) / 4, abs=2e-3)

    def test_volume_growth_expanding_axis(self):
        maps = MapSequence.constant(hyperbolic, 4)
        curve = Curve.segment((0, 0), (1, 0))
        report = local_volume_growth(maps, curve, math.log(2), 0.1, 2.0, 3, radius=1.0, grid=1000)
        assert report.unrestricted_length == pytest.approx(4.0, abs=1e-6)
        assert report.outer_length == pytest.approx(1.0, abs=0.01)
        assert report.inner_length <= report.outer_length
        assert report.to_dict()["n"] == 3


class TestOscillation(BaseTestClass):
    def test_segment_example(self):
        a, b, certificate = oscillation_trim(Curve.segment((-2, 0), (2, 0)))
        assert a == pytest.approx(0.25, abs=1e-9)
        assert b == pytest.approx(0.75, abs=1e-9)
        assert certificate.length_product == pytest.approx(2.0, abs=1e-6)
        assert certificate.constant == pytest.approx(2 * math.sqrt(6))
        assert certificate.valid

    def test_preconditions(self):
        with pytest.raises(PreconditionError) as err:
            oscillation_trim(Curve.circle(radius=0.5))
        assert err.value.hypothesis == "oscillation"
        with pytest.raises(PreconditionError) as err:
            oscillation_trim(Curve.segment((5, 5), (6, 5)))
        assert err.value.hypothesis == "meets_unit_ball"

    def test_random_bent_curves(self):
        rng = np.random.default_rng(2024)
        failures = []
        for index in range(500):
            _, _, certificate = oscillation_trim(bent_curve(rng))
            if not certificate.valid or certificate.min_speed_ratio < 2 / 3 - 1e-3:
                failures.append((index, certificate.to_dict()))
        assert not failures

    def test_speed_ratio(self):
        _, _, certificate = oscillation_trim(Curve.polynomial([[0.1, -0.6], [0.0, 1.0], [0.08, 0.0]]))
        assert certificate.speed_ok and certificate.valid
        assert certificate.min_speed_ratio == pytest.approx(1 / math.sqrt(1 + 0.16**2), rel=1e-6)
        slow = replace(certificate, min_speed_ratio=0.6)
        assert not slow.speed_ok
        assert not slow.valid
        assert slow.to_dict()["speed_ok"] is False


class TestLandauKolmogorov(BaseTestClass):
    def test_analytic_constants(self):
        assert landau_kolmogorov_constant(1) == 1.0
        assert landau_kolmogorov_constant(1.5) == pytest.approx(2.0)
        assert landau_kolmogorov_constant(2) == pytest.approx(2.0)
        assert landau_kolmogorov_constant(3) == pytest.approx(16.0)
        with pytest.raises(DomainError):
            landau_kolmogorov_constant(0)

    def test_calibrated_table(self):
        assert calibrated_constant(2) == 4.0
        assert calibrated_constant(5) == pytest.approx(2 * landau_kolmogorov_constant(5))

    def test_parabola(self):
        check = landau_kolmogorov_check(Curve.polynomial([[0, 0], [1, 0], [0, 1]]), 2)
        assert check.ratios[0] == pytest.approx(math.sqrt(2) / (math.sqrt(2) + 2), rel=1e-6)
        assert check.holds

    def test_fresh_corpus(self):
        for s in (1.5, 2, 3):
            constant = calibrated_constant(s)
            for curve in polynomial_corpus(200, 8, seed=99):
                assert landau_kolmogorov_check(curve, s, C_cal=constant, grid=2001).holds

    def test_calibration_floor(self):
        result = calibrate_landau_kolmogorov(2, size=20, seed=1)
        assert result.constant >= 2 * result.analytic
        assert result.size == 20
