#!/usr/bin/env python
# -*- coding: utf-8 -*-
import math

import numpy as np
import pytest

from .common_test_data import BaseTestClass, cat_exponent

from symbext import (
    MapSequence,
    OrbitSample,
    builtin_system,
    log_plus,
    log_plus_average,
    lyapunov_spectrum,
    determinant_rate,
    exterior_growth,
    empirical_positive_sum,
    sequence_log_plus_average,
    birkhoff_deviation,
    cocycle_logs,
    subadditive_sequence,
    ruelle_margulis_bound,
    DomainError,
)


class TestLyapunov(BaseTestClass):
    @classmethod
    def setUpClass(cls):
        cls.cat = builtin_system("cat")
        cls.doubling = builtin_system("doubling2d")

    def test_log_plus(self):
        assert log_plus(0) == 0.0
        assert log_plus(0.5) == 0.0
        assert log_plus(math.e) == pytest.approx(1.0)
        assert np.allclose(log_plus([0.0, 1.0, math.e**2]), [0.0, 0.0, 2.0])

    def test_cat_spectrum(self):
        report = lyapunov_spectrum(self.cat, [0.1, 0.2], 200)
        assert report.exponents[0] == pytest.approx(cat_exponent, abs=1e-6)
        assert report.exponents[1] == pytest.approx(-cat_exponent, abs=1e-6)
        assert len(report.convergence_trace) == 200
        assert ruelle_margulis_bound(report) == pytest.approx(cat_exponent, abs=1e-6)
        assert report.invertible

    def test_non_invertible_bound(self):
        report = lyapunov_spectrum(self.doubling, [0.1, 0.2], 50)
        assert not report.invertible
        assert np.allclose(report.exponents, math.log(2))
        assert report.sum_negative == 0.0
        assert ruelle_margulis_bound(report) == pytest.approx(2 * math.log(2))
        assert report.to_dict()["invertible"] is False

    def test_invertible_flags(self):
        for name in ("cat", "perturbed_cat", "standard", "henon", "identity", "diag_linear"):
            assert builtin_system(name).invertible, name
        assert not builtin_system("doubling2d", {"a": 3, "b": 1}).invertible

    def test_cat_spectrum_qr(self):
        report = lyapunov_spectrum(self.cat, [0.1, 0.2], 200, method="qr_recursion")
        assert report.exponents[0] == pytest.approx(cat_exponent, abs=1e-2)
        assert sum(report.exponents) == pytest.approx(0.0, abs=1e-9)

    def test_identity_spectrum(self):
        report = lyapunov_spectrum(builtin_system("identity"), [0.3, 0.3], 20)
        assert np.allclose(report.exponents, 0.0)
        assert report.chi1_plus == 0.0

    def test_bad_arguments(self):
        with pytest.raises(DomainError):
            lyapunov_spectrum(self.cat, [0.1, 0.2], 5)
        with pytest.raises(DomainError):
            lyapunov_spectrum(self.cat, [0.1, 0.2], 50, method="svd")
        with pytest.raises(DomainError):
            exterior_growth(self.cat, 3, 10, 100)

    def test_birkhoff_averages(self):
        assert log_plus_average(self.cat, [0.1, 0.2], 30) == pytest.approx(cat_exponent)
        assert determinant_rate(self.cat, [0.1, 0.2], 10) == pytest.approx(0.0, abs=1e-9)
        assert determinant_rate(self.doubling, [0.1, 0.2], 10) == pytest.approx(math.log(4))

    def test_exterior_growth(self):
        growth = exterior_growth(self.cat, 1, 10, 100)
        assert growth.value == pytest.approx(cat_exponent, abs=1e-9)
        assert growth.skipped == 0
        doubling = exterior_growth(self.doubling, 2, 10, 100)
        assert doubling.per_order == pytest.approx((math.log(2), math.log(4)))
        assert doubling.value == pytest.approx(math.log(4))

    def test_exterior_growth_threads(self):
        single = exterior_growth(self.cat, 2, 8, 400)
        threaded = exterior_growth(self.cat, 2, 8, 400, workers=3)
        assert single.value == pytest.approx(threaded.value)

    def test_positive_sum(self):
        sample = OrbitSample.from_orbit(self.cat, [0.1, 0.2], 50)
        estimate = empirical_positive_sum(sample, 1, n_max=10)
        assert estimate.value == pytest.approx(cat_exponent, abs=1e-9)
        assert len(estimate.trace) == 10

    def test_sequence_averages(self):
        maps = MapSequence.constant([[2, 0], [0, 0.5]], 5)
        assert sequence_log_plus_average(maps, 5) == pytest.approx(math.log(2))
        deviation = birkhoff_deviation(maps, [[0.1, 0.1], [0.2, -0.1]], 5)
        assert np.allclose(deviation, 0.0)

    def test_cocycle_logs(self):
        logs = cocycle_logs(self.cat, [[0.1, 0.2], [0.4, 0.7]], 3)
        assert logs.alive.tolist() == [True, True]
        for k in range(3):
            assert np.allclose(logs.log_norm[k], (k + 1) * cat_exponent)
        assert np.allclose(logs.log_det, 0.0, atol=1e-9)
        henon_logs = cocycle_logs(builtin_system("henon"), [[0.0, 0.0], [3.9, 0.0]], 3)
        assert henon_logs.alive.tolist() == [True, False]

    def test_subadditive_sequence(self):
        sample = OrbitSample.from_orbit(self.doubling, [0.1, 0.2], 20)
        totals = subadditive_sequence(sample, 2, 3)
        assert np.allclose(totals, [math.log(4), 2 * math.log(4), 3 * math.log(4)])
        with pytest.raises(DomainError):
            subadditive_sequence(sample, 2, 0)
