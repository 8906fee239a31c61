#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# Part of the Symbext package.
#
# Copyright (c) 2025 - Symbext Developers - MIT License
"""
Curves under iteration: lengths, hyperbolic times, local volume growth, the
oscillation trimming of a curve to the unit ball and the Landau-Kolmogorov
interpolation check.
"""
from __future__ import absolute_import
import math
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.spatial.distance import pdist

from symbext.namespace import Namespace
from symbext.shared_variables import defaults, dimension, DomainError, PreconditionError
from symbext.dynamics import Curve, holder_norm_estimate
from symbext.file_operations import load_constants

__all__ = [
    "IntervalUnion",
    "TimeSet",
    "VolumeGrowthReport",
    "OscillationCertificate",
    "LKCheck",
    "curve_length",
    "hyperbolic_time_mask",
    "hyperbolic_time_set",
    "bowen_mask",
    "local_volume_growth",
    "oscillation_trim",
    "landau_kolmogorov_check",
    "landau_kolmogorov_constant",
    "calibrated_constant",
    "polynomial_corpus",
    "calibrate_landau_kolmogorov",
]

log = logging.getLogger("symbext.curves")

oscillation_samples = 2048
# grid slack on min |c'| >= 2/3 |c|_1
speed_ratio_tolerance = 1e-3


@dataclass(frozen=True)
class IntervalUnion:
    """Sorted, pairwise disjoint closed intervals inside [0, 1]"""

    intervals: tuple = ()

    def __post_init__(self):
        cleaned = []
        for lo, hi in sorted((float(lo), float(hi)) for lo, hi in self.intervals):
            if hi < lo:
                raise DomainError("Interval ({0}, {1}) is reversed".format(lo, hi))
            if lo < 0 or hi > 1:
                raise DomainError("Interval ({0}, {1}) leaves [0, 1]".format(lo, hi))
            if cleaned and lo <= cleaned[-1][1]:
                cleaned[-1] = (cleaned[-1][0], max(cleaned[-1][1], hi))
            else:
                cleaned.append((lo, hi))
        object.__setattr__(self, "intervals", tuple(cleaned))

    @classmethod
    def full(cls):
        return cls(((0.0, 1.0),))

    @classmethod
    def from_cells(cls, mask):
        """Merge the marked cells of a uniform partition of [0, 1]"""
        mask = np.asarray(mask, dtype=bool)
        count = len(mask)
        out = []
        start = None
        for j, marked in enumerate(mask):
            if marked and start is None:
                start = j
            elif not marked and start is not None:
                out.append((start / count, j / count))
                start = None
        if start is not None:
            out.append((start / count, 1.0))
        return cls(tuple(out))

    @property
    def length(self):
        return float(sum(hi - lo for lo, hi in self.intervals))

    @property
    def is_empty(self):
        return not self.intervals

    def contains(self, t):
        t = np.asarray(t, dtype=float)
        inside = np.zeros(t.shape, dtype=bool)
        for lo, hi in self.intervals:
            inside |= (t >= lo) & (t <= hi)
        return inside

    def intersect(self, other):
        out = []
        for lo, hi in self.intervals:
            for olo, ohi in other.intervals:
                a, b = max(lo, olo), min(hi, ohi)
                if a < b:
                    out.append((a, b))
        return IntervalUnion(tuple(out))

    def to_list(self):
        return [[lo, hi] for lo, hi in self.intervals]

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)


@dataclass(frozen=True, eq=False)
class TimeSet:
    inner: IntervalUnion
    outer: IntervalUnion
    cells: Namespace = field(default_factory=Namespace)

    def to_dict(self):
        return {"inner": self.inner.to_list(), "outer": self.outer.to_list()}


@dataclass(frozen=True)
class VolumeGrowthReport:
    n: int
    raw_length: float
    inner_length: float
    unrestricted_length: float
    restriction: IntervalUnion
    inner_restriction: IntervalUnion
    parameters: dict = field(default_factory=dict)

    @property
    def outer_length(self):
        return self.raw_length

    def to_dict(self):
        return {
            "n": self.n,
            "raw_length": self.raw_length,
            "inner_length": self.inner_length,
            "unrestricted_length": self.unrestricted_length,
            "restriction": self.restriction.to_list(),
            "inner_restriction": self.inner_restriction.to_list(),
            "parameters": dict(self.parameters),
        }


@dataclass(frozen=True)
class OscillationCertificate:
    a: float
    b: float
    w: float
    axis: tuple
    speed_norm: float
    length_product: float
    constant: float
    ball_contained: bool
    cube_contained: bool
    min_speed_ratio: float

    @property
    def length_ok(self):
        return self.length_product <= self.constant * (1 + 1e-9)

    @property
    def speed_ok(self):
        return self.min_speed_ratio >= 2.0 / 3.0 - speed_ratio_tolerance

    @property
    def valid(self):
        return self.ball_contained and self.cube_contained and self.length_ok and self.speed_ok

    def to_dict(self):
        return {
            "a": self.a,
            "b": self.b,
            "w": self.w,
            "axis": list(self.axis),
            "speed_norm": self.speed_norm,
            "length_product": self.length_product,
            "constant": self.constant,
            "ball_contained": self.ball_contained,
            "cube_contained": self.cube_contained,
            "min_speed_ratio": self.min_speed_ratio,
            "speed_ok": self.speed_ok,
            "valid": self.valid,
        }


@dataclass(frozen=True)
class LKCheck:
    ratios: tuple
    holds: bool
    norms: dict
    constant: float

    def to_dict(self):
        return {"ratios": list(self.ratios), "holds": self.holds, "norms": dict(self.norms), "constant": self.constant}


def curve_length(curve, restriction=None):
    """
    Arclength of the curve over a union of parameter intervals by adaptive
    quadrature of the speed.

    ... code:: python

        symbext.curve_length(Curve.circle(radius=0.5))
        # 3.14159...

    :param curve: Curve
    :param restriction: IntervalUnion, list of (lo, hi) pairs or None for [0, 1]
    :return: float
    """
    if restriction is None:
        restriction = IntervalUnion.full()
    elif not isinstance(restriction, IntervalUnion):
        restriction = IntervalUnion(tuple(tuple(pair) for pair in restriction))

    def speed(t):
        return float(curve.speed(t)[0])

    total = 0.0
    for lo, hi in restriction:
        if hi > lo:
            total += quad(speed, lo, hi, epsabs=1e-6, limit=200)[0]
    return total


def _check_growth_parameters(chi, gamma, C):
    if not chi > 0:
        raise PreconditionError("Need chi > 0, got {0}".format(chi), hypothesis="chi_positive")
    if not gamma > 0:
        raise PreconditionError("Need gamma > 0, got {0}".format(gamma), hypothesis="gamma_positive")
    if not C > 1:
        raise PreconditionError("Need C > 1, got {0}".format(C), hypothesis="constant_range")


def bowen_mask(maps, curve, ts, n, radius):
    """Parameters whose image lies in B(n, radius) of the sequence"""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    return maps.in_bowen_ball(curve.value(ts), n, radius)


def hyperbolic_time_mask(maps, curve, ts, chi, gamma, C, n):
    """
    Parameters t with curve(t) in B(n, sqrt(d)) and
    C^-1 e^{(chi - gamma) i} <= |D_t(T^i o curve)| <= C e^{(chi + gamma) i}
    for i = 1..n.
    """
    _check_growth_parameters(chi, gamma, C)
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    jets = maps.push_jets(curve, ts, n, order=1)
    mask = bowen_mask(maps, curve, ts, n, math.sqrt(dimension))
    with np.errstate(invalid="ignore", over="ignore"):
        for i in range(1, n + 1):
            speed = np.linalg.norm(jets[i][1], axis=-1)
            lower = math.exp((chi - gamma) * i) / C
            upper = C * math.exp((chi + gamma) * i)
            mask &= (speed >= lower * (1 - 1e-12)) & (speed <= upper * (1 + 1e-12))
    return mask


def _cell_samples(grid):
    """Samples at the ends and centre of each of ``grid`` cells"""
    return np.linspace(0.0, 1.0, 2 * grid + 1)


def _cells(mask, grid):
    triples = np.stack([mask[0:-1:2], mask[1::2], mask[2::2]], axis=1)
    return triples.all(axis=1), triples.any(axis=1)


def hyperbolic_time_set(maps, curve, chi, gamma, C, n, grid=None):
    """
    Grid approximation of the hyperbolic times of the curve. A cell belongs
    to the inner set when all of its samples pass, to the outer set when
    any does.

    :return: TimeSet
    """
    grid = grid or defaults.curve_grid
    mask = hyperbolic_time_mask(maps, curve, _cell_samples(grid), chi, gamma, C, n)
    inner, outer = _cells(mask, grid)
    return TimeSet(IntervalUnion.from_cells(inner), IntervalUnion.from_cells(outer), Namespace(inner=inner, outer=outer))


def local_volume_growth(maps, curve, chi, gamma, C, n, radius=1.0, grid=None):
    """
    Length of T^{n-1} o curve over the hyperbolic times that stay in the
    Bowen ball {t : |T^k curve(t)| < radius, k < n} of the sequence.

    :param maps: MapSequence, usually from ``localize``
    :param curve: Curve in the sequence's coordinates
    :param n: number of steps, >= 1
    :param radius: Bowen radius in sequence coordinates
    :return: VolumeGrowthReport
    """
    if n < 1:
        raise DomainError("Volume growth needs n >= 1")
    grid = grid or defaults.curve_grid
    ts = _cell_samples(grid)
    mask = hyperbolic_time_mask(maps, curve, ts, chi, gamma, C, n) & bowen_mask(maps, curve, ts, n, radius)
    inner_cells, outer_cells = _cells(mask, grid)
    inner, outer = IntervalUnion.from_cells(inner_cells), IntervalUnion.from_cells(outer_cells)
    image = maps.push(curve, n - 1)
    unrestricted = curve_length(image)
    report = VolumeGrowthReport(
        n=n,
        raw_length=curve_length(image, outer) if not outer.is_empty else 0.0,
        inner_length=curve_length(image, inner) if not inner.is_empty else 0.0,
        unrestricted_length=unrestricted,
        restriction=outer,
        inner_restriction=inner,
        parameters={"chi": chi, "gamma": gamma, "C": C, "radius": radius, "grid": grid, "sequence": maps.name},
    )
    log.debug("Volume growth n={0}: inner {1:.6g} outer {2:.6g}".format(n, report.inner_length, report.raw_length))
    return report


def _cube_gap(curve, axis, normal):
    def gap(t):
        point = curve.value(t)[0]
        return max(abs(point @ axis), abs(point @ normal)) - 1.0

    return gap


def oscillation_trim(curve, d=dimension, grid=None):
    """
    Trim a nearly straight curve meeting the unit ball to the parameters
    spent inside the side 2 cube around the origin aligned with c'(w), w the
    first grid parameter in the unit ball.

    ... code:: python

        a, b, cert = symbext.oscillation_trim(Curve.segment((-2, 0), (2, 0)))
        # a = 0.25, b = 0.75, cert.length_product = 2.0

    :param curve: Curve with sup |c(t) - c(s)| of derivatives <= |c|_1 / 3
    :param d: ambient dimension used for the constants
    :param grid: sample count
    :return: (a, b, OscillationCertificate)
    """
    grid = grid or defaults.curve_grid
    ts = np.linspace(0.0, 1.0, grid)
    values = curve.value(ts)
    derivatives = curve.derivative(ts, 1)
    speeds = np.linalg.norm(derivatives, axis=-1)
    speed_norm = float(np.max(speeds))

    picks = np.unique(np.linspace(0, grid - 1, min(grid, oscillation_samples)).astype(int))
    oscillation = float(np.max(pdist(derivatives[picks]))) if len(picks) > 1 else 0.0
    if speed_norm == 0 or oscillation > speed_norm / 3.0 * (1 + 1e-9):
        raise PreconditionError(
            "Derivative oscillation {0:.6g} exceeds |c|_1 / 3 = {1:.6g}".format(oscillation, speed_norm / 3.0),
            hypothesis="oscillation",
        )
    inside = np.linalg.norm(values, axis=-1) < 1.0
    if not np.any(inside):
        raise PreconditionError("Curve does not meet the unit ball", hypothesis="meets_unit_ball")

    start = int(np.argmax(inside))
    w = float(ts[start])
    axis = derivatives[start] / speeds[start]
    normal = np.array([-axis[1], axis[0]])
    gap = _cube_gap(curve, axis, normal)
    outside = np.maximum(np.abs(values @ axis), np.abs(values @ normal)) > 1.0

    right = np.flatnonzero(outside[start:])
    if len(right):
        j = start + int(right[0])
        b = brentq(gap, ts[j - 1], ts[j], xtol=defaults.bisection_tolerance)
    else:
        b = 1.0
    left = np.flatnonzero(outside[: start + 1][::-1])
    if len(left):
        j = start - int(left[0])
        a = brentq(gap, ts[j], ts[j + 1], xtol=defaults.bisection_tolerance)
    else:
        a = 0.0

    check = np.linspace(0.0, 1.0, defaults.curve_grid)
    check_values = curve.value(check)
    in_ball = np.linalg.norm(check_values, axis=-1) < 1.0
    slack = 1e-9
    ball_contained = bool(np.all((check[in_ball] >= a - slack) & (check[in_ball] <= b + slack)))
    trimmed = curve.value(np.linspace(a, b, defaults.curve_grid))
    cube_contained = bool(np.all(np.linalg.norm(trimmed, axis=-1) <= math.sqrt(d) * (1 + 1e-9)))

    certificate = OscillationCertificate(
        a=float(a),
        b=float(b),
        w=w,
        axis=tuple(float(v) for v in axis),
        speed_norm=speed_norm,
        length_product=float((b - a) * speed_norm),
        constant=2.0 * math.sqrt(3.0 * d),
        ball_contained=ball_contained,
        cube_contained=cube_contained,
        min_speed_ratio=float(np.min(speeds) / speed_norm),
    )
    if not certificate.valid:
        log.warning("Oscillation trim certificate failed: {0}".format(certificate.to_dict()))
    return float(a), float(b), certificate


def _lagrange_basis(nodes):
    basis = []
    for j, node in enumerate(nodes):
        others = np.delete(nodes, j)
        poly = np.polynomial.Polynomial.fromroots(others)
        basis.append(poly / poly(node))
    return basis


def landau_kolmogorov_constant(s, d=dimension):
    """
    Interpolation constant for |g^(k)|_0 <= C (|g|_0 + |g|_s), k <= [s]:
    the largest Lebesgue constant of the k-th derivatives of the Lagrange
    basis at ceil(s - 1) + 1 equispaced nodes, at least 1.
    """
    if not s > 0:
        raise DomainError("Landau-Kolmogorov order must be > 0, got {0}".format(s))
    p = int(math.ceil(s - 1))
    if p <= 0:
        return 1.0
    basis = _lagrange_basis(np.linspace(0.0, 1.0, p + 1))
    xs = np.linspace(0.0, 1.0, 2001)
    best = 1.0
    for k in range(1, p + 1):
        lebesgue = np.sum([np.abs(poly.deriv(k)(xs)) for poly in basis], axis=0)
        best = max(best, float(np.max(lebesgue)))
    return best


def calibrated_constant(s, d=dimension, constants=None):
    """C_cal for (s, d) from the constants file, twice the analytic constant when absent"""
    constants = constants if constants is not None else load_constants()
    key = "{0:g},{1}".format(s, d)
    table = constants.get("C_cal", {})
    if key in table:
        return float(table[key])
    log.debug("No calibrated constant for {0}, using twice the analytic one".format(key))
    return 2.0 * landau_kolmogorov_constant(s, d)


def landau_kolmogorov_check(g, s, C_cal=None, grid=None):
    """
    Ratios |g|_k / (|g|_0 + |g|_s) for k = 0..[s] against the calibrated
    constant.

    :param g: Curve with jets up to order ceil(s)
    :param s: order, > 0
    :param C_cal: constant, defaults to the calibrated one
    :return: LKCheck
    """
    if not s > 0:
        raise DomainError("Landau-Kolmogorov order must be > 0, got {0}".format(s))
    constant = calibrated_constant(s) if C_cal is None else float(C_cal)
    grid = grid or defaults.curve_grid
    norms = {k: holder_norm_estimate(g, k, grid).value for k in range(int(math.floor(s)) + 1)}
    top = holder_norm_estimate(g, s, grid).value
    norms[s] = top
    denominator = norms[0] + top
    ratios = tuple(0.0 if denominator == 0 else norms[k] / denominator for k in range(int(math.floor(s)) + 1))
    return LKCheck(ratios, all(ratio <= constant for ratio in ratios), {str(k): v for k, v in norms.items()}, constant)


def polynomial_corpus(size, degree, seed):
    """Random polynomial curves of degree <= ``degree`` with normal coefficients"""
    rng = np.random.default_rng(seed)
    corpus = []
    for index in range(size):
        order = int(rng.integers(1, degree + 1))
        coefficients = rng.normal(size=(order + 1, dimension))
        corpus.append(Curve.polynomial(coefficients, name="corpus{0}".format(index)))
    return corpus


def calibrate_landau_kolmogorov(s, d=dimension, size=10**4, degree=8, seed=0, safety=2.0, grid=2001):
    """
    Largest observed Landau-Kolmogorov ratio over a random polynomial corpus
    times the safety factor, never below the analytic constant times it.

    :return: Namespace(constant, empirical, analytic, size, degree, seed)
    """
    empirical = 0.0
    for curve in polynomial_corpus(size, degree, seed):
        check = landau_kolmogorov_check(curve, s, C_cal=math.inf, grid=grid)
        empirical = max(empirical, max(check.ratios))
    analytic = landau_kolmogorov_constant(s, d)
    constant = safety * max(empirical, analytic)
    log.info("Calibrated C_cal({0:g}, {1}) = {2:.6g} from {3} curves".format(s, d, constant, size))
    return Namespace(constant=constant, empirical=empirical, analytic=analytic, size=size, degree=degree, seed=seed)
