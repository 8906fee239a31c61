#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# Part of the Symbext package.
#
# Copyright (c) 2025 - Symbext Developers - MIT License
"""
The Bernoulli entropy function, sequences of positive integers admitting a
value, and defect of multiplicativity sequences of iterated curves.
"""
from __future__ import absolute_import
import math
import logging
from collections import namedtuple
from dataclasses import dataclass

import numpy as np
from scipy.special import comb, entr

from symbext.namespace import Namespace
from symbext.wrappers import catch_it
from symbext.shared_variables import (
    defaults,
    dimension,
    DomainError,
    EscapeError,
    BudgetExceededError,
    DegenerateTangencyError,
    PreconditionError,
)
from symbext.dynamics import spectral_norm
from symbext.lyapunov import log_plus, sequence_log_plus_average
from symbext.curves import hyperbolic_time_mask

__all__ = [
    "bernoulli_entropy",
    "capped_exp",
    "count_admitting",
    "iter_admitting",
    "enumerate_admitting",
    "BoundCheck",
    "combinatorial_bound_check",
    "clamped_integer_part",
    "DefectSequence",
    "defect_table",
    "defect_sequences",
    "defect_sequence",
    "class_count_threshold",
    "ClassBound",
    "realized_class_bound",
]

log = logging.getLogger("symbext.combinatorics")

enumerate_limits = Namespace(n=8, S=5)

# e^x, inf once it overflows
capped_exp = catch_it(exceptions=(OverflowError,), default=math.inf)(math.exp)

BoundCheck = namedtuple("BoundCheck", ["log_count", "bound", "holds"])


def bernoulli_entropy(t):
    """
    H(t) = -(1/t) log(1/t) - (1 - 1/t) log(1 - 1/t) with 0 log 0 = 0.

    :param t: real >= 1
    :return: float
    """
    if not t >= 1:
        raise DomainError("Bernoulli entropy needs t >= 1, got {0}".format(t))
    p = 1.0 / t
    return float(entr(p) + entr(1.0 - p))


def count_admitting(n, S):
    """Number of positive integer n-tuples with mean <= S, exactly C(nS, n)"""
    if n < 1 or S < 1:
        raise DomainError("count_admitting needs n >= 1 and S >= 1, got n={0}, S={1}".format(n, S))
    return int(comb(n * S, n, exact=True))


def iter_admitting(n, S):
    """Positive integer n-tuples with sum <= nS in lexicographic order"""

    def walk(prefix, remaining, left):
        if left == 0:
            yield tuple(prefix)
            return
        # leave at least 1 for each later entry
        for k in range(1, remaining - (left - 1) + 1):
            prefix.append(k)
            yield from walk(prefix, remaining - k, left - 1)
            prefix.pop()

    yield from walk([], n * S, n)


def enumerate_admitting(n, S):
    """
    All sequences admitting the value S, guarded to n <= 8 and S <= 5.

    ... code:: python

        symbext.enumerate_admitting(2, 2)
        # [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (3, 1)]
    """
    if n < 1 or S < 1:
        raise DomainError("enumerate_admitting needs n >= 1 and S >= 1")
    if n > enumerate_limits.n or S > enumerate_limits.S:
        raise BudgetExceededError(
            "Enumeration limited to n <= {0} and S <= {1}".format(enumerate_limits.n, enumerate_limits.S),
            diagnostics={"n": n, "S": S, "count": count_admitting(n, S)},
        )
    return list(iter_admitting(n, S))


def combinatorial_bound_check(n, S):
    """log C(nS, n) against the bound n S H(S) + 1"""
    log_count = math.log(count_admitting(n, S))
    bound = n * S * bernoulli_entropy(S) + 1.0
    return BoundCheck(log_count, bound, log_count <= bound)


def clamped_integer_part(x):
    """
    Largest nonnegative integer <= max(x, 0). Values within 1e-12 of an
    integer snap to it. Works on scalars and arrays.
    """
    arr = np.asarray(x, dtype=float)
    nearest = np.round(arr)
    snapped = np.abs(arr - nearest) <= defaults.snap_tolerance * np.maximum(1.0, np.abs(arr))
    with np.errstate(invalid="ignore"):
        out = np.where(snapped, nearest, np.floor(arr))
    out = np.where(np.isfinite(arr), np.maximum(out, 0.0), np.where(arr > 0, np.inf, 0.0))
    if out.ndim == 0:
        return int(out) if math.isfinite(out) else math.inf
    return out


@dataclass(frozen=True)
class DefectSequence:
    entries: tuple

    def __post_init__(self):
        if any(int(k) < 1 for k in self.entries):
            raise DomainError("Defect entries must be >= 1, got {0}".format(self.entries))

    @property
    def n(self):
        return len(self.entries)

    @property
    def total(self):
        return int(sum(self.entries))

    def admits(self, S):
        return self.total <= self.n * S

    def admitted_value(self):
        """Smallest integer S >= 1 admitted by the sequence"""
        if not self.n:
            return 1
        return max(1, int(math.ceil(self.total / self.n)))

    def __len__(self):
        return self.n

    def __iter__(self):
        return iter(self.entries)

    def to_list(self):
        return [int(k) for k in self.entries]


def defect_table(maps, curve, ts, n):
    """
    Defect entries k_1..k_n for many parameters without raising.

    k_i = [log+ (|D_t(T^i o s)| max(1, |D T_{i+1}|) / |D_t(T^{i+1} o s)|)] + 1

    :return: Namespace(entries (N, n) ints, in_ball (N,) whether T^k s(t)
        stays in the closed sqrt(d) ball for k <= n + 1, degenerate (N,) first
        index i with vanishing derivative or 0, speeds (n + 2, N))
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    jets = maps.push_jets(curve, ts, n + 1, order=1)
    speeds = np.array([np.linalg.norm(j[1], axis=-1) for j in jets])
    radius = math.sqrt(dimension) * (1 + 1e-12)
    with np.errstate(invalid="ignore"):
        in_ball = np.all(np.array([np.linalg.norm(jets[k][0], axis=-1) <= radius for k in range(n + 2)]), axis=0)
    entries = np.zeros((len(ts), n), dtype=int)
    degenerate = np.zeros(len(ts), dtype=int)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for i in range(1, n + 1):
            stretch = np.maximum(1.0, spectral_norm(maps[i + 1].jacobian(jets[i][0])))
            ratio = speeds[i] * stretch / speeds[i + 1]
            zero = speeds[i + 1] == 0
            degenerate = np.where((degenerate == 0) & zero, i, degenerate)
            ratio = np.where(zero, 1.0, ratio)
            entries[:, i - 1] = clamped_integer_part(log_plus(ratio)) + 1
    return Namespace(entries=entries, in_ball=in_ball, degenerate=degenerate, speeds=speeds)


def defect_sequences(maps, curve, ts, n):
    """Defect sequences for many parameters, raising on escape or tangency"""
    table = defect_table(maps, curve, ts, n)
    if not np.all(table.in_ball):
        first = int(np.argmin(table.in_ball))
        raise EscapeError("Orbit of the curve leaves the sqrt(d) ball at parameter {0}".format(first), index=first)
    if np.any(table.degenerate):
        index = int(table.degenerate[table.degenerate > 0].min())
        raise DegenerateTangencyError("Derivative of T^{0} o curve vanishes".format(index + 1), index=index)
    return table.entries


def defect_sequence(maps, curve, t, n):
    """
    The defect sequence K_n = (k_1, ..., k_n) of the curve at parameter t.

    :param maps: MapSequence with at least n + 1 maps after T_0
    :param curve: Curve
    :param t: parameter in [0, 1]
    :param n: length
    :return: DefectSequence
    """
    if not 0 <= t <= 1:
        raise DomainError("Parameter must lie in [0, 1], got {0}".format(t))
    entries = defect_sequences(maps, curve, [t], n)[0]
    return DefectSequence(tuple(int(k) for k in entries))


def class_count_threshold(C):
    """
    Smallest integer exceeding log C / (1 - log 2 - 1/3), clamped at 0. The
    denominator is negative so every n >= 1 qualifies for C > 1.
    """
    if not C > 1:
        raise DomainError("Threshold needs C > 1, got {0}".format(C))
    value = math.log(C) / (1.0 - math.log(2.0) - 1.0 / 3.0)
    return max(0, int(math.floor(value)) + 1)


@dataclass(frozen=True)
class ClassBound:
    observed: int
    bound: float
    log_bound: float
    lyapunov_rate: float
    threshold: int
    flags: tuple = ()
    classes: tuple = ()

    @property
    def holds(self):
        return self.observed <= self.bound

    def to_dict(self):
        return {
            "observed": self.observed,
            "bound": self.bound,
            "log_bound": self.log_bound,
            "lyapunov_rate": self.lyapunov_rate,
            "threshold": self.threshold,
            "holds": self.holds,
            "flags": list(self.flags),
            "classes": [list(c) for c in self.classes],
        }


def realized_class_bound(maps, curve, chi, gamma, C, n, ts=None):
    """
    Count the distinct defect sequences K_{n-1} met by sampled hyperbolic
    times and compare with e^{3n-2} e^{(n-1)(l-chi) H([l-chi]+3)}, l the
    log+ average of the sequence at 0.

    :param maps: MapSequence with at least n maps after T_0
    :param curve: Curve
    :param chi: growth rate, > 0
    :param gamma: tolerance, 0 < gamma < 1/3
    :param C: constant, > 1
    :param n: length
    :param ts: parameters to sample, defaults to the curve grid
    :return: ClassBound
    """
    if not chi > 0:
        raise PreconditionError("Need chi > 0, got {0}".format(chi), hypothesis="chi_positive")
    if not 0 < gamma < 1.0 / 3.0:
        raise PreconditionError("Need 0 < gamma < 1/3, got {0}".format(gamma), hypothesis="gamma_range")
    if not C > 1:
        raise PreconditionError("Need C > 1, got {0}".format(C), hypothesis="constant_range")
    if n < 1:
        raise DomainError("Need n >= 1")
    threshold = class_count_threshold(C)
    flags = []
    if n <= threshold:
        flags.append("below_threshold")
    ts = np.linspace(0.0, 1.0, defaults.curve_grid) if ts is None else np.atleast_1d(np.asarray(ts, dtype=float))

    mask = hyperbolic_time_mask(maps, curve, ts, chi, gamma, C, n)
    classes = set()
    if np.any(mask) and n > 1:
        table = defect_table(maps, curve, ts[mask], n - 1)
        classes = {tuple(int(k) for k in row) for row in table.entries}
    elif np.any(mask):
        classes = {()}
    if not np.any(mask):
        flags.append("empty_hyperbolic_sample")
        log.warning("No sampled parameter is a hyperbolic time at n={0}".format(n))

    rate = sequence_log_plus_average(maps, n)
    gap = rate - chi
    log_bound = 3 * n - 2 + (n - 1) * gap * bernoulli_entropy(clamped_integer_part(gap) + 3)
    bound = capped_exp(log_bound)
    return ClassBound(len(classes), bound, log_bound, rate, threshold, tuple(flags), tuple(sorted(classes)))
