#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# Part of the Symbext package.
#
# Copyright (c) 2025 - Symbext Developers - MIT License
"""
Lyapunov exponents, Birkhoff averages of log+ |DT| and the growth rates of
exterior powers of the derivative cocycle.
"""
from __future__ import absolute_import
import math
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as linalg

from symbext.namespace import Namespace
from symbext.process_helpers import run_in_pool
from symbext.shared_variables import defaults, dimension, DomainError, EscapeError
from symbext.dynamics import (
    domain_grid,
    evaluate_orbit,
    spectral_norm,
    derivative_cocycle,
)

__all__ = [
    "log_plus",
    "LyapunovReport",
    "GrowthEstimate",
    "PositiveSumEstimate",
    "log_plus_average",
    "lyapunov_spectrum",
    "cocycle_logs",
    "exterior_growth",
    "empirical_positive_sum",
    "subadditive_sequence",
    "sequence_log_plus_average",
    "birkhoff_deviation",
    "determinant_rate",
    "ruelle_margulis_bound",
]

log = logging.getLogger("symbext.lyapunov")


def log_plus(value):
    """max(log t, 0) with log+(0) = 0, scalar or array"""
    arr = np.asarray(value, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(arr > 1.0, np.log(np.where(arr > 0, arr, 1.0)), 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LyapunovReport:
    exponents: tuple
    n_used: int
    method: str
    convergence_trace: list = field(default_factory=list)
    singular: bool = False
    invertible: bool = False

    @property
    def chi1_plus(self):
        return max(self.exponents[0], 0.0)

    @property
    def sum_positive(self):
        return float(sum(max(chi, 0.0) for chi in self.exponents))

    @property
    def sum_negative(self):
        return float(sum(min(chi, 0.0) for chi in self.exponents))

    def to_dict(self):
        return {
            "exponents": list(self.exponents),
            "n_used": self.n_used,
            "method": self.method,
            "singular": self.singular,
            "invertible": self.invertible,
            "chi1_plus": self.chi1_plus,
            "sum_positive": self.sum_positive,
            "sum_negative": self.sum_negative,
            "convergence_trace": [list(pair) for pair in self.convergence_trace],
        }


@dataclass(frozen=True)
class GrowthEstimate:
    value: float
    e: int
    n: int
    grid_size: int
    skipped: int = 0
    per_order: tuple = ()

    def to_dict(self):
        return {
            "value": self.value,
            "e": self.e,
            "n": self.n,
            "grid_size": self.grid_size,
            "skipped": self.skipped,
            "per_order": list(self.per_order),
        }


@dataclass(frozen=True)
class PositiveSumEstimate:
    value: float
    argmin_n: int
    n_max: int
    trace: list = field(default_factory=list)
    truncated: bool = True

    def to_dict(self):
        return {
            "value": self.value,
            "argmin_n": self.argmin_n,
            "n_max": self.n_max,
            "trace": list(self.trace),
            "truncated": self.truncated,
        }


def log_plus_average(smooth_map, x, n):
    """
    lambda+_n(x, T) = (1/n) sum_{j<n} log+ |D_{T^j x} T| with the spectral norm.

    :param smooth_map: SmoothMap
    :param x: base point
    :param n: number of terms, >= 1
    :return: float
    """
    if n < 1:
        raise DomainError("Birkhoff average needs n >= 1, got {0}".format(n))
    orbit = evaluate_orbit(smooth_map, x, n - 1)
    return float(np.mean(log_plus(spectral_norm(smooth_map.jacobian(orbit)))))


def lyapunov_spectrum(smooth_map, x, n, method="exterior_power"):
    """
    Both Lyapunov exponents along the orbit of x.

    ``exterior_power`` accumulates log |D_xT^k| with the running product
    renormalized every step, and log |det D_xT^k| for the sum of exponents.
    ``qr_recursion`` runs the QR recursion on the standard frame.

    :param smooth_map: SmoothMap
    :param x: base point
    :param n: orbit length, >= 10
    :param method: exterior_power or qr_recursion
    :return: LyapunovReport
    """
    if n < 10:
        raise DomainError("Lyapunov spectrum needs n >= 10, got {0}".format(n))
    if method not in ("exterior_power", "qr_recursion"):
        raise DomainError("Unknown method '{0}'".format(method))
    orbit = evaluate_orbit(smooth_map, x, n - 1)
    jacobians = smooth_map.jacobian(orbit)
    trace = []
    singular = False
    tiny = np.finfo(float).tiny

    if method == "exterior_power":
        running = np.eye(dimension)
        log_norm, log_det = 0.0, 0.0
        for k, jac in enumerate(jacobians, start=1):
            running = jac @ running
            norm = float(spectral_norm(running))
            if norm <= tiny:
                singular = True
                log_norm = -math.inf
                trace.append((-math.inf, -math.inf))
                break
            log_norm += math.log(norm)
            running = running / norm
            det = abs(float(np.linalg.det(jac)))
            if det <= tiny:
                singular = True
            log_det = -math.inf if singular else log_det + math.log(det)
            chi1 = log_norm / k
            trace.append((chi1, log_det / k - chi1 if not singular else -math.inf))
        exponents = trace[-1]
    else:
        frame = np.eye(dimension)
        sums = np.zeros(dimension)
        for k, jac in enumerate(jacobians, start=1):
            frame, upper = linalg.qr(jac @ frame)
            diag = np.diag(upper)
            signs = np.where(diag < 0, -1.0, 1.0)
            frame = frame * signs
            diag = np.abs(diag)
            if np.any(diag <= tiny):
                singular = True
            with np.errstate(divide="ignore"):
                sums = sums + np.log(diag)
            partial = np.sort(sums / k)[::-1]
            trace.append(tuple(float(v) for v in partial))
        exponents = trace[-1]

    if singular:
        log.warning("Derivative cocycle of {0} is singular, second exponent set to -inf".format(smooth_map.name))
    exponents = tuple(sorted((float(v) for v in exponents), reverse=True))
    return LyapunovReport(exponents, n, method, trace, singular, smooth_map.invertible)


def determinant_rate(smooth_map, x, n):
    """(1/n) log |det D_xT^n|, the sum of both exponents"""
    if n < 1:
        raise DomainError("Determinant rate needs n >= 1")
    det = abs(float(np.linalg.det(derivative_cocycle(smooth_map, x, n))))
    return -math.inf if det == 0 else math.log(det) / n


def cocycle_logs(smooth_map, points, n):
    """
    Vectorized log |D_xT^k| and log |det D_xT^k| for k = 1..n over a pool.
    Points whose orbit leaves a box domain before step n are masked out.

    :return: Namespace(log_norm (n, N), log_det (n, N), alive (N,), points)
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    count = len(pts)
    running = np.broadcast_to(np.eye(dimension), (count, dimension, dimension)).copy()
    log_norm = np.zeros((n, count))
    log_det = np.zeros((n, count))
    alive = smooth_map.domain.contains(pts)
    current = np.where(alive[:, None], pts, 0.0)
    norm_acc = np.zeros(count)
    det_acc = np.zeros(count)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for k in range(n):
            alive &= smooth_map.domain.contains(current)
            current = np.where(alive[:, None], current, 0.0)
            jac = smooth_map.jacobian(current)
            running = jac @ running
            norms = spectral_norm(running)
            safe = np.where(norms > 0, norms, 1.0)
            norm_acc = norm_acc + np.where(norms > 0, np.log(safe), -np.inf)
            running = running / safe[:, None, None]
            det_acc = det_acc + np.log(np.abs(np.linalg.det(jac)))
            log_norm[k] = norm_acc
            log_det[k] = det_acc
            if k + 1 < n:
                current = smooth_map.value(current)
    return Namespace(log_norm=log_norm, log_det=log_det, alive=alive, points=pts)


def _chunk_logs(points, smooth_map, n):
    return cocycle_logs(smooth_map, points, n)


def _order_logs(logs, e):
    """max over k <= e of log+ |Lambda^k D_xT^m| for every m and point"""
    out = np.maximum(logs.log_norm, 0.0)
    if e >= 2:
        out = np.maximum(out, np.maximum(logs.log_det, 0.0))
    return out


def _check_order(e):
    if e not in (1, 2):
        raise DomainError("Exterior power order must be 1 or 2 on a surface, got {0}".format(e))


def exterior_growth(smooth_map, e, n, grid=None, workers=1):
    """
    R_e estimate: sup over grid points of (1/n) max_{k<=e} log+ |Lambda^k D_xT^n|.
    On a surface |Lambda^2 D| = |det D|. Grid points whose orbit escapes are
    skipped and counted.

    :param smooth_map: SmoothMap
    :param e: 1 or 2
    :param n: iterate, >= 1
    :param grid: point count or explicit (N, 2) points
    :param workers: split the grid over this many threads
    :return: GrowthEstimate
    """
    _check_order(e)
    if n < 1:
        raise DomainError("Growth rate needs n >= 1, got {0}".format(n))
    if grid is None or np.isscalar(grid):
        points = domain_grid(smooth_map, int(grid or defaults.map_grid))
    else:
        points = np.atleast_2d(np.asarray(grid, dtype=float))
    if not len(points):
        raise DomainError("Growth rate needs a nonempty grid")

    chunks = np.array_split(points, max(1, int(workers)))
    if workers > 1:
        results = run_in_pool(
            _chunk_logs, chunks, threaded=True, processes=workers, target_kwargs={"smooth_map": smooth_map, "n": n}
        )
    else:
        results = [cocycle_logs(smooth_map, chunk, n) for chunk in chunks]

    per_order = []
    alive = np.concatenate([r.alive for r in results])
    if not np.any(alive):
        raise EscapeError("Every grid point escaped within {0} steps".format(n), index=None)
    for order in range(1, e + 1):
        values = np.concatenate([_order_logs(r, order)[n - 1] for r in results])
        per_order.append(float(np.max(values[alive])) / n)
    skipped = int(np.sum(~alive))
    if skipped:
        log.info("{0} of {1} grid points escaped and were skipped".format(skipped, len(points)))
    return GrowthEstimate(max(per_order), e, n, len(points), skipped, tuple(per_order))


def subadditive_sequence(sample, e, n_max):
    """
    F(m) = sum_x w(x) max_{k<=e} log+ |Lambda^k D_xT^m| for m = 1..n_max,
    the subadditive sequence behind the positive sum estimate.

    :return: array of shape (n_max,)
    """
    _check_order(e)
    if not len(sample):
        raise DomainError("Empty orbit sample")
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    logs = cocycle_logs(sample.map, sample.points, n_max)
    if not np.all(logs.alive):
        raise EscapeError("Sample orbits must stay in the domain for {0} steps".format(n_max))
    return _order_logs(logs, e) @ np.asarray(sample.weights, dtype=float)


def empirical_positive_sum(sample, e, n_max=None):
    """
    min over n <= n_max of (1/n) sum_x w(x) max_{k<=e} log+ |Lambda^k D_xT^n|,
    the infimum over n truncated at n_max.

    :param sample: OrbitSample
    :param e: 1 or 2
    :param n_max: truncation, defaults to 64
    :return: PositiveSumEstimate
    """
    n_max = n_max or defaults.n_max
    totals = subadditive_sequence(sample, e, n_max)
    rates = totals / np.arange(1, n_max + 1)
    best = int(np.argmin(rates))
    return PositiveSumEstimate(float(rates[best]), best + 1, n_max, [float(v) for v in rates])


def sequence_log_plus_average(maps, n):
    """(1/n) sum_{i=1..n} log+ |D_0 T_i| for a map sequence"""
    if n < 1:
        raise DomainError("Birkhoff average needs n >= 1")
    origin = np.zeros((1, dimension))
    terms = [log_plus(spectral_norm(maps[i].jacobian(origin)))[0] for i in range(1, n + 1)]
    return float(np.mean(terms))


def birkhoff_deviation(maps, y, n):
    """
    |lambda+_n - (1/n) sum_{i=1..n} log+ |D_{T^{i-1} y} T_i|| for points y,
    bounded by log 2 on B(n, sqrt(d)) when the sequence satisfies the
    derivative ratio condition.
    """
    pts = np.atleast_2d(np.asarray(y, dtype=float))
    reference = sequence_log_plus_average(maps, n)
    orbit = maps.orbit(pts, n - 1)
    terms = [log_plus(spectral_norm(maps[i].jacobian(orbit[i - 1]))) for i in range(1, n + 1)]
    return np.abs(reference - np.mean(terms, axis=0))


def ruelle_margulis_bound(report):
    """
    Sum of the positive exponents. For a diffeomorphism the inverse gives
    the second bound -sum of negative exponents and the smaller one is
    returned.
    """
    if report.invertible and not report.singular:
        return min(report.sum_positive, -report.sum_negative)
    return report.sum_positive
