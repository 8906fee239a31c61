#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# Part of the Symbext package.
#
# Copyright (c) 2025 - Symbext Developers - MIT License
"""
Separated and spanning sets in the Bowen metric

    d_n(x, y) = max_{0 <= k < n} d(T^k x, T^k y)

and the entropy estimates built on their growth: topological entropy, local
entropy of a point set inside a Bowen ball and tail entropy.

All estimates are finite range fits and keep the raw counts, so a reported
value can always be recomputed with :func:`fit_growth_rate`.
"""
from __future__ import absolute_import
import math
import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import linregress

from symbext.namespace import Namespace
from symbext.process_helpers import run_in_pool
from symbext.shared_variables import defaults, dimension, DomainError, BudgetExceededError
from symbext.dynamics import orbit_array, localize
from symbext.curves import local_volume_growth

__all__ = [
    "EntropyEstimate",
    "fit_growth_rate",
    "make_pool",
    "pool_orbits",
    "bowen_distance",
    "in_bowen_ball",
    "maximal_separated_set",
    "minimal_spanning_set",
    "maximum_separated_size",
    "topological_entropy_estimate",
    "local_entropy",
    "local_entropy_rate",
    "local_entropy_profile",
    "tail_entropy_estimate",
    "counts_table",
    "volume_entropy_relation",
]

log = logging.getLogger("symbext.entropy")

pool_kinds = ("grid", "random", "local")


@dataclass(frozen=True)
class EntropyEstimate:
    value: float
    n_range: tuple
    counts: tuple
    delta: float
    method: str
    eps: float = None
    degenerate: bool = False
    slope: float = 0.0
    flags: tuple = ()
    base_point: tuple = None
    sparse_points: tuple = ()

    def refit(self):
        """The estimate recomputed from its own counts"""
        fit = fit_growth_rate(self.n_range, self.counts)
        return replace(self, value=fit.value, slope=fit.slope, degenerate=fit.degenerate)

    def to_dict(self):
        return {
            "value": self.value,
            "n_range": list(self.n_range),
            "counts": list(self.counts),
            "delta": self.delta,
            "eps": self.eps,
            "method": self.method,
            "degenerate": self.degenerate,
            "slope": self.slope,
            "flags": list(self.flags),
            "base_point": None if self.base_point is None else list(self.base_point),
            "sparse_points": list(self.sparse_points),
        }


def fit_growth_rate(n_range, counts):
    """
    Least squares slope of log(count) against n, clamped at 0.

    :return: Namespace(value, slope, intercept, degenerate)
    """
    n_range = np.asarray(n_range, dtype=float)
    counts = np.asarray(counts, dtype=float)
    if len(n_range) != len(counts) or len(n_range) < 2:
        raise DomainError("Need at least two (n, count) pairs to fit a growth rate")
    if np.any(counts < 1):
        raise DomainError("Counts must be >= 1 to take logarithms")
    if np.all(counts == counts[0]):
        return Namespace(value=0.0, slope=0.0, intercept=float(math.log(counts[0])), degenerate=True)
    fit = linregress(n_range, np.log(counts))
    return Namespace(value=max(0.0, float(fit.slope)), slope=float(fit.slope), intercept=float(fit.intercept),
                     degenerate=False)


def _region_square(smooth_map, size, rng):
    center, radius = smooth_map.sample_region()
    return np.asarray(center, dtype=float) + rng.uniform(-radius, radius, size=(size, dimension))


def make_pool(smooth_map, spec, seed=0, n=0):
    """
    Point pool standing in for the phase space.

    ... code:: python

        symbext.make_pool(cat, {"kind": "grid", "size": 100})            # 100 x 100 torus grid
        symbext.make_pool(cat, {"kind": "random", "size": 5000}, seed=3)
        symbext.make_pool(cat, {"kind": "local", "size": 2000, "center": [0.3, 0.3], "radius": 0.05})

    :param smooth_map: SmoothMap
    :param spec: dict with ``kind`` one of grid, random, local and ``size``
    :param seed: seed of the random kinds
    :param n: points whose orbit of length n leaves a box domain are dropped
    :return: array of shape (N, 2)
    """
    spec = Namespace(spec) if not isinstance(spec, Namespace) else spec
    kind = spec.get("kind", "grid")
    if kind not in pool_kinds:
        raise DomainError("Pool kind must be one of {0}, got '{1}'".format(", ".join(pool_kinds), kind))
    size = int(spec.get("size", 100))
    if size < 1:
        raise DomainError("Pool size must be >= 1")
    rng = np.random.default_rng(seed)
    if kind == "grid":
        if smooth_map.domain.is_torus and smooth_map.region is None:
            axis = np.arange(size) / size
            xx, yy = np.meshgrid(axis, axis, indexing="ij")
            pool = np.stack([xx.ravel(), yy.ravel()], axis=1)
        else:
            center, radius = smooth_map.sample_region()
            axis = np.linspace(-radius, radius, size)
            xx, yy = np.meshgrid(axis, axis, indexing="ij")
            pool = np.stack([xx.ravel(), yy.ravel()], axis=1) + np.asarray(center, dtype=float)
    elif kind == "random":
        if smooth_map.domain.is_torus and smooth_map.region is None:
            pool = rng.uniform(0.0, 1.0, size=(size, dimension))
        else:
            pool = _region_square(smooth_map, size, rng)
    else:
        if "center" not in spec or "radius" not in spec:
            raise DomainError("Local pools need a center and a radius")
        radius = float(spec["radius"])
        angles = rng.uniform(0.0, 2.0 * math.pi, size)
        radii = radius * np.sqrt(rng.uniform(0.0, 1.0, size))
        offsets = np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=1)
        pool = smooth_map.domain.reduce(np.asarray(spec["center"], dtype=float) + offsets)

    if not smooth_map.domain.is_torus:
        _, alive, _ = orbit_array(smooth_map, pool, max(n - 1, 0))
        dropped = int(np.sum(~alive))
        if dropped:
            log.info("Dropped {0} of {1} pool points whose orbit leaves the domain".format(dropped, len(pool)))
        pool = pool[alive]
    return pool


def pool_orbits(smooth_map, points, n):
    """
    Orbit segments of length n of the pool points that stay in the domain.

    :return: (orbits of shape (n, N', 2), indices of the kept points)
    """
    if n < 1:
        raise DomainError("Bowen metric needs n >= 1, got {0}".format(n))
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if not len(points):
        return np.empty((n, 0, dimension)), np.empty(0, dtype=int)
    orbits, alive, _ = orbit_array(smooth_map, points, n - 1)
    kept = np.flatnonzero(alive)
    if len(kept) < len(points):
        log.debug("{0} pool orbits escape before step {1}".format(len(points) - len(kept), n))
    return orbits[:, kept], kept


def bowen_distance(smooth_map, orbit_a, orbit_b):
    """
    d_n between precomputed orbits of shape (n, 2) or (n, N, 2), the maximum
    over the time axis of the domain distance.
    """
    return np.max(smooth_map.domain.distance(orbit_a, orbit_b), axis=0)


def in_bowen_ball(smooth_map, x, points, n, eps):
    """
    Membership of ``points`` in B(x, n, eps): d(T^k y, T^k x) < eps for
    k = 0..n-1. Escaping orbits are outside.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    center, _ = pool_orbits(smooth_map, np.asarray(x, dtype=float).reshape(1, dimension), n)
    if center.shape[1] == 0:
        return np.zeros(len(points), dtype=bool)
    orbits, alive, _ = orbit_array(smooth_map, points, n - 1)
    inside = bowen_distance(smooth_map, center, orbits) < eps
    return inside & alive


def _close_pairs(smooth_map, orbits, delta):
    """Boolean matrix of pairs with d_n < delta"""
    count = orbits.shape[1]
    close = np.zeros((count, count), dtype=bool)
    for i in range(count):
        close[i] = bowen_distance(smooth_map, orbits[:, i : i + 1], orbits) < delta
    return close


class _SpatialHash(object):
    """Accepted points bucketed by time zero position in cells of side >= delta"""

    def __init__(self, smooth_map, delta):
        self.torus = smooth_map.domain.is_torus
        self.cells = {}
        if self.torus:
            self.per_axis = max(1, int(math.floor(1.0 / delta)))
            self.side = 1.0 / self.per_axis
        else:
            self.per_axis = None
            self.side = delta

    def key(self, point):
        cell = tuple(int(math.floor(c / self.side)) for c in point)
        if self.torus:
            cell = tuple(c % self.per_axis for c in cell)
        return cell

    def neighbours(self, point):
        if self.torus and self.per_axis < 3:
            for members in self.cells.values():
                yield from members
            return
        base = self.key(point)
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                cell = (base[0] + dx, base[1] + dy)
                if self.torus:
                    cell = (cell[0] % self.per_axis, cell[1] % self.per_axis)
                yield from self.cells.get(cell, ())

    def add(self, point, index):
        self.cells.setdefault(self.key(point), []).append(index)


def maximal_separated_set(smooth_map, pool, n, delta, return_indices=False):
    """
    Greedy (n, delta) separated subset of the pool in pool order: a point is
    accepted when its d_n distance to every accepted point is >= delta.
    Every rejected point is within delta of an accepted one.

    :param smooth_map: SmoothMap
    :param pool: array of shape (N, 2)
    :param n: orbit length, >= 1
    :param delta: separation, > 0
    :param return_indices: return pool indices instead of points
    :return: array of points (or indices)
    """
    if not delta > 0:
        raise DomainError("Separation delta must be positive, got {0}".format(delta))
    pool = np.atleast_2d(np.asarray(pool, dtype=float)).reshape(-1, dimension)
    orbits, kept = pool_orbits(smooth_map, pool, n)
    table = _SpatialHash(smooth_map, delta)
    accepted = []
    for j in range(orbits.shape[1]):
        position = orbits[0, j]
        near = list(table.neighbours(position))
        if near and np.any(bowen_distance(smooth_map, orbits[:, j : j + 1], orbits[:, near]) < delta):
            continue
        table.add(position, j)
        accepted.append(j)
    indices = kept[np.asarray(accepted, dtype=int)]
    return indices if return_indices else pool[indices]


def minimal_spanning_set(smooth_map, points, n, delta, return_indices=False):
    """
    Greedy (n, delta) spanning subset: the first uncovered point becomes a
    centre and covers every point with d_n < delta.
    """
    if not delta > 0:
        raise DomainError("Spanning delta must be positive, got {0}".format(delta))
    points = np.atleast_2d(np.asarray(points, dtype=float)).reshape(-1, dimension)
    orbits, kept = pool_orbits(smooth_map, points, n)
    covered = np.zeros(orbits.shape[1], dtype=bool)
    centers = []
    for j in range(orbits.shape[1]):
        if covered[j]:
            continue
        centers.append(j)
        covered |= bowen_distance(smooth_map, orbits[:, j : j + 1], orbits) < delta
    indices = kept[np.asarray(centers, dtype=int)]
    return indices if return_indices else points[indices]


def maximum_separated_size(smooth_map, points, n, delta):
    """
    Exact largest (n, delta) separated subset size by branch and bound over
    the d_n closeness graph. Limited to small pools.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float)).reshape(-1, dimension)
    if len(points) > defaults.exact_pool_limit:
        raise BudgetExceededError(
            "Exact separated sets are limited to {0} points".format(defaults.exact_pool_limit),
            diagnostics={"points": len(points)},
        )
    orbits, _ = pool_orbits(smooth_map, points, n)
    count = orbits.shape[1]
    if not count:
        return 0
    close = _close_pairs(smooth_map, orbits, delta)
    conflicts = [sum(1 << j for j in range(count) if close[i, j] and j != i) for i in range(count)]
    best = 0

    def search(candidates, size):
        nonlocal best
        if not candidates:
            best = max(best, size)
            return
        if size + bin(candidates).count("1") <= best:
            return
        i = candidates.bit_length() - 1
        rest = candidates & ~(1 << i)
        search(rest & ~conflicts[i], size + 1)
        search(rest, size)

    search((1 << count) - 1, 0)
    return best


def topological_entropy_estimate(smooth_map, pool, n_range, delta):
    """
    Growth rate of the greedy maximal (n, delta) separated set of the pool.

    ... code:: python

        cat = symbext.builtin_system("cat")
        pool = symbext.make_pool(cat, {"kind": "grid", "size": 300})
        symbext.topological_entropy_estimate(cat, pool, range(1, 5), 0.2).value

    :param smooth_map: SmoothMap
    :param pool: array of points or a pool spec dict
    :param n_range: at least four orbit lengths
    :param delta: separation
    :return: EntropyEstimate
    """
    n_range = tuple(int(k) for k in n_range)
    if len(n_range) < 4:
        raise DomainError("Entropy fits need at least four values of n, got {0}".format(len(n_range)))
    if isinstance(pool, dict):
        pool = make_pool(smooth_map, pool, n=max(n_range))
    counts = tuple(len(maximal_separated_set(smooth_map, pool, n, delta, return_indices=True)) for n in n_range)
    log.debug("Separated counts for {0}: {1}".format(smooth_map.name, counts))
    if min(counts) < 1:
        return EntropyEstimate(0.0, n_range, counts, delta, "separated", degenerate=True, flags=("empty_pool",))
    fit = fit_growth_rate(n_range, counts)
    flags = ("degenerate",) if fit.degenerate else ()
    if fit.degenerate:
        log.warning("Separated counts of {0} do not grow, entropy reported as 0".format(smooth_map.name))
    return EntropyEstimate(fit.value, n_range, counts, delta, "separated", None, fit.degenerate, fit.slope, flags)


def _local_size(smooth_map, x, F, n, delta, eps):
    F = np.atleast_2d(np.asarray(F, dtype=float)).reshape(-1, dimension)
    if not len(F):
        return 0
    members = F[in_bowen_ball(smooth_map, x, F, n, eps)]
    if not len(members):
        return 0
    if len(members) <= 20:
        return maximum_separated_size(smooth_map, members, n, delta)
    return len(maximal_separated_set(smooth_map, members, n, delta, return_indices=True))


def local_entropy(smooth_map, x, F, n, delta, eps):
    """
    H(n, delta | x, F, eps): log of the largest (n, delta) separated subset
    of F inside the Bowen ball B(x, n, eps). Exact when at most 20 points of
    F lie in the ball, greedy otherwise. An empty intersection gives 0.
    """
    if not 0 < delta < eps:
        raise DomainError("Local entropy needs 0 < delta < eps, got delta={0}, eps={1}".format(delta, eps))
    size = _local_size(smooth_map, x, F, n, delta, eps)
    return math.log(size) if size else 0.0


def local_entropy_rate(smooth_map, x, F, n_range, delta, eps):
    """h(delta | F, eps) at x as the fitted growth rate of H over n_range"""
    if not 0 < delta < eps:
        raise DomainError("Local entropy needs 0 < delta < eps, got delta={0}, eps={1}".format(delta, eps))
    n_range = tuple(int(k) for k in n_range)
    counts = tuple(max(1, _local_size(smooth_map, x, F, n, delta, eps)) for n in n_range)
    fit = fit_growth_rate(n_range, counts)
    return EntropyEstimate(fit.value, n_range, counts, delta, "local", eps, fit.degenerate, fit.slope)


def local_entropy_profile(smooth_map, x, F, n_range, delta_ladder, eps):
    """
    Local entropy rates along a decreasing delta ladder. ``trend`` is the
    value at the smallest delta, the finite stand-in for the delta -> 0 limit.
    """
    ladder = [float(d) for d in delta_ladder]
    if ladder != sorted(ladder, reverse=True):
        raise DomainError("Delta ladder must be sorted decreasing")
    estimates = [local_entropy_rate(smooth_map, x, F, n_range, delta, eps) for delta in ladder]
    return Namespace(estimates=estimates, trend=estimates[-1].value if estimates else 0.0, eps=eps)


def _tail_at_point(x, smooth_map, eps, n_range, deltas, pool, pool_spec, seed):
    if pool is None:
        spec = dict(pool_spec, kind="local", center=list(np.asarray(x, dtype=float)), radius=eps)
        points = make_pool(smooth_map, spec, seed, n=max(n_range))
    else:
        points = pool
    best, sparse = None, False
    for delta in deltas:
        counts = []
        for n in n_range:
            members = points[in_bowen_ball(smooth_map, x, points, n, eps)]
            sparse |= len(members) < defaults.sparse_ball
            counts.append(max(1, len(minimal_spanning_set(smooth_map, members, n, delta, return_indices=True))))
        fit = fit_growth_rate(n_range, counts)
        estimate = EntropyEstimate(
            fit.value, n_range, tuple(counts), delta, "spanning", eps, fit.degenerate, fit.slope,
            base_point=tuple(float(c) for c in x),
        )
        if best is None or estimate.value > best.value:
            best = estimate
    if sparse:
        best = replace(best, flags=best.flags + ("sparse_ball",))
    return best, sparse


def tail_entropy_estimate(smooth_map, eps_ladder, n_range, delta_ladder, pool_spec, seed=0, base_points=4,
                          workers=1):
    """
    For each eps, the sup over sampled base points x and over delta < eps of
    the growth rate of the greedy (n, delta) spanning count of the pool
    inside B(x, n, eps). Local pool specs are resampled around each x.

    :param smooth_map: SmoothMap
    :param eps_ladder: decreasing scales
    :param n_range: orbit lengths
    :param delta_ladder: decreasing resolutions
    :param pool_spec: pool spec dict, see :func:`make_pool`
    :param seed: base point and pool seed
    :param base_points: number of base points
    :param workers: thread count for the base point sweep
    :return: list of EntropyEstimate, one per eps, at the maximizing base
        point. It is flagged ``sparse_ball`` when that point's Bowen ball held
        fewer than 10 pool points, ``sparse_points`` lists every base point
        index with a sparse ball at that eps
    """
    eps_ladder = [float(e) for e in eps_ladder]
    delta_ladder = [float(d) for d in delta_ladder]
    for name, ladder in (("eps", eps_ladder), ("delta", delta_ladder)):
        if ladder != sorted(ladder, reverse=True):
            raise DomainError("The {0} ladder must be sorted decreasing".format(name))
    n_range = tuple(int(k) for k in n_range)
    pool_spec = dict(pool_spec)
    local = pool_spec.get("kind") == "local"
    rng = np.random.default_rng(seed)
    if smooth_map.domain.is_torus and smooth_map.region is None:
        bases = rng.uniform(0.0, 1.0, size=(base_points, dimension))
    else:
        bases = make_pool(smooth_map, {"kind": "random", "size": base_points * 4}, seed, n=max(n_range))[:base_points]
    pool = None if local else make_pool(smooth_map, pool_spec, seed, n=max(n_range))

    results = []
    for eps in eps_ladder:
        deltas = [d for d in delta_ladder if d < eps]
        if not deltas:
            raise DomainError("No delta of the ladder is below eps={0}".format(eps))
        kwargs = dict(smooth_map=smooth_map, eps=eps, n_range=n_range, deltas=deltas, pool=pool,
                      pool_spec=pool_spec, seed=seed)
        if workers > 1:
            per_point = run_in_pool(_tail_at_point, list(bases), processes=workers, target_kwargs=kwargs)
        else:
            per_point = [_tail_at_point(x, **kwargs) for x in bases]
        best = max((estimate for estimate, _ in per_point), key=lambda e: e.value)
        sparse_points = tuple(i for i, (_, flag) in enumerate(per_point) if flag)
        if sparse_points:
            log.warning("Sparse Bowen balls at eps={0} for base points {1}".format(eps, list(sparse_points)))
        results.append(replace(best, sparse_points=sparse_points))
    return results


def counts_table(estimate):
    """Header and (n, count) rows for CSV output"""
    return [["n", "count"]] + [[n, c] for n, c in zip(estimate.n_range, estimate.counts)]


def volume_entropy_relation(smooth_map, x, F, curve, n_range, delta, eps, chi, gamma, C, grid=None):
    """
    Monitor H(n, delta | x, F, eps) - gamma n - log V_x^{n, eps} along n,
    V the local volume growth of the curve given in the eps-localized
    coordinates at x. D_fit is the largest difference seen.

    :return: Namespace(n_range, local_entropy, volume, differences, D_fit)
    """
    n_range = tuple(int(k) for k in n_range)
    maps = localize(smooth_map, x, max(n_range), eps)
    entropies, volumes, differences = [], [], []
    for n in n_range:
        H = local_entropy(smooth_map, x, F, n, delta, eps)
        V = local_volume_growth(maps, curve, chi, gamma, C, n, radius=1.0, grid=grid).raw_length
        entropies.append(H)
        volumes.append(V)
        differences.append(H - gamma * n - math.log(V) if V > 0 else math.inf)
    return Namespace(
        n_range=list(n_range),
        local_entropy=entropies,
        volume=volumes,
        differences=differences,
        D_fit=max(differences) if differences else 0.0,
    )
