#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# Part of the Symbext package.
#
# Copyright (c) 2025 - Symbext Developers - MIT License
"""
Smooth surface maps, curves, orbits and the localized map sequences the
reparametrization machinery runs on.

Every evaluator is vectorized: points are arrays of shape (N, 2), curve
parameters arrays of shape (N,). Derivative tensors of order k have shape
(N, 2, 2, ..., 2) with k + 1 trailing axes, entry [n, i, j1, ..., jk] being
the partial derivative of component i along j1, ..., jk.
"""
from __future__ import absolute_import
import math
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from symbext.namespace import Namespace
from symbext.shared_variables import (
    defaults,
    dimension,
    DomainError,
    EscapeError,
    UnsupportedSmoothnessError,
    PreconditionError,
)

__all__ = [
    "Domain",
    "SmoothMap",
    "Curve",
    "LinearMap",
    "LocalizedMap",
    "MapSequence",
    "OrbitSample",
    "NormEstimate",
    "spectral_norm",
    "tensor_norm",
    "smoothness_ladder",
    "derivative_ladder",
    "ball_samples",
    "domain_grid",
    "evaluate_orbit",
    "orbit_array",
    "iterate_lift",
    "derivative_cocycle",
    "holder_norm_estimate",
    "builtin_system",
    "builtin_names",
    "henon_fixed_point",
    "system_from_spec",
    "localize",
    "osd_condition",
]

log = logging.getLogger("symbext.dynamics")

_two_pi = 2.0 * math.pi


def _points(x):
    """Return (array of shape (N, 2), whether a single point was given)"""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[-1] != dimension:
        raise DomainError("Points must have {0} coordinates, got shape {1}".format(dimension, arr.shape))
    return arr, single


def _params(t):
    return np.atleast_1d(np.asarray(t, dtype=float))


def _zero_tensor(count, order):
    return np.zeros((count,) + (dimension,) * (order + 1))


def spectral_norm(matrices):
    """
    Largest singular value of 2x2 matrices in closed form, vectorized over
    any leading axes.

    :param matrices: array of shape (..., 2, 2)
    :return: array of shape (...)
    """
    m = np.asarray(matrices, dtype=float)
    frob = np.sum(m * m, axis=(-2, -1))
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    disc = np.sqrt(np.maximum(frob * frob - 4.0 * det * det, 0.0))
    return np.sqrt(np.maximum((frob + disc) / 2.0, 0.0))


def _unit_directions(count=None):
    count = count or defaults.direction_samples
    angles = np.linspace(0.0, math.pi, count, endpoint=False)
    return np.stack([np.cos(angles), np.sin(angles)], axis=1)


def tensor_norm(tensors, order):
    """
    Norm of derivative tensors of the given order at every sample. Order 1
    uses the exact spectral norm, higher orders the sup over sampled unit
    directions u of the norm of T[u, ..., u], a lower estimate.

    :param tensors: array of shape (N, 2, ...) with order + 1 trailing axes
    :param order: derivative order of the tensors
    :return: array of shape (N,)
    """
    tensors = np.asarray(tensors, dtype=float)
    if order == 0:
        return np.linalg.norm(tensors, axis=-1)
    if order == 1:
        return spectral_norm(tensors)
    best = np.zeros(tensors.shape[0])
    for u in _unit_directions():
        contracted = tensors
        for _ in range(order):
            contracted = contracted @ u
        best = np.maximum(best, np.linalg.norm(contracted, axis=-1))
    return best


def smoothness_ladder(r):
    """Orders s = 1, min(2, r), 3, ..., [r], r used for curve norm certificates"""
    ladder = {1.0, float(min(2.0, r)), float(r)}
    ladder.update(float(k) for k in range(3, int(math.floor(r)) + 1))
    return sorted(s for s in ladder if s <= r)


def derivative_ladder(r):
    """Orders min(1, r - 1) <= s <= r - 1 used for derivative comparisons"""
    top = r - 1.0
    low = min(1.0, top)
    ladder = {low, top}
    ladder.update(float(k) for k in range(int(math.ceil(low)), int(math.floor(top)) + 1))
    return sorted(s for s in ladder if low <= s <= top)


def ball_samples(radius=math.sqrt(dimension), count=1024):
    """Square grid points of the closed Euclidean ball of the given radius"""
    side = max(2, int(math.ceil(math.sqrt(count * 4.0 / math.pi))))
    axis = np.linspace(-radius, radius, side)
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    pts = np.stack([xx.ravel(), yy.ravel()], axis=1)
    return pts[np.linalg.norm(pts, axis=1) <= radius * (1 + 1e-12)]


@dataclass(frozen=True)
class Domain:
    """
    Phase space of a map: the flat torus [0,1)^2 or a box given by a centre
    and a sup-norm radius. Charts are translations, the safe radius R bounds
    the localization scale.
    """

    kind: str
    center: tuple = (0.0, 0.0)
    radius: float = math.inf
    safe_radius: float = defaults.safe_radius

    @classmethod
    def torus2(cls):
        return cls("torus2")

    @classmethod
    def box(cls, center=(0.0, 0.0), radius=1.0):
        if not radius > 0:
            raise DomainError("Box radius must be positive, got {0}".format(radius))
        return cls("box", tuple(float(c) for c in center), float(radius))

    @property
    def is_torus(self):
        return self.kind == "torus2"

    def reduce(self, points):
        points = np.asarray(points, dtype=float)
        if self.is_torus:
            reduced = np.mod(points, 1.0)
            # mod can round up to exactly 1.0
            return np.where(reduced >= 1.0, 0.0, reduced)
        return points

    def contains(self, points):
        points = np.asarray(points, dtype=float)
        finite = np.all(np.isfinite(points), axis=-1)
        if self.is_torus:
            return finite
        offset = np.abs(points - np.asarray(self.center))
        with np.errstate(invalid="ignore"):
            return finite & np.all(offset <= self.radius, axis=-1)

    def displacement(self, a, b):
        """Shortest vector from a to b in chart coordinates"""
        diff = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
        if self.is_torus:
            diff = diff - np.round(diff)
        return diff

    def distance(self, a, b):
        return np.linalg.norm(self.displacement(a, b), axis=-1)

    def region(self):
        """Default sampling region as (center, sup radius)"""
        if self.is_torus:
            return (0.5, 0.5), 0.5
        return self.center, self.radius

    def to_dict(self):
        if self.is_torus:
            return {"kind": self.kind, "safe_radius": self.safe_radius}
        return {"kind": self.kind, "center": list(self.center), "radius": self.radius, "safe_radius": self.safe_radius}


@dataclass(frozen=True, eq=False)
class SmoothMap:
    """
    A C^r map of a surface domain given by its lift to the plane.

    ``lift`` maps (N, 2) arrays to (N, 2) arrays without reducing mod 1,
    ``jacobian`` returns (N, 2, 2) and ``higher(points, k)`` the order k
    derivative tensors for k >= 2. ``invertible`` marks diffeomorphisms
    onto the image.
    """

    name: str
    domain: Domain
    smoothness_r: float
    lift: Callable
    jacobian_fn: Callable
    higher_fn: Optional[Callable] = None
    max_order: Optional[int] = None
    params: dict = field(default_factory=dict)
    holder_data: dict = field(default_factory=dict)
    region: Optional[tuple] = None
    linear: bool = False
    degraded: bool = False
    invertible: bool = False

    def __post_init__(self):
        if not self.smoothness_r > 1:
            raise DomainError("Smoothness r must be > 1, got {0}".format(self.smoothness_r))

    def value(self, x):
        pts, single = _points(x)
        out = self.domain.reduce(self.lift(pts))
        return out[0] if single else out

    def jacobian(self, x):
        pts, single = _points(x)
        out = self.jacobian_fn(pts)
        return out[0] if single else out

    def higher(self, x, order):
        pts, single = _points(x)
        if self.max_order is not None and order > self.max_order:
            raise UnsupportedSmoothnessError(
                "Map '{0}' carries derivatives up to order {1}, asked for {2}".format(self.name, self.max_order, order)
            )
        out = self.higher_fn(pts, order) if self.higher_fn else _zero_tensor(len(pts), order)
        return out[0] if single else out

    def derivative(self, x, order):
        if order == 0:
            return self.value(x)
        if order == 1:
            return self.jacobian(x)
        return self.higher(x, order)

    def jet(self, x, order=None):
        """Value and derivatives up to ``order`` (default ceil(r)) at one point"""
        order = int(math.ceil(self.smoothness_r)) if order is None else order
        return [self.derivative(np.asarray(x, dtype=float).reshape(dimension), k) for k in range(order + 1)]

    def sample_region(self):
        return self.region if self.region is not None else self.domain.region()

    @classmethod
    def from_function(cls, name, value_fn, domain=None, r=2.0, step=None):
        """
        Build a map from a value-only evaluator. Derivatives up to order two
        come from central differences and the map is flagged as degraded.

        :param name: label for reports
        :param value_fn: lift, vectorized over (N, 2) arrays
        :param domain: Domain, defaults to the torus
        :param r: declared smoothness
        :param step: finite difference step, defaults to 1e-5
        :return: SmoothMap
        """
        step = step or defaults.fd_step
        domain = domain or Domain.torus2()
        basis = np.eye(dimension)

        def lift(pts):
            out = np.asarray(value_fn(pts), dtype=float)
            if out.shape != pts.shape:
                out = np.array([np.asarray(value_fn(p), dtype=float) for p in pts])
            return out

        def jacobian(pts):
            cols = [(lift(pts + step * e) - lift(pts - step * e)) / (2 * step) for e in basis]
            return np.stack(cols, axis=-1)

        def higher(pts, order):
            if order != 2:
                raise UnsupportedSmoothnessError("Finite difference maps only carry derivatives up to order 2")
            out = _zero_tensor(len(pts), 2)
            for j, ej in enumerate(basis):
                for k, ek in enumerate(basis):
                    out[:, :, j, k] = (
                        lift(pts + step * (ej + ek))
                        - lift(pts + step * (ej - ek))
                        - lift(pts - step * (ej - ek))
                        + lift(pts - step * (ej + ek))
                    ) / (4 * step * step)
            return out

        log.warning("Map '{0}' uses finite difference derivatives, accuracy is degraded".format(name))
        return cls(name, domain, float(r), lift, jacobian, higher, max_order=2, degraded=True)


@dataclass(frozen=True)
class NormEstimate:
    value: float
    s: float
    grid_size: int
    steps: tuple = ()
    lower_estimate: bool = True

    def __float__(self):
        return float(self.value)

    def to_dict(self):
        return {
            "value": self.value,
            "s": self.s,
            "grid_size": self.grid_size,
            "steps": list(self.steps),
            "lower_estimate": self.lower_estimate,
        }


@dataclass(frozen=True, eq=False)
class Curve:
    """
    A curve [0,1] -> R^2 given by a jet evaluator ``jets(t, order)`` that
    returns [c(t), c'(t), ..., c^(order)(t)] as (N, 2) arrays.
    """

    jets: Callable
    smoothness_r: float = math.inf
    name: str = "curve"
    max_order: Optional[int] = None
    norm_certificates: dict = field(default_factory=dict)

    def jet(self, t, order):
        if self.max_order is not None and order > self.max_order:
            raise UnsupportedSmoothnessError(
                "Curve '{0}' carries derivatives up to order {1}, asked for {2}".format(self.name, self.max_order, order)
            )
        return self.jets(_params(t), order)

    def value(self, t):
        return self.jet(t, 0)[0]

    def derivative(self, t, order=1):
        return self.jet(t, order)[order]

    def speed(self, t):
        return np.linalg.norm(self.derivative(t, 1), axis=-1)

    def reparametrize(self, lo, hi):
        """The curve t -> c(lo + (hi - lo) t)"""
        lo, hi = float(lo), float(hi)
        scale = hi - lo
        base = self

        def jets(t, order):
            raw = base.jet(lo + scale * t, order)
            return [d * scale**k for k, d in enumerate(raw)]

        return Curve(jets, self.smoothness_r, "{0}[{1:.6g},{2:.6g}]".format(self.name, lo, hi), self.max_order)

    def derivative_curve(self):
        """c' as a curve of its own"""
        base = self

        def jets(t, order):
            return base.jet(t, order + 1)[1:]

        max_order = None if self.max_order is None else self.max_order - 1
        return Curve(jets, self.smoothness_r - 1, "{0}'".format(self.name), max_order)

    def is_immersion(self, grid=None):
        t = np.linspace(0.0, 1.0, grid or defaults.curve_grid)
        return bool(np.min(self.speed(t)) > 0)

    def polyline_length(self, points=10**4):
        values = self.value(np.linspace(0.0, 1.0, points))
        return float(np.sum(np.linalg.norm(np.diff(values, axis=0), axis=1)))

    @classmethod
    def segment(cls, start, end, name="segment"):
        start = np.asarray(start, dtype=float)
        direction = np.asarray(end, dtype=float) - start

        def jets(t, order):
            out = [start + t[:, None] * direction]
            if order >= 1:
                out.append(np.broadcast_to(direction, (len(t), dimension)).copy())
            out.extend(np.zeros((len(t), dimension)) for _ in range(2, order + 1))
            return out

        return cls(jets, math.inf, name)

    @classmethod
    def eigen_segment(cls, direction, center=(0.0, 0.0), length=1.0, name="eigen_segment"):
        """Segment of the given length through ``center`` along ``direction``"""
        u = np.asarray(direction, dtype=float)
        norm = np.linalg.norm(u)
        if norm == 0:
            raise DomainError("Segment direction must be nonzero")
        u = u / norm
        center = np.asarray(center, dtype=float)
        return cls.segment(center - 0.5 * length * u, center + 0.5 * length * u, name)

    @classmethod
    def polynomial(cls, coefficients, name="polynomial"):
        """
        Polynomial curve sum_j a_j t^j.

        :param coefficients: array of shape (degree + 1, 2), lowest order first
        """
        coefficients = np.atleast_2d(np.asarray(coefficients, dtype=float))
        if coefficients.shape[1] != dimension:
            raise DomainError("Polynomial coefficients must have shape (degree + 1, 2)")
        polys = [np.polynomial.Polynomial(coefficients[:, i]) for i in range(dimension)]

        def jets(t, order):
            return [np.stack([p.deriv(k)(t) if k else p(t) for p in polys], axis=1) for k in range(order + 1)]

        return cls(jets, math.inf, name)

    @classmethod
    def circle(cls, center=(0.0, 0.0), radius=0.5, name="circle"):
        center = np.asarray(center, dtype=float)

        def jets(t, order):
            out = []
            for k in range(order + 1):
                phase = _two_pi * t + k * math.pi / 2
                scale = radius * _two_pi**k
                d = scale * np.stack([np.cos(phase), np.sin(phase)], axis=1)
                out.append(d + center if k == 0 else d)
            return out

        return cls(jets, math.inf, name)

    @classmethod
    def from_derivatives(cls, functions, r=None, name="curve"):
        """
        Curve from a list of callables [c, c', c'', ...], each mapping an
        (N,) parameter array to an (N, 2) array.
        """
        functions = list(functions)
        top = len(functions) - 1

        def jets(t, order):
            return [np.asarray(functions[k](t), dtype=float).reshape(len(t), dimension) for k in range(order + 1)]

        return cls(jets, float(r) if r is not None else float(top), name, max_order=top)


class LinearMap(object):
    """Constant derivative map v -> M v of the plane"""

    def __init__(self, matrix):
        self.matrix = np.asarray(matrix, dtype=float).reshape(dimension, dimension)

    def lift(self, v):
        return np.asarray(v, dtype=float) @ self.matrix.T

    def jacobian(self, v):
        return np.broadcast_to(self.matrix, (len(v), dimension, dimension)).copy()

    def higher(self, v, order):
        return _zero_tensor(len(v), order)

    def __repr__(self):
        return "<LinearMap {0}>".format(self.matrix.tolist())


class LocalizedMap(object):
    """
    The rescaled chart expression v -> (T(p + eps v) - T(p)) / eps of a map
    around the anchor point p.
    """

    def __init__(self, base, anchor, eps):
        self.base = base
        self.anchor = np.asarray(anchor, dtype=float).reshape(dimension)
        self.eps = float(eps)
        self._image = base.lift(self.anchor[None, :])[0]

    def lift(self, v):
        return (self.base.lift(self.anchor + self.eps * np.asarray(v, dtype=float)) - self._image) / self.eps

    def jacobian(self, v):
        return self.base.jacobian(self.anchor + self.eps * np.asarray(v, dtype=float))

    def higher(self, v, order):
        return self.eps ** (order - 1) * self.base.higher(self.anchor + self.eps * np.asarray(v, dtype=float), order)

    def __repr__(self):
        return "<LocalizedMap {0} at {1} eps={2}>".format(self.base.name, self.anchor.tolist(), self.eps)


def _apply_jets(mapping, jets, order):
    """Push curve jets through one map with the chain rule, order <= 3"""
    if order > 3:
        raise UnsupportedSmoothnessError("Jets are pushed up to order 3, asked for {0}".format(order))
    c0 = jets[0]
    out = [mapping.lift(c0)]
    if order >= 1:
        jac = mapping.jacobian(c0)
        c1 = jets[1]
        out.append(np.einsum("nij,nj->ni", jac, c1))
    if order >= 2:
        hess = mapping.higher(c0, 2)
        c2 = jets[2]
        out.append(np.einsum("nijk,nj,nk->ni", hess, c1, c1) + np.einsum("nij,nj->ni", jac, c2))
    if order >= 3:
        third = mapping.higher(c0, 3)
        c3 = jets[3]
        out.append(
            np.einsum("nijkl,nj,nk,nl->ni", third, c1, c1, c1)
            + 3.0 * np.einsum("nijk,nj,nk->ni", hess, c2, c1)
            + np.einsum("nij,nj->ni", jac, c3)
        )
    return out


@dataclass(frozen=True, eq=False)
class MapSequence:
    """
    Maps (T_0, T_1, ..., T_n) of the sqrt(d) ball with T_0 the identity and
    T_k(0) = 0. T^k denotes T_k o ... o T_0.
    """

    maps: tuple
    name: str = "sequence"
    norm_bounds: dict = field(default_factory=dict)

    @property
    def n(self):
        return len(self.maps) - 1

    def __len__(self):
        return len(self.maps)

    def __getitem__(self, item):
        return self.maps[item]

    @classmethod
    def constant(cls, matrix, n, name=None):
        linear = LinearMap(matrix)
        name = name or "constant{0}".format(np.asarray(matrix, dtype=float).tolist())
        return cls((LinearMap(np.eye(dimension)),) + (linear,) * n, name)

    @classmethod
    def identity(cls, n):
        return cls.constant(np.eye(dimension), n, "identity")

    def _check_length(self, k):
        if k > self.n:
            raise DomainError("Sequence has maps up to T_{0}, asked for step {1}".format(self.n, k))

    def compose(self, v, k):
        self._check_length(k)
        pts, single = _points(v)
        for mapping in self.maps[1 : k + 1]:
            pts = mapping.lift(pts)
        return pts[0] if single else pts

    def orbit(self, v, k):
        """Array of shape (k + 1, N, 2) holding T^j v for j = 0..k"""
        self._check_length(k)
        pts, _ = _points(v)
        out = [pts]
        for mapping in self.maps[1 : k + 1]:
            out.append(mapping.lift(out[-1]))
        return np.stack(out)

    def in_bowen_ball(self, v, n, rho):
        """Membership in B(n, rho): |T^k v| < rho for k = 0..n-1"""
        pts, single = _points(v)
        if n <= 0:
            inside = np.ones(len(pts), dtype=bool)
        else:
            with np.errstate(over="ignore", invalid="ignore"):
                orbit = self.orbit(pts, n - 1)
                inside = np.all(np.linalg.norm(orbit, axis=-1) < rho, axis=0)
        return bool(inside[0]) if single else inside

    def jacobian_product(self, v, k):
        """D_v T^k as (N, 2, 2) arrays"""
        self._check_length(k)
        pts, single = _points(v)
        prod = np.broadcast_to(np.eye(dimension), (len(pts), dimension, dimension)).copy()
        for mapping in self.maps[1 : k + 1]:
            prod = mapping.jacobian(pts) @ prod
            pts = mapping.lift(pts)
        return prod[0] if single else prod

    def push_jets(self, curve, t, k_max, order=1):
        """
        Jets of T^k o curve for k = 0..k_max at the parameters t.

        :return: list indexed by k of [value, first derivative, ...]
        """
        self._check_length(k_max)
        jets = curve.jet(t, order)
        out = [jets]
        with np.errstate(over="ignore", invalid="ignore"):
            for mapping in self.maps[1 : k_max + 1]:
                jets = _apply_jets(mapping, jets, order)
                out.append(jets)
        return out

    def push(self, curve, k):
        """The curve T^k o curve"""
        self._check_length(k)
        sequence = self

        def jets(t, order):
            return sequence.push_jets(curve, t, k, order)[k]

        max_order = 3 if curve.max_order is None else min(3, curve.max_order)
        return Curve(jets, curve.smoothness_r, "T^{0}({1})".format(k, curve.name), max_order)

    def norm_certificates(self, s, grid=None):
        """Sampled ||T_k||_s over the sqrt(d) ball for k = 1..n"""
        points = ball_samples(math.sqrt(dimension), grid or defaults.map_grid)
        return [_map_holder(mapping, s, points) for mapping in self.maps[1:]]


@dataclass(frozen=True, eq=False)
class OrbitSample:
    """Weighted base points standing in for an invariant measure"""

    points: np.ndarray
    weights: np.ndarray
    map: SmoothMap
    length: int

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        if len(weights) != len(self.points):
            raise DomainError("Need one weight per point")
        if len(weights) and (np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12):
            raise DomainError("Weights must be nonnegative and sum to 1")

    def __len__(self):
        return len(self.points)

    @classmethod
    def uniform(cls, smooth_map, points, length=0):
        pts, _ = _points(points)
        return cls(pts, np.full(len(pts), 1.0 / max(len(pts), 1)), smooth_map, int(length))

    @classmethod
    def from_orbit(cls, smooth_map, x, length):
        """Birkhoff proxy: the first ``length`` orbit points with equal weights"""
        orbit = evaluate_orbit(smooth_map, x, max(length - 1, 0))
        return cls.uniform(smooth_map, orbit, length)


def evaluate_orbit(smooth_map, x, n):
    """
    The orbit x, T x, ..., T^n x. Torus orbits are reduced mod 1 after every
    step, box orbits raise EscapeError at the first point outside the box.

    :param smooth_map: SmoothMap
    :param x: starting point
    :param n: number of iterates
    :return: array of shape (n + 1, 2)
    """
    if n < 0:
        raise DomainError("Orbit length must be >= 0, got {0}".format(n))
    point = np.asarray(x, dtype=float).reshape(dimension)
    if not smooth_map.domain.contains(point):
        raise EscapeError("Starting point {0} is outside the domain".format(point.tolist()), index=0)
    orbit = np.empty((n + 1, dimension))
    orbit[0] = point
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n):
            point = smooth_map.value(point)
            if not smooth_map.domain.contains(point):
                raise EscapeError("Orbit of {0} escapes at index {1}".format(orbit[0].tolist(), k + 1), index=k + 1)
            orbit[k + 1] = point
    return orbit


def orbit_array(smooth_map, points, n):
    """
    Orbits of a whole pool at once.

    :return: (orbits of shape (n + 1, N, 2), alive mask of shape (N,),
        first escape index per point or -1)
    """
    pts, _ = _points(points)
    orbits = np.empty((n + 1, len(pts), dimension))
    alive = smooth_map.domain.contains(pts)
    escape = np.where(alive, -1, 0)
    current = pts.copy()
    orbits[0] = current
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, n + 1):
            step = smooth_map.value(current)
            inside = smooth_map.domain.contains(step)
            newly = alive & ~inside
            escape[newly] = k
            alive &= inside
            current = np.where(alive[:, None], step, current)
            orbits[k] = current
    return orbits, alive, escape


def iterate_lift(mapping, points, n):
    """Apply the lift n times without reducing, for finite difference checks"""
    pts, single = _points(points)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(n):
            pts = mapping.lift(pts)
    return pts[0] if single else pts


def derivative_cocycle(smooth_map, x, n):
    """
    D_x T^n = D_{T^{n-1}x}T ... D_xT along the orbit of x.

    :return: 2x2 array
    """
    orbit = evaluate_orbit(smooth_map, x, n)
    prod = np.eye(dimension)
    if n == 0:
        return prod
    for jac in smooth_map.jacobian(orbit[:n]):
        prod = jac @ prod
    return prod


def _grid_points(center, radius, count):
    side = max(2, int(math.ceil(math.sqrt(count))))
    center = np.asarray(center, dtype=float)
    axis = np.linspace(-radius, radius, side)
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    return np.stack([xx.ravel(), yy.ravel()], axis=1) + center


def _torus_grid(count):
    side = max(2, int(math.ceil(math.sqrt(count))))
    axis = np.arange(side) / side
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    return np.stack([xx.ravel(), yy.ravel()], axis=1)


def _map_derivative(mapping, points, order):
    if order == 0:
        return mapping.lift(points)
    if order == 1:
        return mapping.jacobian(points)
    return mapping.higher(points, order)


def _map_holder(mapping, s, points, steps=None):
    """Sampled ||mapping||_s over ``points`` for a lift/jacobian/higher object"""
    steps = tuple(steps or defaults.holder_steps)
    order = int(math.floor(s))
    alpha = s - order
    if alpha == 0:
        value = float(np.max(tensor_norm(_map_derivative(mapping, points, order), order)))
        return NormEstimate(value, float(s), len(points))
    base = _map_derivative(mapping, points, order)
    best = 0.0
    directions = np.array([[1.0, 0.0], [0.0, 1.0], [math.sqrt(0.5), math.sqrt(0.5)], [math.sqrt(0.5), -math.sqrt(0.5)]])
    for h in steps:
        for u in directions:
            moved = _map_derivative(mapping, points + h * u, order)
            quotient = tensor_norm(moved - base, order) / h**alpha
            best = max(best, float(np.max(quotient)))
    return NormEstimate(best, float(s), len(points), steps)


def _curve_holder(curve, s, grid, steps=None):
    steps = tuple(steps or defaults.holder_steps)
    order = int(math.floor(s))
    alpha = s - order
    t = np.linspace(0.0, 1.0, grid)
    if alpha == 0:
        value = float(np.max(np.linalg.norm(curve.derivative(t, order), axis=-1)))
        return NormEstimate(value, float(s), grid)
    best = 0.0
    for h in steps:
        if h > 1:
            continue
        starts = t[t <= 1.0 - h]
        if not len(starts):
            starts = np.array([0.0])
        diff = curve.derivative(starts + h, order) - curve.derivative(starts, order)
        best = max(best, float(np.max(np.linalg.norm(diff, axis=-1))) / h**alpha)
    return NormEstimate(best, float(s), grid, steps)


def holder_norm_estimate(obj, s, grid=None, steps=None):
    """
    Grid lower estimate of the s-norm of a map or curve. Integer s gives the
    sup of the s-th derivative (s = 0 the sup norm), fractional s the
    (s - [s])-Holder seminorm of the [s]-th derivative from difference
    quotients over a ladder of steps.

    ... code:: python

        symbext.holder_norm_estimate(Curve.polynomial([[0, 0], [1, 0], [0, 1]]), 2).value
        # 2.0

    :param obj: SmoothMap or Curve
    :param s: order, 0 <= s <= r
    :param grid: sample count, total points for maps, parameters for curves
    :param steps: difference quotient steps for fractional s
    :return: NormEstimate
    """
    if s < 0:
        raise DomainError("Norm order must be >= 0, got {0}".format(s))
    if s > obj.smoothness_r + 1e-12:
        raise UnsupportedSmoothnessError("Order {0} exceeds smoothness r = {1}".format(s, obj.smoothness_r))
    if isinstance(obj, Curve):
        return _curve_holder(obj, s, grid or defaults.curve_grid, steps)
    return _map_holder(obj, s, domain_grid(obj, grid or defaults.map_grid), steps)


def domain_grid(smooth_map, count):
    """
    About ``count`` grid points of the map's sampling region: the uniform
    grid of the torus starting at 0, or a square grid of the declared
    region of a box map.
    """
    if smooth_map.domain.is_torus and smooth_map.region is None:
        return _torus_grid(count)
    center, radius = smooth_map.sample_region()
    return _grid_points(center, radius, count)


def _real(params, key, default, aliases=()):
    for name in (key,) + tuple(aliases):
        if name in params:
            value = params[name]
            break
    else:
        return default
    if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
        raise DomainError("Parameter '{0}' must be a real number, got {1!r}".format(key, value))
    if not math.isfinite(value):
        raise DomainError("Parameter '{0}' must be finite".format(key))
    return float(value)


def _check_params(name, params, allowed):
    unknown = set(params) - set(allowed)
    if unknown:
        raise DomainError("Unknown parameters {0} for system '{1}'".format(sorted(unknown), name))


def _linear_map(name, matrix, domain, r, params, torus=True):
    matrix = np.asarray(matrix, dtype=float)
    norm = float(spectral_norm(matrix))
    det = abs(float(np.linalg.det(matrix)))
    # integer matrices act bijectively on the torus only when unimodular
    invertible = bool(np.isclose(det, 1.0)) if torus else det > 0
    holder = {1.0: norm}
    holder.update({s: 0.0 for s in smoothness_ladder(r) if s > 1})
    return SmoothMap(
        name,
        domain,
        float(r),
        lambda p: p @ matrix.T,
        lambda p: np.broadcast_to(matrix, (len(p), dimension, dimension)).copy(),
        None,
        params=dict(params, matrix=matrix.tolist()),
        holder_data=holder,
        region=None if torus else ((0.0, 0.0), 1.0),
        linear=True,
        invertible=invertible,
    )


def _cat(params, r):
    _check_params("cat", params, ())
    return _linear_map("cat", [[2.0, 1.0], [1.0, 1.0]], Domain.torus2(), r, params)


def _doubling(params, r):
    _check_params("doubling2d", params, ("a", "b"))
    a = _real(params, "a", 2.0)
    b = _real(params, "b", 2.0)
    if a != int(a) or b != int(b):
        raise DomainError("doubling2d factors must be integers to act on the torus")
    return _linear_map("doubling2d", [[a, 0.0], [0.0, b]], Domain.torus2(), r, {"a": int(a), "b": int(b)})


def _diag_linear(params, r):
    _check_params("diag_linear", params, ("lambda1", "lambda2", "λ1", "λ2"))
    l1 = _real(params, "lambda1", 2.0, ("λ1",))
    l2 = _real(params, "lambda2", 0.5, ("λ2",))
    return _linear_map(
        "diag_linear", [[l1, 0.0], [0.0, l2]], Domain.box((0.0, 0.0), 1e8), r, {"lambda1": l1, "lambda2": l2}, False
    )


def _identity(params, r):
    _check_params("identity", params, ("domain",))
    kind = params.get("domain", "torus2")
    if kind not in ("torus2", "box"):
        raise DomainError("identity domain must be 'torus2' or 'box'")
    if kind == "box":
        return _linear_map("identity", np.eye(dimension), Domain.box((0.0, 0.0), 1e8), r, {"domain": kind}, False)
    return _linear_map("identity", np.eye(dimension), Domain.torus2(), r, {"domain": kind})


def henon_fixed_point(a=1.4, b=0.3):
    """The fixed point of the Henon map with positive abscissa"""
    x = (-(1 - b) + math.sqrt((1 - b) ** 2 + 4 * a)) / (2 * a)
    return np.array([x, b * x])


def _henon(params, r):
    _check_params("henon", params, ("a", "b"))
    a = _real(params, "a", 1.4)
    b = _real(params, "b", 0.3)

    def lift(p):
        x, y = p[:, 0], p[:, 1]
        return np.stack([1.0 - a * x * x + y, b * x], axis=1)

    def jacobian(p):
        out = np.zeros((len(p), dimension, dimension))
        out[:, 0, 0] = -2.0 * a * p[:, 0]
        out[:, 0, 1] = 1.0
        out[:, 1, 0] = b
        return out

    def higher(p, order):
        out = _zero_tensor(len(p), order)
        if order == 2:
            out[:, 0, 0, 0] = -2.0 * a
        return out

    smooth_map = SmoothMap(
        "henon",
        Domain.box((0.0, 0.0), 4.0),
        float(r),
        lift,
        jacobian,
        higher,
        params={"a": a, "b": b},
        region=((0.0, 0.0), 1.5),
        invertible=b != 0,
    )
    return _with_estimates(smooth_map)


def _sine_tensor(x, order, amplitude):
    """order-th x-derivative of amplitude/(2 pi) sin(2 pi x)"""
    return amplitude / _two_pi * _two_pi**order * np.sin(_two_pi * x + order * math.pi / 2)


def _sine_kicked(name, base_matrix, amplitude, params, r):
    base_matrix = np.asarray(base_matrix, dtype=float)

    def lift(p):
        kick = _sine_tensor(p[:, 0], 0, amplitude)
        return p @ base_matrix.T + kick[:, None]

    def jacobian(p):
        out = np.broadcast_to(base_matrix, (len(p), dimension, dimension)).copy()
        kick = _sine_tensor(p[:, 0], 1, amplitude)
        out[:, 0, 0] += kick
        out[:, 1, 0] += kick
        return out

    def higher(p, order):
        out = _zero_tensor(len(p), order)
        kick = _sine_tensor(p[:, 0], order, amplitude)
        index = (slice(None), 0) + (0,) * order
        out[index] = kick
        out[(slice(None), 1) + (0,) * order] = kick
        return out

    # det = 1 for both kicked families
    smooth_map = SmoothMap(name, Domain.torus2(), float(r), lift, jacobian, higher, params=params, invertible=True)
    return _with_estimates(smooth_map)


def _standard(params, r):
    _check_params("standard", params, ("K",))
    coupling = _real(params, "K", 0.5)
    # y' = y + K/2pi sin 2pi x, x' = x + y'
    return _sine_kicked("standard", [[1.0, 1.0], [0.0, 1.0]], coupling, {"K": coupling}, r)


def _perturbed_cat(params, r):
    _check_params("perturbed_cat", params, ("mu",))
    mu = _real(params, "mu", 0.1)
    return _sine_kicked("perturbed_cat", [[2.0, 1.0], [1.0, 1.0]], mu, {"mu": mu}, r)


def _with_estimates(smooth_map):
    holder = {s: holder_norm_estimate(smooth_map, s).value for s in smoothness_ladder(smooth_map.smoothness_r)}
    return replace(smooth_map, holder_data={**smooth_map.holder_data, **holder})


_builtins = {
    "cat": _cat,
    "doubling2d": _doubling,
    "henon": _henon,
    "standard": _standard,
    "identity": _identity,
    "diag_linear": _diag_linear,
    "perturbed_cat": _perturbed_cat,
}

builtin_names = tuple(sorted(_builtins))


def builtin_system(name, params=None, r=3.0):
    """
    Build one of the example systems with analytic jets.

    ... code:: python

        cat = symbext.builtin_system("cat")
        cat.jacobian([0.2, 0.4])
        # array([[2., 1.],
        #        [1., 1.]])

    :param name: one of cat, doubling2d, henon, standard, identity,
        diag_linear, perturbed_cat
    :param params: system parameters
    :param r: declared smoothness, > 1
    :return: SmoothMap
    """
    if name not in _builtins:
        raise DomainError("Unknown system '{0}', expected one of {1}".format(name, ", ".join(builtin_names)))
    params = dict(params or {})
    r = float(_real({"r": r}, "r", 3.0))
    if not r > 1:
        raise DomainError("Smoothness r must be > 1, got {0}".format(r))
    smooth_map = _builtins[name](params, r)
    log.debug("Built system '{0}' with params {1} and r={2}".format(name, smooth_map.params, r))
    return smooth_map


def system_from_spec(spec):
    """
    Build a map from a JSON system spec ``{"name", "params", "r", "norms"}``.
    Supplied norms override the computed certificates.
    """
    spec = Namespace(spec) if not isinstance(spec, Namespace) else spec
    if "name" not in spec:
        raise DomainError("System spec needs a 'name'")
    smooth_map = builtin_system(spec["name"], dict(spec.get("params") or {}), spec.get("r", 3.0))
    norms = {float(key): float(value) for key, value in dict(spec.get("norms") or {}).items()}
    if not norms:
        return smooth_map
    return replace(smooth_map, holder_data={**smooth_map.holder_data, **norms})


def localize(smooth_map, x, n, eps):
    """
    The sequence T^x_{k,eps}(v) = (T(p_{k-1} + eps v) - T(p_{k-1})) / eps for
    k = 1..n along the orbit p of x, with T^x_{0,eps} the identity.

    :param smooth_map: SmoothMap
    :param x: base point
    :param n: number of maps
    :param eps: scale, must satisfy eps < R / sqrt(d)
    :return: MapSequence
    """
    if not eps > 0:
        raise DomainError("Localization scale must be positive, got {0}".format(eps))
    limit = smooth_map.domain.safe_radius / math.sqrt(dimension)
    if eps >= limit:
        raise PreconditionError(
            "Scale {0} too large for the translation chart, need eps < {1:.6f}".format(eps, limit),
            hypothesis="chart_validity",
        )
    orbit = evaluate_orbit(smooth_map, x, max(n - 1, 0))
    maps = [LinearMap(np.eye(dimension))]
    maps.extend(LocalizedMap(smooth_map, orbit[k], eps) for k in range(n))
    log.debug("Localized '{0}' at {1} with eps={2} over {3} steps".format(smooth_map.name, orbit[0].tolist(), eps, n))
    return MapSequence(tuple(maps), "{0}@{1}".format(smooth_map.name, np.round(orbit[0], 6).tolist()))


def osd_condition(maps, grid=None):
    """
    Check that max(|D_z T_k|, 1) / max(|D_z' T_k|, 1) <= 2 over the sqrt(d)
    ball for every map of the sequence, and the sufficient test that the
    second derivative (the (r-1)-Holder norm when r < 2) is below 1/sqrt(d).

    :return: Namespace(holds, ratios, second_derivative_norms, second_derivative_ok)
    """
    points = ball_samples(math.sqrt(dimension), grid or defaults.map_grid)
    ratios, seconds = [], []
    for mapping in maps.maps[1:]:
        norms = np.maximum(spectral_norm(mapping.jacobian(points)), 1.0)
        ratios.append(float(np.max(norms) / np.min(norms)))
        seconds.append(_map_holder(mapping, 2, points).value)
    bound = 1.0 / math.sqrt(dimension)
    return Namespace(
        holds=all(ratio <= 2.0 for ratio in ratios),
        ratios=ratios,
        second_derivative_norms=seconds,
        second_derivative_ok=all(value < bound for value in seconds),
    )
