#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# Part of the Symbext package.
#
# Copyright (c) 2025 - Symbext Developers - MIT License
"""
Affine reparametrizations of curves under a map sequence.

A chart is an affine contraction t -> lo + (hi - lo) t of [0, 1]. A family
at step n is built inductively from the family at step n - 1, one defect
value at a time:

1. subdivide each chart into [e^{k/(r-1)}] + 1 pieces
2. keep pieces meeting the target set
3. cut the sublevel set {|g| <= a} of the next derivative into charts
4. keep pieces meeting the target set
5. subdivide until the derivative oscillation ratio can reach 1/3
6. trim each piece to the unit ball
7. subdivide into [sqrt(d/3)] + 1 pieces
8. bisect until the norm properties hold on samples

The target set of the step n family is the set of parameters whose defect
sequence starts with the prescribed K_{n-1} and whose orbit stays in B(n+1, 1).
"""
from __future__ import absolute_import
import math
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from symbext.namespace import Namespace
from symbext.process_helpers import run_in_pool
from symbext.shared_variables import (
    defaults,
    dimension,
    DomainError,
    BudgetExceededError,
    PreconditionError,
)
from symbext.dynamics import smoothness_ladder, derivative_ladder, holder_norm_estimate, localize
from symbext.file_operations import load_constants
from symbext.lyapunov import log_plus_average
from symbext.combinatorics import (
    bernoulli_entropy,
    capped_exp,
    clamped_integer_part,
    defect_table,
    realized_class_bound,
)
from symbext.curves import (
    IntervalUnion,
    oscillation_trim,
    calibrated_constant,
    hyperbolic_time_mask,
    bowen_mask,
)

__all__ = [
    "AffineChart",
    "ChartFamily",
    "PropertyReport",
    "BowenReparametrization",
    "cover_budget",
    "sublevel_charts",
    "build_chart_family",
    "verify_chart_properties",
    "fit_count_constants",
    "constants_stable",
    "reparametrize_bowen_ball",
    "derivative_comparability",
    "monotone_branch_check",
    "per_step_factor",
]

log = logging.getLogger("symbext.reparametrization")

target_samples = 17
trim_grid = 2001


@dataclass(frozen=True)
class AffineChart:
    """The chart t -> lo + (hi - lo) t, with the index of its parent chart"""

    lo: float
    hi: float
    parent: int = None
    tags: tuple = ()

    def __post_init__(self):
        if not 0.0 <= self.lo <= self.hi <= 1.0:
            raise DomainError("Chart image ({0}, {1}) must satisfy 0 <= lo <= hi <= 1".format(self.lo, self.hi))

    @property
    def length(self):
        return self.hi - self.lo

    def apply(self, t):
        return self.lo + self.length * np.asarray(t, dtype=float)

    def contains(self, t, slack=1e-12):
        t = np.asarray(t, dtype=float)
        return (t >= self.lo - slack) & (t <= self.hi + slack)

    def compose(self, a, b, tag=None):
        """The chart of the sub-interval [a, b] of this chart's domain"""
        lo = min(max(float(self.apply(a)), self.lo), self.hi)
        hi = min(max(float(self.apply(b)), lo), self.hi)
        return AffineChart(lo, hi, self.parent, self.tags + ((tag,) if tag else ()))

    def split(self, pieces, tag=None):
        edges = np.linspace(0.0, 1.0, pieces + 1)
        label = "{0}:{1}".format(tag, pieces) if tag else None
        return [self.compose(edges[i], edges[i + 1], label) for i in range(pieces)]

    def local(self, t):
        """Chart domain coordinates of the parameters t"""
        if self.length == 0:
            return np.zeros_like(np.asarray(t, dtype=float))
        return (np.asarray(t, dtype=float) - self.lo) / self.length

    def to_dict(self):
        return {"lo": self.lo, "hi": self.hi, "parent": self.parent, "tags": list(self.tags)}


@dataclass(frozen=True, eq=False)
class ChartFamily:
    charts: tuple
    step: int
    defects: tuple
    r: float
    history: tuple = ()
    constants: dict = field(default_factory=dict)
    certificates: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def count(self):
        return len(self.charts)

    @property
    def log_count(self):
        return math.log(self.count) if self.count else -math.inf

    def union(self):
        return IntervalUnion(tuple((c.lo, c.hi) for c in self.charts if c.hi > c.lo))

    def covers(self, t):
        t = np.asarray(t, dtype=float)
        covered = np.zeros(t.shape, dtype=bool)
        for chart in self.charts:
            covered |= chart.contains(t)
        return covered

    def __len__(self):
        return self.count

    def __iter__(self):
        return iter(self.charts)

    def to_dict(self):
        return {
            "step": self.step,
            "defects": list(self.defects),
            "r": self.r,
            "count": self.count,
            "log_count": self.log_count,
            "charts": [chart.to_dict() for chart in self.charts],
            "history": [dict(entry) for entry in self.history],
            "constants": dict(self.constants),
            "certificates": dict(self.certificates),
            "diagnostics": dict(self.diagnostics),
        }


@dataclass(frozen=True)
class PropertyReport:
    passed: dict
    worst: dict
    failures: tuple = ()
    tolerance: float = defaults.verify_tolerance

    @property
    def all_passed(self):
        return all(self.passed.values())

    @property
    def first_failure(self):
        return self.failures[0] if self.failures else None

    def failing_steps(self, prop):
        return sorted({k for name, _, k in self.failures if name == prop and k is not None})

    def to_dict(self):
        return {
            "passed": dict(self.passed),
            "all_passed": self.all_passed,
            "worst": dict(self.worst),
            "failures": [list(f) for f in self.failures],
            "tolerance": self.tolerance,
        }


@dataclass(frozen=True, eq=False)
class BowenReparametrization:
    family: ChartFamily
    bound: float
    log_bound: float
    lyapunov_term: float
    lyapunov_rate: float
    realized_classes: tuple
    cover_misses: int
    normalization_ok: bool
    class_families: tuple = ()

    @property
    def holds(self):
        return self.family.log_count <= self.log_bound + 1e-9

    def to_dict(self):
        return {
            "count": self.family.count,
            "log_count": self.family.log_count,
            "bound": self.bound,
            "log_bound": self.log_bound,
            "lyapunov_term": self.lyapunov_term,
            "lyapunov_rate": self.lyapunov_rate,
            "realized_classes": [list(c) for c in self.realized_classes],
            "cover_misses": self.cover_misses,
            "normalization_ok": self.normalization_ok,
            "holds": self.holds,
            "family": self.family.to_dict(),
        }


def cover_budget(r, d=dimension, constants=None):
    """C_cover for (r, d) from the constants file"""
    constants = constants if constants is not None else load_constants()
    key = "{0:g},{1}".format(r, d)
    table = constants.get("C_cover", {})
    if key in table:
        return int(table[key])
    fallback = max([int(v) for v in table.values()] + [10**4])
    log.debug("No chart budget for {0}, using {1}".format(key, fallback))
    return fallback


def per_step_factor(k, r, d=dimension, C_LK=None, C_cover=None):
    """Worst case multiplicity of one construction step with defect value k"""
    C_LK = calibrated_constant(r - 1.0, d) if C_LK is None else C_LK
    C_cover = cover_budget(r, d) if C_cover is None else C_cover
    theta = clamped_integer_part(math.exp(k / (r - 1.0))) + 1
    return theta * (clamped_integer_part(3 * C_LK) + 1) * C_cover * (clamped_integer_part(math.sqrt(d / 3.0)) + 1)


def _excess(g, a):
    def excess(t):
        return float(np.sum(g.value(t) ** 2, axis=-1)[0]) - a * a

    return excess


def _components(g, a, grid, required):
    """Intervals of {|g| <= a} from grid sign changes refined by brentq"""
    ts = np.linspace(0.0, 1.0, grid)
    values = np.sum(g.value(ts) ** 2, axis=-1) - a * a
    inside = values <= 0
    excess = _excess(g, a)
    tol = defaults.bisection_tolerance
    out = []
    j = 0
    while j < grid:
        if not inside[j]:
            j += 1
            continue
        start = j
        while j + 1 < grid and inside[j + 1]:
            j += 1
        lo = 0.0 if start == 0 else brentq(excess, ts[start - 1], ts[start], xtol=tol)
        hi = 1.0 if j == grid - 1 else brentq(excess, ts[j], ts[j + 1], xtol=tol)
        out.append((lo, hi))
        j += 1

    union = IntervalUnion(tuple(out))
    for u in np.atleast_1d(required if required is not None else []):
        if union.contains(u) or excess(u) > 0:
            continue
        # a dip between two grid samples
        left = np.flatnonzero((ts < u) & ~inside)
        right = np.flatnonzero((ts > u) & ~inside)
        lo = brentq(excess, ts[left[-1]], u, xtol=tol) if len(left) else 0.0
        hi = brentq(excess, u, ts[right[0]], xtol=tol) if len(right) else 1.0
        union = IntervalUnion(union.intervals + ((lo, hi),))
    return union


def _piece_norms(g, lo, hi, ladder, samples):
    piece = g.reparametrize(lo, hi)
    return [holder_norm_estimate(piece, t, grid=samples).value for t in ladder]


def sublevel_charts(g, a, r, certificate=None, max_charts=None, grid=None, required=None):
    """
    Affine charts covering {t : |g(t)| <= a} with |g o phi|_s <= a / (12 e)
    on samples for every s of the derivative ladder of r.

    The sublevel components are located by sign changes of |g|^2 - a^2 on the
    grid and refined by brentq. Each component is split into the fewest
    equal pieces meeting the contract, starting from the sampled norms of the
    component and doubling.

    ... code:: python

        g = Curve.segment((-0.5, 0), (0.5, 0))
        charts = symbext.sublevel_charts(g, 0.25, r=2)
        # cover [0.25, 0.75] with 66 charts

    :param g: Curve with jets up to order ceil(r - 1)
    :param a: level, > 0
    :param r: smoothness, > 1
    :param certificate: sampled |g|_{r-1}, must not exceed a
    :param max_charts: budget, defaults to C_cover of (r, d)
    :param grid: component search grid, defaults to 10^4
    :param required: parameters with |g| <= a that must be covered
    :return: list of AffineChart
    """
    if not a > 0:
        raise DomainError("Sublevel value must be positive, got {0}".format(a))
    if not r > 1:
        raise DomainError("Smoothness r must be > 1, got {0}".format(r))
    if certificate is not None and certificate > a * (1 + 1e-6):
        raise PreconditionError(
            "Norm certificate {0:.6g} exceeds the level {1:.6g}".format(certificate, a), hypothesis="norm_certificate"
        )
    grid = grid or defaults.curve_grid
    budget = cover_budget(r) if max_charts is None else max_charts
    ladder = derivative_ladder(r)
    target = a * defaults.sublevel_ratio
    samples = defaults.chart_samples

    charts = []
    for lo, hi in _components(g, a, grid, required):
        if hi - lo < defaults.degenerate_length:
            continue
        norms = _piece_norms(g, lo, hi, ladder, samples)
        pieces = max([1] + [int(math.ceil((norm / target) ** (1.0 / s))) for norm, s in zip(norms, ladder) if norm > 0])
        while True:
            if len(charts) + pieces > budget:
                raise BudgetExceededError(
                    "Sublevel cover needs more than {0} charts".format(budget),
                    diagnostics={"a": a, "component": [lo, hi], "pieces": pieces, "charts": len(charts)},
                )
            edges = np.linspace(lo, hi, pieces + 1)
            worst = max(
                max(_piece_norms(g, edges[i], edges[i + 1], ladder, samples)) if ladder else 0.0
                for i in range(pieces)
            )
            if worst <= target * (1 + 1e-9):
                break
            pieces *= 2
        charts.extend(AffineChart(float(edges[i]), float(edges[i + 1]), tags=("xi",)) for i in range(pieces))
    log.debug("Sublevel cover at a={0:.6g}: {1} charts".format(a, len(charts)))
    return charts


class _Construction(object):
    """Shared state of one chart family build: target masks and norm checks"""

    def __init__(self, maps, curve, defects, r, n, grid, tolerance=None):
        self.maps = maps
        self.curve = curve
        self.defects = tuple(int(k) for k in defects)
        self.r = float(r)
        self.n = n
        self.ts = np.linspace(0.0, 1.0, grid)
        self.samples = np.linspace(0.0, 1.0, defaults.chart_samples)
        self.own = np.linspace(0.0, 1.0, target_samples)
        self.tolerance = defaults.verify_tolerance if tolerance is None else tolerance
        self.ladder = smoothness_ladder(self.r)
        self.derivative_orders = [s + 1.0 for s in derivative_ladder(self.r)]
        self.steps = tuple(h for h in defaults.holder_steps if h <= 1.0)
        self.targets = [self.member(self.ts, j) for j in range(n + 1)]
        self.discarded = 0

    def member(self, ts, j):
        """Target set of the step j family: K_{j-1} prescribed, orbit in B(j+1, 1)"""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        mask = bowen_mask(self.maps, self.curve, ts, j + 1, 1.0)
        if j >= 2 and np.any(mask):
            entries = defect_table(self.maps, self.curve, ts, j - 1).entries
            mask &= np.all(entries == np.asarray(self.defects[: j - 1]), axis=1)
        return mask

    def grid_points(self, chart, j):
        return self.ts[self.targets[j] & chart.contains(self.ts, slack=0.0)]

    def meets(self, chart, j):
        if len(self.grid_points(chart, j)):
            return True
        return bool(np.any(self.member(chart.apply(self.own), j)))

    def image(self, chart, k):
        return self.maps.push(self.curve, k).reparametrize(chart.lo, chart.hi)

    def norm_table(self, chart, k_max, orders):
        """Sampled s-norms of T^k o curve o chart, shape (k_max + 1, len(orders))"""
        top = max(int(math.floor(s)) for s in orders)
        piece = self.curve.reparametrize(chart.lo, chart.hi)
        base = self.maps.push_jets(piece, self.samples, k_max, top)
        table = np.zeros((k_max + 1, len(orders)))
        shifted = {}
        for col, s in enumerate(orders):
            order = int(math.floor(s))
            alpha = s - order
            for k in range(k_max + 1):
                if alpha == 0:
                    table[k, col] = np.max(np.linalg.norm(base[k][order], axis=-1))
            if alpha == 0:
                continue
            for h in self.steps:
                if h not in shifted:
                    starts = self.samples[self.samples <= 1.0 - h]
                    shifted[h] = (starts, self.maps.push_jets(piece, starts + h, k_max, top))
                starts, moved = shifted[h]
                count = len(starts)
                for k in range(k_max + 1):
                    diff = moved[k][order] - base[k][order][:count]
                    quotient = np.max(np.linalg.norm(diff, axis=-1)) / h**alpha
                    table[k, col] = max(table[k, col], quotient)
        return table

    def check(self, chart, j):
        """Properties (i)-(iii) of one chart at step j"""
        radius = math.sqrt(dimension) * (1 + self.tolerance)
        positions = self.maps.orbit(self.curve.value(chart.apply(self.samples)), j)
        norms = np.max(np.linalg.norm(positions, axis=-1), axis=1)
        orders = sorted(set(self.ladder) | set(self.derivative_orders) | {1.0})
        table = self.norm_table(chart, j, orders)
        ladder_cols = [orders.index(s) for s in self.ladder]
        derivative_cols = [orders.index(s) for s in self.derivative_orders]
        speed = table[j, orders.index(1.0)]
        ratio = float(np.max(table[j, derivative_cols]) / speed) if speed > 0 else math.inf
        if speed == 0 and np.max(table[j, derivative_cols]) == 0:
            ratio = 0.0
        ladder_norms = np.max(table[:, ladder_cols], axis=1)
        return Namespace(
            i=bool(np.all(norms <= radius)),
            ii=bool(np.all(ladder_norms <= 1.0 + self.tolerance)),
            iii=ratio <= 1.0 / 3.0 + self.tolerance,
            radius_by_step=norms.tolist(),
            ladder_by_step=ladder_norms.tolist(),
            ratio=ratio,
        )

    def refine(self, chart, j, depth=0):
        """Bisect until (i)-(iii) hold, dropping halves that miss the target"""
        if chart.length < defaults.degenerate_length:
            self.discarded += 1
            return []
        result = self.check(chart, j)
        if (result.i and result.ii and result.iii) or depth >= defaults.refine_depth:
            if depth >= defaults.refine_depth:
                log.warning("Chart [{0}, {1}] still fails after {2} bisections".format(chart.lo, chart.hi, depth))
            return [chart]
        out = []
        for half in chart.split(2, "refine"):
            if self.meets(half, j):
                out.extend(self.refine(half, j, depth + 1))
        return out


def _theta_pieces(k, r):
    return clamped_integer_part(math.exp(k / (r - 1.0))) + 1


def _sublevel_stage(state, piece, j, budget, stats):
    """Stage 3 for one piece: charts of {|(T^{j+1} o curve o piece)'| <= a}"""
    g = state.image(piece, j + 1).derivative_curve()
    points = piece.local(state.grid_points(piece, j + 1))
    if len(points):
        witness = points[:1]
    else:
        own = state.own[state.member(piece.apply(state.own), j + 1)]
        witness = own[:1] if len(own) else state.own[:1]
    level = 4.0 * math.e * float(np.linalg.norm(g.value(witness), axis=-1)[0])
    if len(points):
        highest = float(np.max(np.linalg.norm(g.value(points), axis=-1)))
        if highest > level:
            stats.raised_levels += 1
            level = highest * (1 + 1e-9)
    if level == 0:
        stats.zero_witness += 1
        return [piece]
    local = sublevel_charts(g, level, state.r, max_charts=budget, grid=trim_grid, required=points)
    return [piece.compose(c.lo, c.hi, "xi") for c in local]


def _oscillation_split(state, piece, j, cap):
    """Stage 5: pieces so that the derivative oscillation ratio can reach 1/3"""
    s = min(1.0, state.r - 1.0)
    c = state.image(piece, j + 1)
    speeds = c.speed(state.samples)
    low = float(np.min(speeds))
    if low == 0:
        return piece.split(cap, "lk"), cap
    variation = holder_norm_estimate(c.derivative_curve(), s, grid=defaults.chart_samples).value
    pieces = int(math.ceil((3.0 * variation / low) ** (1.0 / s))) if variation > 0 else 1
    pieces = min(max(pieces, 1), cap)
    return piece.split(pieces, "lk"), pieces


def _trim_stage(state, piece, j, depth=0):
    """Stage 6: oscillation trim, bisecting while the oscillation hypothesis fails"""
    if piece.length < defaults.degenerate_length:
        state.discarded += 1
        return []
    points = piece.local(state.grid_points(piece, j + 1))
    try:
        a, b, _ = oscillation_trim(state.image(piece, j + 1), grid=trim_grid)
    except PreconditionError as err:
        if err.hypothesis == "oscillation" and depth < defaults.refine_depth:
            out = []
            for half in piece.split(2, "osc"):
                if state.meets(half, j + 1):
                    out.extend(_trim_stage(state, half, j, depth + 1))
            return out
        if err.hypothesis == "meets_unit_ball" and not len(points):
            return []
        return [piece]
    if len(points):
        a, b = min(a, float(points.min())), max(b, float(points.max()))
    if b - a < defaults.degenerate_length and not len(points):
        state.discarded += 1
        return []
    return [piece.compose(a, b, "trim")]


def _advance(state, family, j, budget, cap, normalizing):
    """Build the step j + 1 charts from the step j charts"""
    stats = Namespace(step=j + 1, raised_levels=0, zero_witness=0)
    theta = _theta_pieces(state.defects[j - 1], state.r) if j >= 1 else 1
    stats.theta = theta
    pieces = []
    for index, chart in enumerate(family):
        parent = AffineChart(chart.lo, chart.hi, index, chart.tags)
        pieces.extend(p for p in parent.split(theta, "theta") if state.meets(p, j + 1))
    stats.after_theta = len(pieces)

    covered = []
    for piece in pieces:
        covered.extend(c for c in _sublevel_stage(state, piece, j, budget, stats) if state.meets(c, j + 1))
    stats.after_sublevel = len(covered)

    split, multiplicities = [], []
    for piece in covered:
        parts, count = _oscillation_split(state, piece, j, cap)
        multiplicities.append(count)
        split.extend(p for p in parts if state.meets(p, j + 1))
    stats.lk_max = max(multiplicities) if multiplicities else 0
    stats.after_split = len(split)

    trimmed = []
    for piece in split:
        trimmed.extend(_trim_stage(state, piece, j))
    stats.after_trim = len(trimmed)

    normalized = []
    for piece in trimmed:
        normalized.extend(p for p in piece.split(normalizing, "norm") if state.meets(p, j + 1))

    refined = []
    for piece in normalized:
        refined.extend(state.refine(piece, j + 1))
    stats.after_refine = len(refined)
    stats.count = len(refined)
    log.debug("Step {0}: {1}".format(j + 1, stats.to_dict()))
    return refined, stats


def _check_preconditions(maps, curve, r, n):
    constants = load_constants()
    limit = 1.0 / float(constants.get("A_prec", 1e3))
    for s in [s for s in smoothness_ladder(r) if s >= 2]:
        worst = max((c.value for c in maps.norm_certificates(s)[:n]), default=0.0)
        if worst > limit * (1 + 1e-6):
            raise PreconditionError(
                "Sequence norm |T_k|_{0:g} = {1:.6g} exceeds 1/A_prec = {2:.6g}".format(s, worst, limit),
                hypothesis="norm_certificate",
            )
    for s in smoothness_ladder(r):
        value = holder_norm_estimate(curve, s, grid=2001).value
        if value > 1.0 + defaults.verify_tolerance:
            raise PreconditionError(
                "Curve norm |sigma|_{0:g} = {1:.6g} exceeds 1".format(s, value), hypothesis="curve_normalization"
            )


def build_chart_family(maps, curve, defects, r, n=None, grid=None, check_preconditions=True):
    """
    The step n family of affine charts for the prescribed defect sequence
    K_{n-1}. Every chart satisfies on samples:

    (i) curve o phi([0, 1]) lies in B(n + 1, sqrt(d))
    (ii) |T^k o curve o phi|_s <= 1 for k <= n, s in the smoothness ladder
    (iii) |(T^n o curve o phi)'|_s <= |(T^n o curve o phi)'|_0 / 3

    and the charts cover the target grid of step n.

    :param maps: MapSequence with at least n maps after T_0
    :param curve: Curve with max_s |curve|_s <= 1
    :param defects: K_{n-1}, sequence of positive integers
    :param r: smoothness, 1 < r < 4
    :param n: step, defaults to len(defects) + 1
    :param grid: target grid, defaults to 10^4
    :param check_preconditions: check the norm certificates of maps and curve
    :return: ChartFamily
    """
    defects = tuple(int(k) for k in defects)
    r = float(r)
    if not r > 1:
        raise DomainError("Smoothness r must be > 1, got {0}".format(r))
    n = len(defects) + 1 if n is None else int(n)
    if n < 0 or len(defects) < n - 1:
        raise DomainError("Step {0} needs {1} defect values, got {2}".format(n, max(n - 1, 0), len(defects)))
    if any(k < 1 for k in defects):
        raise DomainError("Defect values must be >= 1")
    if maps.n < n:
        raise DomainError("Sequence has {0} maps, step {1} needs {1}".format(maps.n, n))
    if check_preconditions:
        _check_preconditions(maps, curve, r, n)

    state = _Construction(maps, curve, defects, r, n, grid or defaults.curve_grid)
    budget = cover_budget(r)
    cap = clamped_integer_part(3 * calibrated_constant(r - 1.0)) + 1
    normalizing = clamped_integer_part(math.sqrt(dimension / 3.0)) + 1

    family = []
    for piece in AffineChart(0.0, 1.0).split(normalizing, "norm"):
        if state.meets(piece, 0):
            family.extend(state.refine(piece, 0))
    history = [Namespace(step=0, count=len(family), after_refine=len(family))]
    for j in range(n):
        if not family:
            history.append(Namespace(step=j + 1, count=0))
            continue
        family, stats = _advance(state, family, j, budget, cap, normalizing)
        history.append(stats)

    counts = [entry.count for entry in history]
    constants = fit_count_constants(counts, defects, r)
    log.info("Chart family step {0} for K={1}: {2} charts".format(n, list(defects[: max(n - 1, 0)]), len(family)))
    return ChartFamily(
        charts=tuple(family),
        step=n,
        defects=defects[: max(n - 1, 0)],
        r=r,
        history=tuple(history),
        constants={"A": constants.A, "B": constants.B, "residual": constants.residual},
        certificates={"cap": cap, "normalizing": normalizing, "budget": budget},
        diagnostics={"discarded": state.discarded, "grid": len(state.ts)},
    )


def fit_count_constants(counts, defects, r):
    """
    A, B with log #G_j <= B + A j + (1/(r-1)) sum_{i<j} k_i on the history:
    A the least squares slope of the left side minus the defect sum, B the
    largest intercept.

    :param counts: #G_j for j = 0..n
    :return: Namespace(A, B, residual)
    """
    excess = []
    for j, count in enumerate(counts):
        if count > 0:
            excess.append((j, math.log(count) - sum(defects[: max(j - 1, 0)]) / (r - 1.0)))
    if not excess:
        return Namespace(A=0.0, B=0.0, residual=0.0)
    steps = np.array([j for j, _ in excess], dtype=float)
    values = np.array([e for _, e in excess])
    slope = float(np.polyfit(steps, values, 1)[0]) if len(excess) > 1 else 0.0
    intercepts = values - slope * steps
    return Namespace(A=slope, B=float(np.max(intercepts)), residual=float(np.max(intercepts) - np.min(intercepts)))


def constants_stable(values, tolerance=0.2):
    """Spread of fitted constants within tolerance * max(1, |median|)"""
    values = np.asarray(list(values), dtype=float)
    if not len(values):
        return True
    spread = float(np.max(values) - np.min(values))
    return spread <= tolerance * max(1.0, abs(float(np.median(values))))


def verify_chart_properties(family, maps, curve, defects, r, grid=None, tolerance=None):
    """
    Check properties (i)-(iii) on samples of every chart, (iv) the cover of
    the target grid and (v) log #charts <= B + A n + (1/(r-1)) sum k_i with
    the family's fitted constants. Report only, never raises on failure.

    :return: PropertyReport
    """
    n = family.step
    state = _Construction(maps, curve, defects, r, n, grid or defaults.curve_grid, tolerance)
    passed = {"i": True, "ii": True, "iii": True, "iv": True, "v": True}
    worst = {"radius": 0.0, "norm": 0.0, "ratio": 0.0, "cover_misses": 0}
    failures = []
    for index, chart in enumerate(family):
        result = state.check(chart, n)
        worst["radius"] = max(worst["radius"], max(result.radius_by_step))
        worst["norm"] = max(worst["norm"], max(result.ladder_by_step))
        worst["ratio"] = max(worst["ratio"], result.ratio)
        radius = math.sqrt(dimension) * (1 + state.tolerance)
        for k, value in enumerate(result.radius_by_step):
            if value > radius:
                passed["i"] = False
                failures.append(("i", index, k))
        for k, value in enumerate(result.ladder_by_step):
            if value > 1.0 + state.tolerance:
                passed["ii"] = False
                failures.append(("ii", index, k))
        if not result.iii:
            passed["iii"] = False
            failures.append(("iii", index, n))

    misses = int(np.sum(state.targets[n] & ~family.covers(state.ts)))
    worst["cover_misses"] = misses
    if misses:
        passed["iv"] = False
        failures.append(("iv", None, None))

    A = float(family.constants.get("A", 0.0))
    B = float(family.constants.get("B", 0.0))
    bound = B + A * n + sum(tuple(defects)[: max(n - 1, 0)]) / (float(r) - 1.0)
    worst["log_count"] = family.log_count
    worst["count_bound"] = bound
    if family.log_count > bound + 1e-9:
        passed["v"] = False
        failures.append(("v", None, None))
    return PropertyReport(passed, worst, tuple(failures), state.tolerance)


def _class_build(defects, maps, curve, r, n, grid):
    return build_chart_family(maps, curve, defects, r, n=n, grid=grid, check_preconditions=False)


def reparametrize_bowen_ball(smooth_map, x, curve, chi, gamma, C, n, eps, r, grid=None, workers=1):
    """
    Charts F_n reparametrizing the hyperbolic times of the curve inside the
    Bowen ball B(x, n + 1, eps), with the count bound

        log #F_n <= (1/(r-1)) (1 + H([l - chi] + 3)) (l - chi) n + A n + B

    l the log+ average of |DT| along the orbit of x.

    :param smooth_map: SmoothMap
    :param x: base point
    :param curve: Curve in the eps-localized coordinates, max_s |curve|_s <= 1
    :param chi: growth rate, > 0
    :param gamma: tolerance, 0 < gamma < 1/3
    :param C: constant, > 1
    :param n: number of steps, >= 1
    :param eps: localization scale
    :param r: smoothness, 1 < r < 4
    :param grid: parameter grid
    :param workers: threads for the per class builds
    :return: BowenReparametrization
    """
    if n < 1:
        raise DomainError("Bowen reparametrization needs n >= 1")
    grid = grid or defaults.curve_grid
    maps = localize(smooth_map, x, n, eps)
    _check_preconditions(maps, curve, r, n)
    ts = np.linspace(0.0, 1.0, grid)
    classes = realized_class_bound(maps, curve, chi, gamma, C, n, ts).classes

    if workers > 1 and len(classes) > 1:
        families = run_in_pool(
            _class_build,
            list(classes),
            processes=workers,
            target_kwargs={"maps": maps, "curve": curve, "r": r, "n": n, "grid": grid},
        )
    else:
        families = [_class_build(k, maps, curve, r, n, grid) for k in classes]

    charts = tuple(chart for family in families for chart in family.charts)
    steps = n + 1
    counts = [sum(f.history[j].count for f in families) for j in range(steps)] if families else [0] * steps
    fit = fit_count_constants(counts, (), r)
    family = ChartFamily(
        charts=charts,
        step=n,
        defects=(),
        r=float(r),
        history=tuple(Namespace(step=j, count=c) for j, c in enumerate(counts)),
        constants={"A": fit.A, "B": fit.B, "residual": fit.residual},
        certificates={"classes": len(classes)},
        diagnostics={"discarded": sum(f.diagnostics.get("discarded", 0) for f in families)},
    )

    target = hyperbolic_time_mask(maps, curve, ts, chi, gamma, C, n) & bowen_mask(maps, curve, ts, n + 1, 1.0)
    misses = int(np.sum(target & ~family.covers(ts)))
    if misses:
        log.warning("{0} hyperbolic times of the Bowen ball are not covered".format(misses))

    normalization_ok = True
    samples = np.linspace(0.0, 1.0, defaults.chart_samples)
    for chart in charts:
        jets = maps.push_jets(curve.reparametrize(chart.lo, chart.hi), samples, n, 1)
        if max(float(np.max(np.linalg.norm(j[1], axis=-1))) for j in jets) > 1.0 + defaults.verify_tolerance:
            normalization_ok = False
            break

    rate = log_plus_average(smooth_map, x, n)
    gap = rate - chi
    lyapunov_term = (1.0 + bernoulli_entropy(clamped_integer_part(gap) + 3)) * gap * n / (r - 1.0)
    log_bound = lyapunov_term + fit.A * n + fit.B
    bound = capped_exp(log_bound)
    return BowenReparametrization(
        family=family,
        bound=bound,
        log_bound=log_bound,
        lyapunov_term=lyapunov_term,
        lyapunov_rate=rate,
        realized_classes=tuple(classes),
        cover_misses=misses,
        normalization_ok=normalization_ok,
        class_families=tuple(families),
    )


def derivative_comparability(maps, curve, chart, n):
    """
    Among sample pairs of the chart whose |D(T^n o curve)| ratio lies in
    [1/2, 2], the extreme ratios of |D(T^{n+1} o curve)|.

    :return: Namespace(max_ratio, min_ratio, pairs)
    """
    samples = chart.apply(np.linspace(0.0, 1.0, defaults.chart_samples))
    jets = maps.push_jets(curve, samples, n + 1, 1)
    now = np.linalg.norm(jets[n][1], axis=-1)
    then = np.linalg.norm(jets[n + 1][1], axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio_now = now[:, None] / now[None, :]
        ratio_then = then[:, None] / then[None, :]
    comparable = (ratio_now >= 0.5) & (ratio_now <= 2.0) & np.isfinite(ratio_then)
    if not np.any(comparable):
        return Namespace(max_ratio=1.0, min_ratio=1.0, pairs=0)
    values = ratio_then[comparable]
    return Namespace(max_ratio=float(values.max()), min_ratio=float(values.min()), pairs=int(comparable.sum()))


def monotone_branch_check(family, maps, curve, axis=0):
    """The sign of one coordinate of (T^n o curve)' is constant on every chart"""
    samples = np.linspace(0.0, 1.0, defaults.chart_samples)
    failures = []
    for index, chart in enumerate(family):
        jets = maps.push_jets(curve, chart.apply(samples), family.step, 1)
        coordinate = jets[family.step][1][:, axis]
        if not (np.all(coordinate > 0) or np.all(coordinate < 0)):
            failures.append(index)
    return Namespace(holds=not failures, failures=failures)
