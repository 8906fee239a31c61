#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# Part of the Symbext package.
#
# Copyright (c) 2025 - Symbext Developers - MIT License
"""
Upper bounds on the symbolic extension entropy and the tail entropy of a
C^r map, assembled from desk-scale estimates of h_top and R(T).
"""
from __future__ import absolute_import
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from symbext.namespace import Namespace
from symbext.shared_variables import dimension, DomainError
from symbext.dynamics import SmoothMap, system_from_spec, domain_grid
from symbext.lyapunov import exterior_growth
from symbext.entropy import make_pool, topological_entropy_estimate

__all__ = [
    "BoundsReport",
    "compute_bounds",
    "measure_level_bound",
    "local_diffeo_check",
    "sexent_bound",
    "tail_bound",
    "buzzi_bound",
    "exterior_power_bound",
    "default_entropy_config",
    "default_growth_config",
]

log = logging.getLogger("symbext.bounds")

default_entropy_config = Namespace(pool={"kind": "grid", "size": 400}, n_range=[2, 3, 4, 5], delta=0.25)
default_growth_config = Namespace(n=10, grid=400)


def _check_r(r):
    if not r > 1:
        raise DomainError("Symbolic extension bounds need r > 1, got r={0}".format(r))


def sexent_bound(h_top, R, r, local_diffeo=False):
    """h_top + 4R/(r - 1), or h_top + R/(r - 1) for local diffeomorphisms"""
    _check_r(r)
    return h_top + (1.0 if local_diffeo else 4.0) * R / (r - 1.0)


def tail_bound(R, r):
    """h*(T) <= R/r"""
    if not r > 0:
        raise DomainError("Tail bound needs r > 0, got r={0}".format(r))
    return R / r


def buzzi_bound(R, r, d=dimension):
    """h*(T) <= d R/r"""
    return d * tail_bound(R, r)


def exterior_power_bound(R, e):
    """R_e(T) <= e R(T)"""
    if e not in (1, 2):
        raise DomainError("Exterior power order must be 1 or 2, got {0}".format(e))
    return e * R


def measure_level_bound(chi1_plus, sum_chi_plus, r, mode="general"):
    """
    Bound on h_sex(mu) - h(mu) for an invariant measure: chi1+/(r - 1) for
    diffeomorphisms, 2 sum chi+/(r - 1) in general.

    ... code:: python

        symbext.measure_level_bound(0.9624, 0.9624, 2, mode="diffeo")
        # 0.9624
    """
    _check_r(r)
    if chi1_plus < 0 or sum_chi_plus < 0:
        raise DomainError("Positive exponent sums must be >= 0")
    if mode == "diffeo":
        return chi1_plus / (r - 1.0)
    if mode == "general":
        return 2.0 * sum_chi_plus / (r - 1.0)
    raise DomainError("Unknown mode '{0}', expected 'diffeo' or 'general'".format(mode))


def local_diffeo_check(smooth_map, grid=400):
    """True when |det DT| > 0 at every sampled grid point"""
    points = domain_grid(smooth_map, int(grid))
    dets = np.abs(np.linalg.det(smooth_map.jacobian(points)))
    ok = bool(np.all(dets[np.isfinite(dets)] > 0))
    if not ok:
        log.info("{0}: Jacobian determinant vanishes on the sampled grid".format(smooth_map.name))
    return ok


@dataclass(frozen=True)
class BoundsReport:
    h_top: float
    R: float
    R_e: tuple
    r: float
    local_diffeo: bool
    sexent_bound_general: float
    sexent_bound_localdiffeo: float
    tail_bound: float
    buzzi_bound: float
    dimension: int = dimension
    provenance: dict = field(default_factory=dict)

    @property
    def applicable_bound(self):
        return self.sexent_bound_localdiffeo if self.local_diffeo else self.sexent_bound_general

    def recompute(self):
        """Rebuild every bound from the stored inputs"""
        return replace(
            self,
            sexent_bound_general=sexent_bound(self.h_top, self.R, self.r, False),
            sexent_bound_localdiffeo=sexent_bound(self.h_top, self.R, self.r, True),
            tail_bound=tail_bound(self.R, self.r),
            buzzi_bound=buzzi_bound(self.R, self.r, self.dimension),
        )

    def to_dict(self):
        return {
            "inputs": {
                "h_top": self.h_top,
                "R": self.R,
                "R_e": list(self.R_e),
                "r": self.r,
                "dimension": self.dimension,
                "local_diffeo": self.local_diffeo,
            },
            "bounds": {
                "sexent_general": self.sexent_bound_general,
                "sexent_localdiffeo": self.sexent_bound_localdiffeo,
                "applicable": self.applicable_bound,
                "tail": self.tail_bound,
                "buzzi": self.buzzi_bound,
            },
            "provenance": self.provenance,
        }


def compute_bounds(system, r, entropy_config=None, growth_config=None, local_diffeo=None, seed=0):
    """
    Estimate h_top and R_1, R_2 of a system and assemble the bounds.

    ... code:: python

        report = symbext.compute_bounds({"name": "cat"}, 2)
        report.sexent_bound_localdiffeo  # about 1.92

    :param system: SmoothMap or system spec dict
    :param r: smoothness, > 1
    :param entropy_config: dict with pool, n_range and delta
    :param growth_config: dict with n and grid
    :param local_diffeo: user assertion, checked on the growth grid when None
    :param seed: seed for random pools
    :return: BoundsReport
    """
    _check_r(r)
    smooth_map = system if isinstance(system, SmoothMap) else system_from_spec(system)
    entropy_config = Namespace(default_entropy_config, **dict(entropy_config or {}))
    growth_config = Namespace(default_growth_config, **dict(growth_config or {}))

    pool = make_pool(smooth_map, dict(entropy_config.pool), seed=seed, n=max(entropy_config.n_range))
    entropy = topological_entropy_estimate(smooth_map, pool, entropy_config.n_range, entropy_config.delta)
    growth = [exterior_growth(smooth_map, e, int(growth_config.n), int(growth_config.grid)) for e in (1, 2)]
    R = growth[0].value

    provenance = {
        "h_top": entropy.to_dict(),
        "R": [g.to_dict() for g in growth],
        "pool": dict(entropy_config.pool),
        "seed": seed,
    }
    if local_diffeo is None:
        local_diffeo = local_diffeo_check(smooth_map, growth_config.grid)
        provenance["local_diffeo"] = "grid_check"
    else:
        provenance["local_diffeo"] = "asserted"
    log.info("{0}: h_top={1:.4f} R={2:.4f} r={3}".format(smooth_map.name, entropy.value, R, r))

    return BoundsReport(
        h_top=entropy.value,
        R=R,
        R_e=tuple(g.value for g in growth),
        r=float(r),
        local_diffeo=bool(local_diffeo),
        sexent_bound_general=sexent_bound(entropy.value, R, r, False),
        sexent_bound_localdiffeo=sexent_bound(entropy.value, R, r, True),
        tail_bound=tail_bound(R, r),
        buzzi_bound=buzzi_bound(R, r),
        provenance=provenance,
    )
