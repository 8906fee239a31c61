#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# Part of the Symbext package.
#
# Copyright (c) 2025 - Symbext Developers - MIT License
"""
Experiment runner: validates JSON configs, runs the named pipelines in
order and writes ``report.json``, one CSV per table and a metadata side
channel with timestamps and durations.
"""
from __future__ import absolute_import
import os
import json
import math
import logging
import datetime
import platform
from dataclasses import dataclass, field

import numpy as np

from symbext.namespace import Namespace, ConfigNamespace
from symbext.shared_variables import (
    defaults,
    dimension,
    SymbextError,
    DomainError,
    EscapeError,
    UnsupportedSmoothnessError,
    PreconditionError,
    BudgetExceededError,
    DegenerateTangencyError,
    SchemaError,
)
from symbext.wrappers import time_it, log_exception
from symbext.file_operations import load_json, save_json, list_to_csv, file_hash, json_ready
from symbext.dynamics import Curve, system_from_spec, localize, OrbitSample
from symbext.lyapunov import lyapunov_spectrum, exterior_growth, log_plus_average, empirical_positive_sum
from symbext.entropy import (
    make_pool,
    topological_entropy_estimate,
    tail_entropy_estimate,
    local_entropy_rate,
    counts_table,
)
from symbext.combinatorics import count_admitting, combinatorial_bound_check, enumerate_admitting, enumerate_limits
from symbext.curves import local_volume_growth, oscillation_trim
from symbext.reparametrization import reparametrize_bowen_ball
from symbext.bounds import compute_bounds

__all__ = [
    "pipeline_names",
    "pipeline_params",
    "exit_codes",
    "RunResult",
    "make_curve",
    "validate_config",
    "load_config",
    "run_pipeline",
    "run_experiment",
]

log = logging.getLogger("symbext.experiments")

exit_codes = Namespace(ok=0, schema=1, precondition=2, budget=3)

pipeline_params = {
    "entropy": ("method", "pool", "n_range", "delta", "eps", "eps_ladder", "delta_ladder", "base_points", "x"),
    "lyapunov": ("x", "n", "method", "growth_n", "n_max"),
    "volume": ("x", "eps", "curve", "chi", "gamma", "C", "n_range", "radius"),
    "reparam": ("x", "eps", "curve", "chi", "gamma", "C", "n_range", "r", "workers"),
    "bounds": ("r", "entropy", "growth", "local_diffeo"),
    "oscille": ("curve",),
    "combi": ("n", "S"),
}
pipeline_names = tuple(pipeline_params)
needs_system = ("entropy", "lyapunov", "volume", "reparam", "bounds")
curve_kinds = ("segment", "polynomial", "circle", "eigen_segment")

# value kind of every pipeline parameter, shared across pipelines
param_kinds = {
    "method": "string",
    "pool": "object",
    "n_range": "integer list",
    "delta": "real",
    "eps": "real",
    "eps_ladder": "real list",
    "delta_ladder": "real list",
    "base_points": "integer",
    "x": "point",
    "n": "integer",
    "growth_n": "integer",
    "n_max": "integer",
    "curve": "object",
    "chi": "real",
    "gamma": "real",
    "C": "real",
    "radius": "real",
    "r": "real",
    "workers": "integer",
    "entropy": "object",
    "growth": "object",
    "local_diffeo": "boolean",
    "S": "integer",
}
nullable_params = ("chi", "entropy", "local_diffeo")

_precondition_errors = (PreconditionError, DomainError, UnsupportedSmoothnessError, DegenerateTangencyError)
_budget_errors = (BudgetExceededError, EscapeError)


@dataclass
class RunResult:
    code: int
    report: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    paths: list = field(default_factory=list)


def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


def _is_real(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


_kind_checks = {
    "integer": _is_int,
    "real": _is_real,
    "string": lambda v: isinstance(v, str),
    "boolean": lambda v: isinstance(v, bool),
    "object": lambda v: isinstance(v, dict),
    "point": lambda v: isinstance(v, list) and len(v) == dimension and all(_is_real(c) for c in v),
    "integer list": lambda v: isinstance(v, list) and bool(v) and all(_is_int(c) for c in v),
    "real list": lambda v: isinstance(v, list) and bool(v) and all(_is_real(c) for c in v),
}


def _check_param(key, value):
    if value is None and key in nullable_params:
        return None
    kind = param_kinds[key]
    if _kind_checks[kind](value):
        return None
    article = "an" if kind[0] in "aeiou" else "a"
    return "must be {0} {1}, got {2}".format(article, kind, json.dumps(value))


def _validate_pipeline(index, entry):
    path = "pipelines[{0}]".format(index)
    if not isinstance(entry, dict):
        return [(path, "must be an object")]
    errors = []
    name = entry.get("name")
    if name not in pipeline_names:
        errors.append((path + ".name", "must be one of {0}".format(", ".join(pipeline_names))))
        return errors
    if name in needs_system:
        system = entry.get("system")
        if not isinstance(system, dict):
            errors.append((path + ".system", "required object for pipeline '{0}'".format(name)))
        elif not isinstance(system.get("name"), str):
            errors.append((path + ".system.name", "required string"))
    params = entry.get("params", {})
    if not isinstance(params, dict):
        errors.append((path + ".params", "must be an object"))
        return errors
    for key, value in params.items():
        if key not in pipeline_params[name]:
            errors.append((path + ".params." + key, "unknown parameter for pipeline '{0}'".format(name)))
            continue
        problem = _check_param(key, value)
        if problem:
            errors.append((path + ".params." + key, problem))
    curve = params.get("curve")
    if curve is not None and (not isinstance(curve, dict) or curve.get("kind") not in curve_kinds):
        errors.append((path + ".params.curve.kind", "must be one of {0}".format(", ".join(curve_kinds))))
    return errors


def validate_config(data):
    """
    Check a config document against schema version 1.

    ... code:: python

        symbext.validate_config({"seed": 1, "pipelines": []})
        # [('pipelines', 'must be a non-empty list')]

    :param data: decoded JSON document
    :return: list of (field path, message), empty when valid
    """
    if not isinstance(data, dict):
        return [("$", "config must be a JSON object")]
    errors = []
    version = data.get("schema_version", defaults.schema_version)
    if version != defaults.schema_version:
        errors.append(("schema_version", "unsupported version {0}, expected {1}".format(version, defaults.schema_version)))
    seed = data.get("seed")
    if not _is_int(seed) or not 0 <= seed < 2**64:
        errors.append(("seed", "required integer in [0, 2^64)"))
    if "grid" in data and data["grid"] is not None and (not _is_int(data["grid"]) or data["grid"] < 2):
        errors.append(("grid", "must be an integer >= 2"))
    pipelines = data.get("pipelines")
    if not isinstance(pipelines, list) or not pipelines:
        errors.append(("pipelines", "must be a non-empty list"))
    else:
        for index, entry in enumerate(pipelines):
            errors.extend(_validate_pipeline(index, entry))
    for key in data:
        if key not in ("schema_version", "seed", "grid", "pipelines", "description"):
            errors.append((key, "unknown top level field"))
    return errors


def load_config(path):
    """
    Read and validate a config file.

    :param path: JSON config path
    :return: ConfigNamespace
    :raises SchemaError: with ``errors`` and, for syntax errors, ``line``
    """
    try:
        data = load_json(path)
    except json.JSONDecodeError as err:
        raise SchemaError(
            "Invalid JSON in {0}: {1}".format(path, err.msg), errors=[("$", err.msg)], line=err.lineno
        ) from err
    errors = validate_config(data)
    if errors:
        raise SchemaError(
            "Config {0} failed validation: {1}".format(path, "; ".join("{0}: {1}".format(*e) for e in errors)),
            errors=errors,
        )
    return ConfigNamespace(data)


def _unstable_direction(smooth_map, x, stable=False):
    values, vectors = np.linalg.eig(smooth_map.jacobian(np.asarray(x, dtype=float)))
    order = np.argsort(np.abs(values))
    column = order[0] if stable else order[-1]
    return np.real(vectors[:, column])


def make_curve(spec, smooth_map=None, x=None):
    """
    Build a Curve from a JSON curve spec.

    ... code:: python

        symbext.make_curve({"kind": "segment", "start": [-2, 0], "end": [2, 0]})
        symbext.make_curve({"kind": "eigen_segment", "direction": "unstable", "length": 0.5}, cat, [0.1, 0.2])

    ``eigen_segment`` takes an explicit direction or ``unstable`` / ``stable``,
    the eigenvectors of D_xT of largest and smallest modulus.
    """
    spec = dict(spec)
    kind = spec.get("kind")
    if kind == "segment":
        return Curve.segment(spec.get("start", (-1.0, 0.0)), spec.get("end", (1.0, 0.0)))
    if kind == "polynomial":
        if "coefficients" not in spec:
            raise DomainError("Polynomial curves need 'coefficients'")
        return Curve.polynomial(spec["coefficients"])
    if kind == "circle":
        return Curve.circle(spec.get("center", (0.0, 0.0)), spec.get("radius", 0.5))
    if kind == "eigen_segment":
        direction = spec.get("direction", "unstable")
        if direction in ("unstable", "stable"):
            if smooth_map is None or x is None:
                raise DomainError("Eigen directions need a system and a base point")
            direction = _unstable_direction(smooth_map, x, stable=direction == "stable")
        return Curve.eigen_segment(direction, spec.get("center", (0.0, 0.0)), spec.get("length", 1.0))
    raise DomainError("Unknown curve kind '{0}'".format(kind))


def _entropy(smooth_map, params, seed, grid):
    method = params.get("method", "separated")
    n_range = params.get("n_range", [1, 2, 3, 4])
    if method == "separated":
        pool = params.get("pool", {"kind": "grid", "size": grid or 200})
        estimate = topological_entropy_estimate(
            smooth_map, make_pool(smooth_map, pool, seed, n=max(n_range)), n_range, params.get("delta", 0.1)
        )
        return {"estimate": estimate.to_dict(), "pool": pool}, {"counts": counts_table(estimate)}
    if method == "tail":
        pool = params.get("pool", {"kind": "local", "size": 2000})
        estimates = tail_entropy_estimate(
            smooth_map,
            params.get("eps_ladder", [0.1, 0.05, 0.02]),
            n_range,
            params.get("delta_ladder", [0.01, 0.005]),
            pool,
            seed=seed,
            base_points=params.get("base_points", 4),
        )
        rows = [["eps", "value", "n", "count"]]
        for estimate in estimates:
            rows.extend([estimate.eps, estimate.value, n, c] for n, c in zip(estimate.n_range, estimate.counts))
        return {"estimates": [e.to_dict() for e in estimates], "pool": pool}, {"tail": rows}
    if method == "local":
        pool = params.get("pool", {"kind": "random", "size": 5000})
        x = np.asarray(params.get("x", (0.1, 0.2)), dtype=float)
        F = make_pool(smooth_map, pool, seed, n=max(n_range))
        estimate = local_entropy_rate(smooth_map, x, F, n_range, params.get("delta", 0.01), params.get("eps", 0.05))
        return {"estimate": estimate.to_dict(), "pool": pool}, {"counts": counts_table(estimate)}
    raise DomainError("Unknown entropy method '{0}'".format(method))


def _lyapunov(smooth_map, params, seed, grid):
    x = np.asarray(params.get("x", (0.1, 0.2)), dtype=float)
    report = lyapunov_spectrum(smooth_map, x, params.get("n", 200), params.get("method", "exterior_power"))
    growth_n = params.get("growth_n", 10)
    growth = [exterior_growth(smooth_map, e, growth_n, grid or defaults.map_grid) for e in (1, 2)]
    n_max = params.get("n_max", defaults.n_max)
    sample = OrbitSample.from_orbit(smooth_map, x, report.n_used)
    positive = [empirical_positive_sum(sample, e, n_max) for e in (1, 2)]
    result = {
        "spectrum": report.to_dict(),
        "log_plus_average": log_plus_average(smooth_map, x, report.n_used),
        "growth": [g.to_dict() for g in growth],
        "positive_sums": [p.to_dict() for p in positive],
    }
    rows = [["n", "chi_1", "chi_2"]] + [[k, a, b] for k, (a, b) in enumerate(report.convergence_trace, start=1)]
    return result, {"trace": rows}


def _growth_setup(smooth_map, params):
    x = np.asarray(params.get("x", (0.1, 0.2)), dtype=float)
    eps = params.get("eps", 0.05)
    curve = make_curve(params.get("curve", {"kind": "eigen_segment", "direction": "unstable", "length": 0.5}),
                       smooth_map, x)
    chi = params.get("chi")
    if chi is None:
        chi = lyapunov_spectrum(smooth_map, x, 200).chi1_plus
    return x, eps, curve, chi, params.get("gamma", 0.1), params.get("C", 2.0)


def _volume(smooth_map, params, seed, grid):
    x, eps, curve, chi, gamma, C = _growth_setup(smooth_map, params)
    n_range = params.get("n_range", [1, 2, 3, 4, 5])
    maps = localize(smooth_map, x, max(n_range), eps)
    reports = [local_volume_growth(maps, curve, chi, gamma, C, n, params.get("radius", 1.0), grid) for n in n_range]
    rows = [["n", "inner_length", "outer_length", "unrestricted_length"]]
    rows.extend([v.n, v.inner_length, v.outer_length, v.unrestricted_length] for v in reports)
    return {"chi": chi, "gamma": gamma, "C": C, "eps": eps, "growth": [v.to_dict() for v in reports]}, {"volume": rows}


def _reparam(smooth_map, params, seed, grid):
    x, eps, curve, chi, gamma, C = _growth_setup(smooth_map, params)
    r = params.get("r", min(smooth_map.smoothness_r, 2.0))
    results = []
    rows = [["n", "count", "log_count", "log_bound", "holds", "cover_misses"]]
    for n in params.get("n_range", [1, 2, 3, 4]):
        result = reparametrize_bowen_ball(smooth_map, x, curve, chi, gamma, C, n, eps, r, grid,
                                          params.get("workers", 1))
        results.append(result.to_dict())
        rows.append([n, result.family.count, result.family.log_count, result.log_bound, result.holds,
                     result.cover_misses])
    return {"chi": chi, "gamma": gamma, "C": C, "eps": eps, "r": r, "families": results}, {"charts": rows}


def _bounds(smooth_map, params, seed, grid):
    growth = dict(params.get("growth", {}))
    if grid:
        growth.setdefault("grid", grid)
    report = compute_bounds(
        smooth_map,
        params.get("r", smooth_map.smoothness_r),
        params.get("entropy"),
        growth,
        params.get("local_diffeo"),
        seed=seed,
    )
    data = report.to_dict()
    rows = [["bound", "value"]] + [[k, v] for k, v in sorted(data["bounds"].items())]
    return data, {"bounds": rows}


def _oscille(smooth_map, params, seed, grid):
    curve = make_curve(params.get("curve", {"kind": "segment", "start": [-2.0, 0.0], "end": [2.0, 0.0]}))
    a, b, certificate = oscillation_trim(curve, grid=grid)
    return {"a": a, "b": b, "certificate": certificate.to_dict()}, {}


def _combi(smooth_map, params, seed, grid):
    n, S = params.get("n", 2), params.get("S", 2)
    check = combinatorial_bound_check(n, S)
    result = {
        "n": n,
        "S": S,
        "count": count_admitting(n, S),
        "log_count": check.log_count,
        "bound": check.bound,
        "holds": check.holds,
    }
    tables = {}
    if n <= enumerate_limits.n and S <= enumerate_limits.S:
        sequences = enumerate_admitting(n, S)
        result["enumerated"] = len(sequences)
        tables["sequences"] = [["k_{0}".format(i + 1) for i in range(n)]] + [list(s) for s in sequences]
    return result, tables


_pipelines = {
    "entropy": _entropy,
    "lyapunov": _lyapunov,
    "volume": _volume,
    "reparam": _reparam,
    "bounds": _bounds,
    "oscille": _oscille,
    "combi": _combi,
}


@log_exception(log="symbext.experiments", exceptions=(SymbextError,), level=logging.DEBUG)
def run_pipeline(name, spec, seed=0, grid=None):
    """
    Run one pipeline.

    :param name: pipeline name
    :param spec: pipeline entry with ``system`` and ``params``
    :param seed: seed for every random draw of the pipeline
    :param grid: global grid override
    :return: (result dict, tables dict of name -> rows)
    """
    if name not in _pipelines:
        raise DomainError("Unknown pipeline '{0}'".format(name))
    spec = dict(spec or {})
    smooth_map = system_from_spec(spec["system"]) if spec.get("system") else None
    if name in needs_system and smooth_map is None:
        raise DomainError("Pipeline '{0}' needs a system".format(name))
    log.info("Running pipeline '{0}'".format(name))
    return _pipelines[name](smooth_map, dict(spec.get("params") or {}), seed, grid)


def _table_names(pipelines):
    seen = {}
    for entry in pipelines:
        name = entry["name"]
        seen[name] = seen.get(name, 0) + 1
        yield name if seen[name] == 1 else "{0}{1}".format(name, seen[name])


def _exit_code(err):
    if isinstance(err, SchemaError):
        return exit_codes.schema
    if isinstance(err, _budget_errors):
        return exit_codes.budget
    return exit_codes.precondition


def _error_dict(err):
    data = {"type": type(err).__name__, "message": str(err)}
    for attribute in ("hypothesis", "index", "errors", "line", "diagnostics"):
        value = getattr(err, attribute, None)
        if value is not None:
            data[attribute] = value
    return data


def run_experiment(config_path, out_dir=None, seed=None, grid=None):
    """
    Run every pipeline of a config file and write the report bundle.

    ... code:: python

        result = symbext.run_experiment("configs/cat_bounds.json", "out")
        result.code  # 0

    :param config_path: JSON config path
    :param out_dir: output directory, nothing is written when None
    :param seed: override of the config seed
    :param grid: override of the config grid
    :return: RunResult, ``code`` 0 ok, 1 schema, 2 precondition, 3 budget
    """
    started = datetime.datetime.now(datetime.timezone.utc)
    try:
        config = load_config(config_path)
    except SchemaError as err:
        for path, message in err.errors:
            log.error("{0}: {1}".format(path, message))
        return RunResult(exit_codes.schema, {"status": "schema_error", "error": _error_dict(err)})

    seed = config.int("seed") if seed is None else seed
    grid = config.get("grid") if grid is None else grid
    report = {
        "schema_version": defaults.schema_version,
        "report_version": defaults.report_version,
        "seed": seed,
        "grid": grid,
        "pipelines": [],
    }
    tables, timings = {}, []
    code = exit_codes.ok
    for label, entry in zip(_table_names(config.pipelines), config.pipelines):
        entry = entry.to_dict() if isinstance(entry, Namespace) else dict(entry)
        timed = time_it(log="symbext.experiments", message=label + " took {seconds:.2f} s", append=timings)
        try:
            result, pipeline_tables = timed(run_pipeline)(entry["name"], entry, seed, grid)
        except SymbextError as err:
            code = _exit_code(err)
            log.error("Pipeline '{0}' failed: {1}".format(label, err))
            report["pipelines"].append({"name": entry["name"], "label": label, "error": _error_dict(err)})
            break
        report["pipelines"].append(
            {
                "name": entry["name"],
                "label": label,
                "system": entry.get("system"),
                "params": entry.get("params", {}),
                "result": result,
            }
        )
        for table, rows in pipeline_tables.items():
            tables["{0}_{1}".format(label, table)] = rows
    report["status"] = "ok" if code == exit_codes.ok else "error"
    report = json_ready(report)

    paths = []
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        report_path = os.path.join(out_dir, "report.json")
        save_json(report, report_path, sort_keys=True)
        paths.append(report_path)
        for table, rows in sorted(tables.items()):
            table_path = os.path.join(out_dir, "{0}.csv".format(table))
            list_to_csv(rows, table_path)
            paths.append(table_path)
        metadata_path = os.path.join(out_dir, "run_metadata.json")
        save_json(
            {
                "started": started.isoformat(),
                "finished": datetime.datetime.now(datetime.timezone.utc).isoformat(),
                "durations": dict(zip(_table_names(config.pipelines), timings)),
                "config": os.path.abspath(config_path),
                "config_sha256": file_hash(config_path),
                "python": platform.python_version(),
                "numpy": np.__version__,
            },
            metadata_path,
            sort_keys=True,
        )
        paths.append(metadata_path)
    return RunResult(code, report, tables, paths)
