#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# Part of the Symbext package.
#
# Copyright (c) 2025 - Symbext Developers - MIT License
from __future__ import absolute_import
import math as _math
import os as _os
import sys as _sys

from symbext.namespace import Namespace

__all__ = [
    "python_version",
    "dimension",
    "defaults",
    "package_root",
    "constants_file",
    "SymbextError",
    "DomainError",
    "EscapeError",
    "UnsupportedSmoothnessError",
    "PreconditionError",
    "BudgetExceededError",
    "DegenerateTangencyError",
    "SchemaError",
]

python_version = _sys.version_info[0:3]
package_root = _os.path.abspath(_os.path.dirname(__file__))
constants_file = _os.path.join(package_root, "data", "constants.json")

# Every system in the lab is a surface
dimension = 2

defaults = Namespace(
    {
        "safe_radius": 0.25,
        "fd_step": 1e-5,
        "fd_tolerance": 1e-5,
        "snap_tolerance": 1e-12,
        "verify_tolerance": 1e-6,
        "degenerate_length": 1e-14,
        "bisection_tolerance": 1e-12,
        "curve_grid": 10**4,
        "map_grid": 10**3,
        "chart_samples": 65,
        "direction_samples": 64,
        "holder_steps": (1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625, 1e-2, 1e-3, 1e-4),
        "n_max": 64,
        "refine_depth": 40,
        "sparse_ball": 10,
        "exact_pool_limit": 24,
        "sublevel_ratio": 1.0 / (12.0 * _math.e),
        "schema_version": 1,
        "report_version": 1,
    }
)


class SymbextError(Exception):
    """Symbext specific exception"""


class DomainError(SymbextError, ValueError):
    """An argument lies outside the mathematical domain of the operation"""


class EscapeError(SymbextError):
    """An orbit left its domain, ``index`` is the first escaping orbit index"""

    def __init__(self, message, index=None):
        super(EscapeError, self).__init__(message)
        self.index = index


class UnsupportedSmoothnessError(SymbextError):
    """Requested regularity exceeds what the object carries"""


class PreconditionError(SymbextError):
    """A hypothesis of an operation failed, ``hypothesis`` names which one"""

    def __init__(self, message, hypothesis=None):
        super(PreconditionError, self).__init__(message)
        self.hypothesis = hypothesis


class BudgetExceededError(SymbextError):
    """A counting or covering budget was exceeded"""

    def __init__(self, message, diagnostics=None):
        super(BudgetExceededError, self).__init__(message)
        self.diagnostics = Namespace(diagnostics or {})


class DegenerateTangencyError(SymbextError):
    """The derivative of an iterated curve vanished at step ``index``"""

    def __init__(self, message, index=None):
        super(DegenerateTangencyError, self).__init__(message)
        self.index = index


class SchemaError(SymbextError):
    """Configuration did not validate, ``errors`` holds (field, message) pairs"""

    def __init__(self, message, errors=None, line=None):
        super(SchemaError, self).__init__(message)
        self.errors = list(errors or [])
        self.line = line
