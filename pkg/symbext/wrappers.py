#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# Part of the Symbext package.
#
# Copyright (c) 2025 - Symbext Developers - MIT License
import time
from functools import wraps
import logging

__all__ = ["time_it", "catch_it", "log_exception"]

log = logging.getLogger("symbext.wrappers")


def _logger(name):
    return logging.getLogger(name) if isinstance(name, str) else (name or log)


def time_it(log=None, message="{func} took {seconds:.3f} s", append=None):
    """
    Wrapper. Log the wall time of every call at INFO level and optionally
    collect it, pipelines use this to fill the ``timings`` section of the
    run metadata. Failed calls are timed too.

    .. code:: python

        timings = []

        @symbext.time_it(log="symbext.experiments", message="{func} took {seconds:.2f} s", append=timings)
        def run_pipeline(config):
            ...

    :param log: logger or logger name, ``symbext.wrappers`` by default
    :param message: format string with ``{func}`` and ``{seconds}``
    :param append: list collecting the elapsed seconds
    """
    logger = _logger(log)

    def func_wrapper(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            start = time.perf_counter()
            try:
                return func(*args, **kwargs)
            finally:
                elapsed = time.perf_counter() - start
                logger.info(message.format(func=func.__name__, seconds=elapsed))
                if append is not None:
                    append.append(elapsed)

        return wrapper

    return func_wrapper


def log_exception(log="symbext", exceptions=(Exception,), level=logging.ERROR):
    """
    Wrapper. Log matching exceptions with their traceback, then re-raise.

    :param log: logger or logger name
    :param exceptions: exception types to log
    :param level: logging level of the record
    """
    logger = _logger(log)

    def func_wrapper(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except exceptions as err:
                logger.log(level, "{0} raised {1}: {2}".format(func.__name__, type(err).__name__, err), exc_info=True)
                raise

        return wrapper

    return func_wrapper


def catch_it(exceptions=(Exception,), default=None):
    """
    Wrapper. Return ``default`` instead of raising one of ``exceptions``.

    .. code:: python

        capped_exp = symbext.catch_it(exceptions=(OverflowError,), default=math.inf)(math.exp)
        capped_exp(1e6)  # inf
    """

    def func_wrapper(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except exceptions:
                return default

        return wrapper

    return func_wrapper
