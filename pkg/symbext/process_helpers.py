#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# Part of the Symbext package.
#
# Copyright (c) 2025 - Symbext Developers - MIT License
import logging
from multiprocessing import pool
from functools import partial

__all__ = ["run_in_pool"]

log = logging.getLogger("symbext.process_helpers")


def run_in_pool(target, iterable, threaded=True, processes=4, target_kwargs=None):
    """
    Map a function over base points, defect classes or grid chunks in a
    thread or process pool. Results come back in the order of ``iterable``
    so sweeps stay deterministic.

    ... code: python

        symbext.run_in_pool(estimate_at_point, base_points, target_kwargs={"eps": 0.05})

    :param target: function to run
    :param iterable: positional arg to pass to function
    :param threaded: ThreadPool if True, process Pool if False
    :param processes: number of workers
    :param target_kwargs: keyword arguments bound to the function as a partial
    :return: list of results
    """
    items = list(iterable)
    if target_kwargs:
        target = partial(target, **target_kwargs)
    if processes <= 1 or len(items) <= 1:
        return [target(item) for item in items]

    workers = pool.ThreadPool if threaded else pool.Pool
    log.debug("Mapping {0} items over {1} {2}".format(len(items), processes, "threads" if threaded else "processes"))
    p = workers(processes)
    try:
        return p.map(target, items)
    finally:
        p.close()
        p.join()
