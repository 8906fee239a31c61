#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# Part of the Symbext package.
#
# Copyright (c) 2025 - Symbext Developers - MIT License
"""
Logging setup for experiment runs. Library modules only log to their own
``symbext.*`` loggers, handlers are attached by the command line runner or
by the caller.
"""
import logging
import sys

from symbext.namespace import Namespace

__all__ = [
    "log_formats",
    "setup_logger",
    "get_file_handler",
    "get_stream_handler",
    "remove_all_handlers",
    "remove_file_handlers",
    "setup_run_logging",
]

log_formats = Namespace(
    {
        "run": "%(asctime)s - %(name)-20s %(levelname)-8s %(message)s",
        "pooled": "%(relativeCreated)8d %(threadName)s : %(name)-20s %(levelname)-8s %(message)s",
    }
)


def _as_logger(logger):
    return logger if isinstance(logger, logging.Logger) else logging.getLogger(logger)


def _formatted(handler, level, log_format):
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(log_format))
    return handler


def get_stream_handler(stream=sys.stderr, level=logging.INFO, log_format=log_formats.run):
    """Stream handler with the run format, stderr by default."""
    return _formatted(logging.StreamHandler(stream), level, log_format)


def get_file_handler(file_path="symbext.log", level=logging.INFO, log_format=log_formats.run, **handler_kwargs):
    """
    File handler for a run log, usually placed next to ``report.json``.

    :param file_path: file to write the log to
    :param level: handler level
    :param log_format: format string
    :param handler_kwargs: passed on to ``logging.FileHandler`` (mode, encoding)
    :return: handler
    """
    return _formatted(logging.FileHandler(file_path, **handler_kwargs), level, log_format)


def setup_logger(module_name=None, level=logging.INFO, stream=sys.stderr, file_path=None, log_format=log_formats.run):
    """
    Attach a stream and/or file handler to a logger. With neither, a
    NullHandler is added once so library users see no warnings.

    .. code:: python

        log = symbext.setup_logger("symbext.entropy", level=logging.DEBUG)
        log.debug("Pool of 400 points")

    :param module_name: logger name
    :param level: level for the logger and its new handlers
    :param stream: stream to log to, or None
    :param file_path: file to log to, or None
    :param log_format: format for the new handlers
    :return: configured logger
    """
    logger = logging.getLogger(module_name)
    if stream:
        logger.addHandler(get_stream_handler(stream, level, log_format))
    if file_path:
        logger.addHandler(get_file_handler(file_path, level, log_format))
    if not (stream or file_path or logger.handlers):
        logger.addHandler(logging.NullHandler())
    if level > 0:
        logger.setLevel(level)
    return logger


def remove_file_handlers(logger=None):
    """Close and drop every file handler of the logger."""
    logger = _as_logger(logger)
    for handler in logger.handlers:
        if isinstance(handler, logging.FileHandler):
            handler.close()
    logger.handlers = [h for h in logger.handlers if not isinstance(h, logging.FileHandler)]


def remove_all_handlers(logger=None):
    logger = _as_logger(logger)
    remove_file_handlers(logger)
    logger.handlers = []


def setup_run_logging(level="INFO", file_path=None, stream=sys.stderr):
    """
    Configure the ``symbext`` logger for one command line run. Existing
    handlers are replaced so repeated runs in one process do not duplicate
    output. Unknown level names fall back to INFO.

    :param level: level name or number
    :param file_path: optional log file next to the run outputs
    :param stream: stream for console output, or None
    :return: the configured ``symbext`` logger
    """
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.INFO
    remove_all_handlers("symbext")
    run_logger = setup_logger("symbext", level=level, stream=stream, file_path=file_path)
    run_logger.propagate = False
    return run_logger
