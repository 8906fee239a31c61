#!/usr/bin/env python
# -*- coding: utf-8 -*-
import io
import os
import logging

from .common_test_data import BaseTestClass, test_root

from symbext import (
    setup_logger,
    setup_run_logging,
    get_stream_handler,
    remove_all_handlers,
    remove_file_handlers,
    log_formats,
)

run_log = os.path.join(test_root, "test_run.log")
name = "symbext.test_log"


class TestLogging(BaseTestClass):
    def setUp(self):
        remove_all_handlers(name)
        if os.path.exists(run_log):
            os.unlink(run_log)

    @classmethod
    def tearDownClass(cls):
        remove_all_handlers(name)
        remove_all_handlers("symbext")
        super(TestLogging, cls).tearDownClass()

    def test_stream_logger(self):
        stream = io.StringIO()
        logger = setup_logger(name, stream=stream)
        logger.info("Pool of 100 points")
        logger.error("Pipeline failed")
        lines = stream.getvalue().splitlines()
        assert "INFO" in lines[0]
        assert "ERROR" in lines[1] and "Pipeline failed" in lines[1]

    def test_file_logger(self):
        logger = setup_logger(name, level=logging.WARNING, stream=None, file_path=run_log)
        logger.info("hidden")
        logger.warning("Chart still fails")
        remove_file_handlers(logger)
        assert logger.handlers == []
        with open(run_log) as f:
            content = f.read()
        assert "Chart still fails" in content
        assert "hidden" not in content

    def test_silent_by_default(self):
        logger = setup_logger(name, stream=None)
        setup_logger(name, stream=None)
        assert len(logger.handlers) == 1
        assert isinstance(logger.handlers[0], logging.NullHandler)

    def test_remove_file_handlers_keeps_streams(self):
        logger = setup_logger(name, stream=None, file_path=run_log)
        logger.addHandler(get_stream_handler(io.StringIO(), log_format=log_formats.pooled))
        remove_file_handlers(logger)
        assert len(logger.handlers) == 1
        assert not isinstance(logger.handlers[0], logging.FileHandler)
        remove_all_handlers(logger)
        assert logger.handlers == []

    def test_run_logging_replaces_handlers(self):
        stream = io.StringIO()
        setup_run_logging("DEBUG", stream=stream)
        logger = setup_run_logging("WARNING", file_path=run_log, stream=stream)
        assert len(logger.handlers) == 2
        assert not logger.propagate
        logging.getLogger("symbext.entropy").info("not shown")
        logging.getLogger("symbext.entropy").warning("shown once")
        assert stream.getvalue().count("shown once") == 1
        assert "not shown" not in stream.getvalue()
        assert setup_run_logging("chatty", stream=None).level == logging.INFO
