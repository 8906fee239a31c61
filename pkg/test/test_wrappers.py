#!/usr/bin/env python
# -*- coding: utf-8 -*-
import io
import math
import logging

import pytest

from .common_test_data import BaseTestClass

from symbext import (
    time_it,
    catch_it,
    log_exception,
    capped_exp,
    setup_logger,
    remove_all_handlers,
    EscapeError,
)

name = "symbext.test_wrappers"


class TestWrappers(BaseTestClass):
    def setUp(self):
        self.stream = io.StringIO()
        setup_logger(name, stream=self.stream, level=logging.DEBUG)

    def tearDown(self):
        remove_all_handlers(name)

    def test_time_it_appends(self):
        timings = []

        @time_it(log=name, message="{func} took {seconds:.2f} s", append=timings)
        def orbit_sum(n):
            return sum(range(n))

        assert orbit_sum(10) == 45
        assert len(timings) == 1 and timings[0] >= 0
        assert "orbit_sum took" in self.stream.getvalue()

    def test_time_it_on_failure(self):
        timings = []

        @time_it(log=name, append=timings)
        def fails():
            raise EscapeError("left the box", 2)

        with pytest.raises(EscapeError):
            fails()
        assert len(timings) == 1
        assert "fails took" in self.stream.getvalue()

    def test_catch_it(self):
        @catch_it(exceptions=(EscapeError,), default=float("nan"))
        def escapes(x):
            raise EscapeError("orbit of {0} left the box".format(x), 1)

        assert math.isnan(escapes(3.9))
        assert escapes.__name__ == "escapes"
        with pytest.raises(ValueError):
            catch_it(exceptions=(EscapeError,))(math.sqrt)(-1.0)
        assert capped_exp(1e6) == math.inf
        assert capped_exp(0.0) == 1.0

    def test_log_exception(self):
        @log_exception(log=name, exceptions=(EscapeError,), level=logging.DEBUG)
        def broken():
            raise EscapeError("bad grid", 0)

        with pytest.raises(EscapeError):
            broken()
        text = self.stream.getvalue()
        assert "broken raised EscapeError: bad grid" in text
        assert "Traceback" in text

        @log_exception(log=name, exceptions=(EscapeError,))
        def other():
            raise ValueError("bad delta")

        with pytest.raises(ValueError):
            other()
        assert "bad delta" not in self.stream.getvalue()
