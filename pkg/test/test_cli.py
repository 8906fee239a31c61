#!/usr/bin/env python
# -*- coding: utf-8 -*-
import io
import os
import json
import argparse
import contextlib

import pytest

from .common_test_data import BaseTestClass, test_root, run_output, combi_config, empty_config

from symbext.cli import build_parser, parse_param, config_from_args, main
from symbext import remove_all_handlers


def run_main(argv):
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = main(argv)
    return code, json.loads(out.getvalue())


class TestCLI(BaseTestClass):
    log_file = os.path.join(test_root, "test_run.log")

    @classmethod
    def tearDownClass(cls):
        remove_all_handlers("symbext")
        super(TestCLI, cls).tearDownClass()

    def test_parse_param(self):
        assert parse_param("n=2") == ("n", 2)
        assert parse_param("x=[0.1, 0.2]") == ("x", [0.1, 0.2])
        assert parse_param("method=tail") == ("method", "tail")
        assert parse_param("curve={\"kind\": \"circle\"}") == ("curve", {"kind": "circle"})
        with pytest.raises(argparse.ArgumentTypeError):
            parse_param("n")

    def test_config_from_args(self):
        args = build_parser().parse_args(
            [
                "--grid", "50",
                "entropy",
                "--system", "doubling2d",
                "--system-param", "a=3",
                "--r", "2.5",
                "--param", "delta=0.2",
            ]
        )
        config = config_from_args(args)
        assert config["grid"] == 50
        assert config["seed"] == 0
        assert config["pipelines"] == [
            {
                "name": "entropy",
                "params": {"delta": 0.2},
                "system": {"name": "doubling2d", "params": {"a": 3}, "r": 2.5},
            }
        ]

    def test_combi_command(self):
        out = os.path.join(run_output, "cli_combi")
        code, report = run_main(["--out", out, "--log-level", "WARNING", "combi", "--param", "n=2", "--param", "S=2"])
        assert code == 0
        assert report["status"] == "ok"
        assert report["pipelines"][0]["result"]["count"] == 6
        for name in ("config.json", "report.json", "combi_sequences.csv", "run_metadata.json"):
            assert os.path.exists(os.path.join(out, name))

    def test_command_without_out(self):
        code, report = run_main(["--seed", "3", "--log-level", "ERROR", "oscille"])
        assert code == 0
        assert report["seed"] == 3

    def test_run_command(self):
        code, report = run_main(["--log-file", self.log_file, "run", combi_config])
        assert code == 0
        assert report["seed"] == 7
        with open(self.log_file) as f:
            assert "Running pipeline 'combi'" in f.read()

    def test_run_seed_zero_overrides(self):
        code, report = run_main(["--seed", "0", "--log-level", "ERROR", "run", combi_config])
        assert code == 0
        assert report["seed"] == 0

    def test_run_schema_error(self):
        code, report = run_main(["--log-level", "ERROR", "run", empty_config])
        assert code == 1
        assert report["status"] == "schema_error"

    def test_precondition_exit_code(self):
        code, report = run_main(
            ["--log-level", "ERROR", "oscille", "--param", "curve={\"kind\": \"circle\", \"radius\": 0.5}"]
        )
        assert code == 2
        assert report["pipelines"][0]["error"]["hypothesis"] == "oscillation"
