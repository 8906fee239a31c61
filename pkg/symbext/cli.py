#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# Part of the Symbext package.
#
# Copyright (c) 2025 - Symbext Developers - MIT License
"""Command line front end, every subcommand routes through run_experiment."""
from __future__ import absolute_import
import os
import sys
import json
import logging
import argparse
import tempfile

from symbext.shared_variables import defaults
from symbext.file_operations import save_json
from symbext.log import setup_run_logging
from symbext.experiments import pipeline_names, needs_system, run_experiment

__all__ = ["build_parser", "parse_param", "config_from_args", "main"]

log = logging.getLogger("symbext.cli")


def parse_param(text):
    """
    Parse ``key=value`` with the value read as JSON when possible.

    ... code:: python

        parse_param("n_range=[1,2,3,4]")
        # ('n_range', [1, 2, 3, 4])
    """
    if "=" not in text:
        raise argparse.ArgumentTypeError("Parameters take the form key=value, got '{0}'".format(text))
    key, value = text.split("=", 1)
    try:
        return key.strip(), json.loads(value)
    except json.JSONDecodeError:
        return key.strip(), value


def build_parser():
    parser = argparse.ArgumentParser(prog="symbext", description="Numerical lab for C^r surface dynamics")
    parser.add_argument("--out", default=None, help="directory for report.json and CSV tables")
    parser.add_argument("--seed", type=int, default=None, help="seed for every random draw, 0 for subcommands")
    parser.add_argument("--grid", type=int, default=None, help="global grid size override")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--log-file", default=None, help="also log to this file")

    commands = parser.add_subparsers(dest="command", required=True)
    for name in pipeline_names:
        sub = commands.add_parser(name, help="run the {0} pipeline".format(name))
        if name in needs_system:
            sub.add_argument("--system", default="cat", help="builtin system name")
            sub.add_argument("--system-param", action="append", type=parse_param, default=[], metavar="KEY=VALUE")
            sub.add_argument("--r", type=float, default=None, help="declared smoothness of the system")
        sub.add_argument("--param", action="append", type=parse_param, default=[], metavar="KEY=VALUE")
    run = commands.add_parser("run", help="run a JSON config file")
    run.add_argument("config", help="path to the config file")
    return parser


def config_from_args(args):
    """One pipeline config built from subcommand arguments"""
    entry = {"name": args.command, "params": dict(args.param)}
    if args.command in needs_system:
        system = {"name": args.system, "params": dict(args.system_param)}
        if args.r is not None:
            system["r"] = args.r
        entry["system"] = system
    seed = 0 if args.seed is None else args.seed
    config = {"schema_version": defaults.schema_version, "seed": seed, "pipelines": [entry]}
    if args.grid is not None:
        config["grid"] = args.grid
    return config


def main(argv=None):
    args = build_parser().parse_args(argv)
    setup_run_logging(args.log_level, args.log_file)

    if args.command == "run":
        result = run_experiment(args.config, args.out, seed=args.seed, grid=args.grid)
    else:
        config = config_from_args(args)
        with tempfile.TemporaryDirectory() as scratch:
            target = args.out or scratch
            os.makedirs(target, exist_ok=True)
            config_path = os.path.join(target, "config.json")
            save_json(config, config_path, sort_keys=True)
            result = run_experiment(config_path, args.out)

    json.dump(result.report, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    log.debug("Exit code {0}".format(result.code))
    return result.code


if __name__ == "__main__":
    sys.exit(main())
