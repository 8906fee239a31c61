#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# Part of the Symbext package.
#
# Copyright (c) 2025 - Symbext Developers - MIT License
import os
import csv
import json
import math
import hashlib
import logging

import numpy as np

from symbext.namespace import ProtectedDict
from symbext.shared_variables import constants_file

__all__ = [
    "load_json",
    "save_json",
    "list_to_csv",
    "csv_to_list",
    "file_hash",
    "json_ready",
    "load_constants",
]

log = logging.getLogger("symbext.file_operations")


def json_ready(data):
    """
    Convert numpy scalars and arrays, tuples and non finite floats into
    plain JSON values. Infinities and NaN become the strings "inf", "-inf"
    and "nan" so reports stay strict JSON.

    :param data: nested structure of dicts, lists and numbers
    :return: structure safe for json.dump
    """
    if isinstance(data, dict):
        return {str(k): json_ready(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [json_ready(v) for v in data]
    if isinstance(data, np.ndarray):
        return json_ready(data.tolist())
    if isinstance(data, (bool, np.bool_)):
        return bool(data)
    if isinstance(data, (int, np.integer)):
        return int(data)
    if isinstance(data, (float, np.floating)):
        value = float(data)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return data


def list_to_csv(my_list, csv_file):
    """
    Save a matrix (list of lists) to a file as a CSV

    ... code:: python

        rows = [["n", "count"], [1, 4], [2, 16]]
        symbext.list_to_csv(rows, "entropy_counts.csv")

    entropy_counts.csv

    ... code:: csv

        "n","count"
        "1","4"
        "2","16"

    :param my_list: list of lists to save to CSV
    :param csv_file: File to save data to
    """
    with open(csv_file, "w", newline="") as csv_handler:
        writer = csv.writer(csv_handler, delimiter=",", quoting=csv.QUOTE_ALL)
        writer.writerows(json_ready(my_list))


def csv_to_list(csv_file):
    """
    Open and transform a CSV file into a matrix (list of lists).

    :param csv_file: Path to CSV file as str
    :return: list
    """
    with open(csv_file, "r", newline="") as f:
        return list(csv.reader(f))


def load_json(json_file, **kwargs):
    """
    Open and load data from a JSON file

    :param json_file: Path to JSON file as string
    :param kwargs: Additional arguments for the json.load command
    :return: Dictionary
    """
    with open(json_file) as f:
        return json.load(f, **kwargs)


def save_json(data, json_file, indent=4, **kwargs):
    """
    Takes a dictionary and saves it to a file as JSON. Numpy values are
    converted first, see :func:`json_ready`.

    :param data: dictionary to save as JSON
    :param json_file: Path to save file location as str
    :param indent: Format the JSON file with so many numbers of spaces
    :param kwargs: Additional arguments for the json.dump command
    """
    with open(json_file, "w") as f:
        json.dump(json_ready(data), f, indent=indent, allow_nan=False, **kwargs)
        f.write("\n")


def file_hash(path, hash_type="sha256", block_size=65536, hex_digest=True):
    """
    Hash a given file and return the hex digest, used to tie run metadata
    to the exact config file that produced it.

    :param path: location of the file to hash
    :param hash_type: string name of the hash to use
    :param block_size: amount of bytes to add to hasher at a time
    :param hex_digest: returned as hexdigest, false will return digest
    :return: file's hash
    """
    hashed = hashlib.new(hash_type)
    with open(path, "rb") as infile:
        buf = infile.read(block_size)
        while len(buf) > 0:
            hashed.update(buf)
            buf = infile.read(block_size)
    return hashed.hexdigest() if hex_digest else hashed.digest()


def load_constants(path=None):
    """
    Load the versioned table of calibrated constants.

    ... code:: python

        constants = symbext.load_constants()
        constants["C_cal"]["2,2"]
        # 4.0

    :param path: alternate constants file, defaults to the packaged one
    :return: read only ProtectedDict
    """
    path = path or constants_file
    if not os.path.exists(path):
        raise FileNotFoundError("Constants file not found: {0}".format(path))
    data = load_json(path)
    log.debug("Loaded constants version {0} from {1}".format(data.get("version"), path))
    return ProtectedDict(data)
