#!/usr/bin/env python
# -*- coding: utf-8 -*-
import os
import json
import math
import hashlib

import numpy as np
import pytest

from .common_test_data import BaseTestClass, run_output, combi_config

from symbext import (
    json_ready,
    save_json,
    load_json,
    list_to_csv,
    csv_to_list,
    file_hash,
    load_constants,
    run_in_pool,
)


def square(x, offset=0):
    return x * x + offset


class TestFileOperations(BaseTestClass):
    @classmethod
    def setUpClass(cls):
        os.makedirs(run_output, exist_ok=True)

    def test_json_ready(self):
        data = {
            "counts": np.array([4, 16]),
            "value": np.float64(0.5),
            "holds": np.bool_(True),
            "bounds": (math.inf, -math.inf, math.nan),
            1: np.int64(3),
        }
        assert json_ready(data) == {
            "counts": [4, 16],
            "value": 0.5,
            "holds": True,
            "bounds": ["inf", "-inf", "nan"],
            "1": 3,
        }
        assert type(json_ready(np.int64(3))) is int

    def test_save_json_is_strict(self):
        path = os.path.join(run_output, "strict.json")
        save_json({"bound": math.inf, "n": np.arange(3)}, path, sort_keys=True)
        with open(path) as f:
            text = f.read()
        assert text.endswith("}\n")
        assert "Infinity" not in text
        assert load_json(path) == {"bound": "inf", "n": [0, 1, 2]}

    def test_csv(self):
        path = os.path.join(run_output, "counts.csv")
        list_to_csv([["n", "count", "value"], [1, 4, math.nan], [2, 16, 0.25]], path)
        with open(path) as f:
            assert f.readline().strip() == '"n","count","value"'
        assert csv_to_list(path) == [["n", "count", "value"], ["1", "4", "nan"], ["2", "16", "0.25"]]

    def test_file_hash(self):
        with open(combi_config, "rb") as f:
            expected = hashlib.sha256(f.read()).hexdigest()
        assert file_hash(combi_config) == expected
        assert len(file_hash(combi_config, "md5", hex_digest=False)) == 16

    def test_constants(self):
        constants = load_constants()
        assert constants["version"] == 1
        assert constants["C_cover"]["2,2"] == 400
        with pytest.raises(FileNotFoundError):
            load_constants(os.path.join(run_output, "missing.json"))
        assert json.loads(json.dumps(constants))["A_prec"] == 1000.0


class TestPools(BaseTestClass):
    def test_ordered_results(self):
        assert run_in_pool(square, range(10), processes=3) == [x * x for x in range(10)]
        assert run_in_pool(square, [1, 2], processes=1, target_kwargs={"offset": 1}) == [2, 5]
        assert run_in_pool(square, [], processes=4) == []
