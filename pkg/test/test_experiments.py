#!/usr/bin/env python
# -*- coding: utf-8 -*-
import os

import pytest

from .common_test_data import (
    BaseTestClass,
    combi_config,
    cat_bounds_config,
    empty_config,
    broken_config,
    run_output,
    cat_exponent,
)

from symbext import (
    builtin_system,
    make_curve,
    validate_config,
    load_config,
    run_pipeline,
    run_experiment,
    exit_codes,
    save_json,
    load_json,
    csv_to_list,
    DomainError,
    SchemaError,
)


def write_config(name, pipelines, seed=0):
    os.makedirs(run_output, exist_ok=True)
    path = os.path.join(run_output, name)
    save_json({"schema_version": 1, "seed": seed, "pipelines": pipelines}, path)
    return path


class TestConfig(BaseTestClass):
    def test_validation_paths(self):
        errors = validate_config(
            {
                "pipelines": [
                    {"name": "entropy"},
                    {"name": "combi", "params": {"q": 1}},
                    {"name": "oscille", "params": {"curve": {"kind": "spiral"}}},
                    {"name": "tent"},
                ],
                "extra": 1,
            }
        )
        paths = [path for path, _ in errors]
        assert paths == [
            "seed",
            "pipelines[0].system",
            "pipelines[1].params.q",
            "pipelines[2].params.curve.kind",
            "pipelines[3].name",
            "extra",
        ]

    def test_validation_scalars(self):
        assert validate_config({"seed": 1, "pipelines": []}) == [("pipelines", "must be a non-empty list")]
        assert validate_config([]) == [("$", "config must be a JSON object")]
        errors = validate_config({"schema_version": 2, "seed": -1, "grid": 1, "pipelines": [{"name": "combi"}]})
        assert [path for path, _ in errors] == ["schema_version", "seed", "grid"]
        assert not validate_config({"seed": 3, "description": "ok", "pipelines": [{"name": "combi"}]})

    def test_validation_param_types(self):
        errors = validate_config(
            {
                "seed": 0,
                "pipelines": [
                    {"name": "combi", "params": {"n": "x", "S": 2.5}},
                    {"name": "lyapunov", "system": {"name": "cat"}, "params": {"x": [0.1], "method": 3}},
                    {"name": "volume", "system": {"name": "cat"}, "params": {"chi": None, "n_range": []}},
                    {"name": "bounds", "system": {"name": "cat"}, "params": {"local_diffeo": 1, "entropy": None}},
                ],
            }
        )
        assert [path for path, _ in errors] == [
            "pipelines[0].params.n",
            "pipelines[0].params.S",
            "pipelines[1].params.x",
            "pipelines[1].params.method",
            "pipelines[2].params.n_range",
            "pipelines[3].params.local_diffeo",
        ]
        assert errors[0][1] == 'must be an integer, got "x"'
        assert errors[5][1] == "must be a boolean, got 1"

    def test_load_config(self):
        config = load_config(combi_config)
        assert config.seed == 7
        assert config.pipelines[0]["name"] == "combi"
        with pytest.raises(SchemaError) as err:
            load_config(broken_config)
        assert err.value.line == 5
        with pytest.raises(SchemaError) as err:
            load_config(empty_config)
        assert err.value.errors == [("pipelines", "must be a non-empty list")]


class TestPipelines(BaseTestClass):
    def test_curves(self):
        cat = builtin_system("cat")
        assert make_curve({"kind": "circle", "radius": 0.25}).value(0.0)[0] == pytest.approx([0.25, 0.0])
        unstable = make_curve({"kind": "eigen_segment", "direction": "unstable", "length": 0.5}, cat, [0.1, 0.2])
        stable = make_curve({"kind": "eigen_segment", "direction": "stable", "length": 0.5}, cat, [0.1, 0.2])
        assert unstable.derivative(0.5)[0] @ stable.derivative(0.5)[0] == pytest.approx(0.0, abs=1e-9)
        with pytest.raises(DomainError):
            make_curve({"kind": "eigen_segment", "direction": "unstable"})
        with pytest.raises(DomainError):
            make_curve({"kind": "polynomial"})
        with pytest.raises(DomainError):
            make_curve({"kind": "spiral"})

    def test_combi_pipeline(self):
        result, tables = run_pipeline("combi", {"params": {"n": 2, "S": 2}})
        assert result["count"] == 6
        assert result["enumerated"] == 6
        assert result["holds"]
        assert tables["sequences"][0] == ["k_1", "k_2"]
        assert len(tables["sequences"]) == 7

    def test_oscille_pipeline(self):
        result, tables = run_pipeline("oscille", {})
        assert result["a"] == pytest.approx(0.25, abs=1e-9)
        assert result["certificate"]["valid"]
        assert tables == {}

    def test_pipeline_needs_system(self):
        with pytest.raises(DomainError):
            run_pipeline("entropy", {"params": {}})
        with pytest.raises(DomainError):
            run_pipeline("tent", {})


class TestRunExperiment(BaseTestClass):
    def test_badly_typed_param(self):
        path = write_config("typed.json", [{"name": "combi", "params": {"n": "x"}}])
        result = run_experiment(path, os.path.join(run_output, "typed"))
        assert result.code == exit_codes.schema
        assert result.report["status"] == "schema_error"
        assert result.report["error"]["errors"][0][0] == "pipelines[0].params.n"

    def test_combi_bundle(self):
        out = os.path.join(run_output, "combi")
        result = run_experiment(combi_config, out)
        assert result.code == exit_codes.ok
        assert result.report["status"] == "ok"
        assert result.report["seed"] == 7
        assert result.report["pipelines"][0]["result"]["count"] == 6
        for name in ("report.json", "combi_sequences.csv", "run_metadata.json"):
            assert os.path.exists(os.path.join(out, name))
        rows = csv_to_list(os.path.join(out, "combi_sequences.csv"))
        assert rows[0] == ["k_1", "k_2"]
        assert len(rows) == 7
        metadata = load_json(os.path.join(out, "run_metadata.json"))
        assert len(metadata["config_sha256"]) == 64
        assert "combi" in metadata["durations"]

    def test_reports_are_deterministic(self):
        first = os.path.join(run_output, "first")
        second = os.path.join(run_output, "second")
        run_experiment(combi_config, first)
        run_experiment(combi_config, second)
        with open(os.path.join(first, "report.json")) as a, open(os.path.join(second, "report.json")) as b:
            assert a.read() == b.read()

    def test_overrides(self):
        result = run_experiment(combi_config, seed=11, grid=50)
        assert result.report["seed"] == 11
        assert result.report["grid"] == 50
        assert result.paths == []

    def test_schema_errors(self):
        empty = run_experiment(empty_config)
        assert empty.code == exit_codes.schema
        assert empty.report["status"] == "schema_error"
        broken = run_experiment(broken_config)
        assert broken.code == exit_codes.schema
        assert broken.report["error"]["line"] == 5

    def test_precondition_stops_the_run(self):
        path = write_config(
            "precondition.json",
            [
                {"name": "oscille", "params": {"curve": {"kind": "circle", "radius": 0.5}}},
                {"name": "combi"},
            ],
        )
        result = run_experiment(path)
        assert result.code == exit_codes.precondition
        assert result.report["status"] == "error"
        assert len(result.report["pipelines"]) == 1
        assert result.report["pipelines"][0]["error"]["hypothesis"] == "oscillation"

    def test_escape_is_a_budget_failure(self):
        path = write_config(
            "escape.json", [{"name": "lyapunov", "system": {"name": "henon"}, "params": {"x": [3.9, 0.0]}}]
        )
        result = run_experiment(path)
        assert result.code == exit_codes.budget
        assert result.report["pipelines"][0]["error"]["type"] == "EscapeError"

    def test_duplicate_labels(self):
        path = write_config("twice.json", [{"name": "combi"}, {"name": "combi", "params": {"n": 1, "S": 3}}])
        result = run_experiment(path)
        assert result.code == exit_codes.ok
        assert [p["label"] for p in result.report["pipelines"]] == ["combi", "combi2"]
        assert sorted(result.tables) == ["combi2_sequences", "combi_sequences"]

    def test_cat_bounds_config(self):
        result = run_experiment(cat_bounds_config, os.path.join(run_output, "bounds"))
        assert result.code == exit_codes.ok
        bounds = result.report["pipelines"][0]["result"]["bounds"]
        assert bounds["applicable"] == pytest.approx(2 * cat_exponent, abs=0.15)
        assert bounds["tail"] == pytest.approx(cat_exponent / 2, abs=0.08)
        assert "bounds_bounds" in result.tables
