# Copyright 2025 The slipmix Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
"""Unit tests for the slipmix CLI."""

import json
import math
from argparse import Namespace
from unittest.mock import MagicMock, patch

import numpy as np
import pytest

from slipmix.cli import (
    EXIT_CHECK_FAILED,
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    EXIT_OK,
    RunSpec,
    apply_overrides,
    build_stokes,
    build_grid,
    dispatch,
    load_run_spec,
    main,
    output_formatter,
    parse_run_spec,
)
from slipmix.exceptions import CFLError, ConfigError
from slipmix.channel.grid import make_grid
from slipmix.channel.snapshot import write_array

SMALL = {
    "grid": {"nx": 16, "ny": 17},
    "physics": {"epsilon": 1e-2, "T": 0.2, "nt": 10},
    # sampled L1 and Linf of a 16-cell stripe drift by O(h^2) under transport
    "checks": {"directions": 2, "delta": 1e-5, "gradient_tol": 1e-6, "conservation_tol": 5e-2},
    "seed": 0,
}


def _write_config(tmp_path, data, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def _run_main(argv):
    with patch("sys.argv", ["slipmix"] + argv):
        with pytest.raises(SystemExit) as excinfo:
            main()
    return excinfo.value.code


def test_parse_run_spec_defaults():
    spec = parse_run_spec({})
    assert spec.grid.nx == 128
    assert spec.grid.ny == 129
    assert spec.physics.gamma == 1e-3
    assert spec.optimizer is None
    assert spec.initial.preset == "stripe"


def test_parse_run_spec_nested_blocks():
    spec = parse_run_spec(
        {
            "optimizer": {"max_iters": 3, "schedule": [1e-2, 1e-3], "line_search": {"bb": True}},
            "control": {"shear": 0.5},
        }
    )
    assert spec.optimizer.max_iters == 3
    assert spec.optimizer.schedule == [1e-2, 1e-3]
    assert spec.optimizer.line_search.bb is True
    assert spec.control.shear == 0.5


def test_unknown_key_is_named():
    with pytest.raises(ConfigError, match=r"'physics\.epsilonn'"):
        parse_run_spec({"physics": {"epsilonn": 1e-3}})
    with pytest.raises(ConfigError, match="Unknown configuration key 'extra'"):
        parse_run_spec({"extra": 1})


def test_invalid_value_is_rejected():
    with pytest.raises(ConfigError, match=r"'grid\.nx' has invalid value"):
        parse_run_spec({"grid": {"nx": "sixteen"}})
    with pytest.raises(ConfigError, match="preset"):
        parse_run_spec({"initial": {"preset": "swirl"}})


def test_load_run_spec_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError, match="Failed to load config"):
        load_run_spec(str(path))


def test_build_stokes_from_cfl():
    spec = parse_run_spec({"grid": {"nx": 128, "ny": 129}})
    stokes = build_stokes(spec, build_grid(spec))
    assert stokes.nt == 258
    assert stokes.dt * stokes.nt == pytest.approx(1.0)


def test_apply_overrides():
    spec = apply_overrides(RunSpec(), Namespace(output="elsewhere", seed=7))
    assert spec.output.dir == "elsewhere"
    assert spec.seed == 7


@patch("builtins.print")
def test_output_formatter(mock_print):
    output_formatter({"b": 1, "a": 2})
    printed = mock_print.call_args[0][0]
    assert printed.index('"a"') < printed.index('"b"')


def test_dispatch_maps_errors_to_exit_codes():
    args = Namespace(config=None, output=None, seed=None, threads=1)
    args.func = MagicMock(side_effect=ConfigError("bad"))
    assert dispatch(args) == EXIT_CONFIG
    args.func = MagicMock(side_effect=CFLError("too fast", step=3, dt=0.1, required_dt=0.01))
    assert dispatch(args) == EXIT_NUMERICAL
    args.func = MagicMock(side_effect=PermissionError("read-only"))
    assert dispatch(args) == EXIT_CONFIG
    args.func = MagicMock(return_value=EXIT_OK)
    assert dispatch(args) == EXIT_OK
    args.threads = 0
    assert dispatch(args) == EXIT_CONFIG


def test_main_without_command_exits_with_config_code(capsys):
    assert _run_main([]) == EXIT_CONFIG


def test_unknown_key_exits_with_config_code(tmp_path, capsys):
    config = _write_config(tmp_path, {"physics": {"epsilonn": 1e-3}})
    assert _run_main(["simulate", "--config", config]) == EXIT_CONFIG
    assert "physics.epsilonn" in capsys.readouterr().err


def test_optimize_requires_optimizer_block(tmp_path, capsys):
    config = _write_config(tmp_path, SMALL)
    code = _run_main(["optimize", "--config", config, "--output", str(tmp_path / "out")])
    assert code == EXIT_CONFIG
    assert "optimizer" in capsys.readouterr().err


def test_simulate_writes_outputs(tmp_path, capsys):
    data = dict(SMALL, control={"shear": 0.2}, output={"stride": 5})
    config = _write_config(tmp_path, data)
    out = tmp_path / "sim"
    assert _run_main(["simulate", "--config", config, "--output", str(out)]) == EXIT_OK
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert manifest["config"]["grid"]["nx"] == 16
    assert len(manifest["inputs_sha256"]) == 64
    for name in ("diagnostics.csv", "summary.json", "theta/theta_00010.mixfld", "velocity/u_00005.mixfld"):
        assert (out / name).exists()
    summary = json.loads((out / "summary.json").read_text())
    assert summary["nt"] == 10
    assert summary["drift"]["mass"] <= 1e-12
    assert len((out / "diagnostics.csv").read_text().strip().splitlines()) == 12


def test_simulate_cfl_violation_exits_with_numerical_code(tmp_path, capsys):
    data = dict(SMALL, physics={"T": 1.0, "nt": 1}, control={"plug": 50.0})
    config = _write_config(tmp_path, data)
    code = _run_main(["simulate", "--config", config, "--output", str(tmp_path / "out")])
    assert code == EXIT_NUMERICAL
    assert "CFL" in capsys.readouterr().err


def test_optimize_writes_result(tmp_path, capsys):
    data = dict(SMALL, optimizer={"max_iters": 2})
    config = _write_config(tmp_path, data)
    out = tmp_path / "opt"
    assert _run_main(["optimize", "--config", config, "--output", str(out)]) == EXIT_OK
    result = json.loads((out / "result.json").read_text())
    assert len(result["J_history"]) == result["iterations"] + 1
    assert (out / "history.csv").exists()
    assert (out / "control" / "control_bottom.mixfld").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert set(summary) >= {"J_zero", "J_final", "improvement_ratio"}


def test_check_passes_on_small_channel(tmp_path, capsys):
    config = _write_config(tmp_path, SMALL)
    out = tmp_path / "check"
    assert _run_main(["check", "--config", config, "--output", str(out)]) == EXIT_OK
    report = json.loads((out / "checks.json").read_text())
    names = [c["name"] for c in report["checks"]]
    assert names == ["adjoint_identity", "gradient", "duality", "conservation", "rate"]
    assert report["passed"]
    by_name = {c["name"]: c for c in report["checks"]}
    assert by_name["gradient"]["value"] <= 1e-6
    conservation = by_name["conservation"]
    assert conservation["value"]["mass"] <= 1e-12
    assert set(conservation["refined"]) == set(conservation["value"])
    assert conservation["L2_ratio"] <= 0.5


def test_check_reports_cfl_rejection(tmp_path, capsys):
    data = dict(SMALL, physics={"epsilon": 1e-2, "T": 1.0, "nt": 1}, control={"plug": 50.0})
    config = _write_config(tmp_path, data)
    out = tmp_path / "check"
    assert _run_main(["check", "--config", config, "--output", str(out)]) == EXIT_CHECK_FAILED
    report = json.loads((out / "checks.json").read_text())
    by_name = {c["name"]: c for c in report["checks"]}
    assert by_name["adjoint_identity"]["passed"]
    assert not by_name["conservation"]["passed"]
    assert by_name["conservation"]["message"].startswith("rejected")
    assert "conservation" in capsys.readouterr().err


def test_mixnorm_command(tmp_path, capsys):
    grid = make_grid(16, 17)
    x, _ = grid.cell_mesh()
    path = str(tmp_path / "cos.mixfld")
    write_array(path, np.cos(x))
    assert _run_main(["mixnorm", path]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["mixnorm"] == pytest.approx(math.sqrt(math.pi / 2.0), rel=1e-12)
    assert abs(payload["mean"]) < 1e-12


def test_mixnorm_rejects_non_field_file(tmp_path, capsys):
    path = tmp_path / "junk.mixfld"
    path.write_bytes(b"junk")
    assert _run_main(["mixnorm", str(path)]) == EXIT_CONFIG


def test_unwritable_output_exits_with_config_code(tmp_path, capsys):
    config = _write_config(tmp_path, SMALL)
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory")
    code = _run_main(["simulate", "--config", config, "--output", str(blocker / "sub")])
    assert code == EXIT_CONFIG
    assert "Error" in capsys.readouterr().err


@pytest.mark.slow
def test_check_with_default_tolerances(tmp_path, capsys):
    config = _write_config(tmp_path, {"physics": {"T": 0.2}})
    out = tmp_path / "check"
    assert _run_main(["check", "--config", config, "--output", str(out)]) == EXIT_OK
    report = json.loads((out / "checks.json").read_text())
    by_name = {c["name"]: c for c in report["checks"]}
    assert by_name["gradient"]["value"] <= 1e-6
    assert by_name["conservation"]["value"]["Linf"] <= 1e-3
    assert by_name["rate"]["value"] >= 0.4
