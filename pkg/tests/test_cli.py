import json
from pathlib import Path

import pytest

from ltsheat.cli import (
    EXIT_CONFIG,
    EXIT_NO_CONVERGENCE,
    EXIT_OK,
    load_run_config,
    main,
    parse_config_file,
    run_compare,
    run_convergence,
    run_experiment,
)

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
BUMP_CFG = CONFIGS / "bump.cfg"


def write_cfg(tmp_path, body, name="test.cfg"):
    path = tmp_path / name
    path.write_text(body)
    return path


MINIMAL = """
grid.interface_x = 0.25
grid.n_cells_fine = 25
grid.n_cells_coarse = 15
grid.dt_fine = 0.002
grid.dt_coarse = 0.02
grid.t_end = 0.1
"""


def test_bundled_config_runs(tmp_path):
    out = tmp_path / "out"
    code = run_experiment(BUMP_CFG, {"output_dir": str(out)})
    assert code == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert 3.0 <= summary["mean_iterations"] <= 9.0
    assert summary["all_converged"] is True
    assert summary["variant"] == "is2-fine"
    assert summary["final_l2_error"] > 0.0
    space = (out / "error_space.csv").read_text().splitlines()
    assert space[0] == "x,error"
    assert len(space) == 1 + 40
    times = (out / "error_time.csv").read_text().splitlines()
    assert times[0] == "t,l2_error"
    assert len(times) == 1 + 6


def test_bad_time_step_ratio_is_config_error(tmp_path, capsys):
    cfg = write_cfg(tmp_path, MINIMAL.replace("grid.dt_fine = 0.002", "grid.dt_fine = 0.008") + "output_dir = " + str(tmp_path / "o") + "\n")
    code = run_experiment(cfg)
    assert code == EXIT_CONFIG
    assert "dt_coarse / dt_fine" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()  # no partial files


def test_unknown_key_is_config_error(tmp_path, capsys):
    cfg = write_cfg(tmp_path, MINIMAL + "grid.dt_medium = 0.01\n")
    assert run_experiment(cfg) == EXIT_CONFIG
    assert "grid.dt_medium" in capsys.readouterr().err


def test_zero_problem_outputs_zero_errors(tmp_path):
    out = tmp_path / "zero"
    cfg = write_cfg(tmp_path, MINIMAL + f"problem = zero\nboundary_mode = homogeneous\noutput_dir = {out}\n")
    assert run_experiment(cfg) == EXIT_OK
    rows = (out / "error_space.csv").read_text().splitlines()[1:]
    assert all(float(row.split(",")[1]) == 0.0 for row in rows)
    rows = (out / "error_time.csv").read_text().splitlines()[1:]
    assert all(float(row.split(",")[1]) == 0.0 for row in rows)


def test_custom_coefficients_problem(tmp_path):
    out = tmp_path / "custom"
    cfg = write_cfg(
        tmp_path,
        MINIMAL
        + "problem = custom-coefficients\nboundary_mode = homogeneous\n"
        + "problem.source_coeffs = 1.0, -0.5\nproblem.initial_coeffs = 0.0, 1.0\n"
        + f"output_dir = {out}\n",
    )
    assert run_experiment(cfg) == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["final_l2_error"] is None
    assert summary["final_l2_norm"] > 0.0
    assert (out / "error_space.csv").read_text() == "x,error\n"


def test_custom_problem_requires_homogeneous_boundary(tmp_path, capsys):
    cfg = write_cfg(tmp_path, MINIMAL + "problem = custom-coefficients\n")
    assert run_experiment(cfg) == EXIT_CONFIG
    assert "boundary_mode" in capsys.readouterr().err


def test_outputs_are_byte_identical_across_runs(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert run_experiment(BUMP_CFG, {"output_dir": str(out_a)}) == EXIT_OK
    assert run_experiment(BUMP_CFG, {"output_dir": str(out_b)}) == EXIT_OK
    for name in ("summary.json", "error_space.csv", "error_time.csv"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_compare_outputs(tmp_path):
    out = tmp_path / "cmp"
    assert run_compare(BUMP_CFG, {"output_dir": str(out)}) == EXIT_OK
    lines = (out / "compare.csv").read_text().splitlines()
    assert lines[0] == "method,final_l2_error,mean_iterations,max_conservativity_defect"
    rows = {line.split(",")[0]: line.split(",")[1:] for line in lines[1:]}
    assert set(rows) == {
        "is1-fine",
        "is1-coarse",
        "is2-fine",
        "is2-coarse",
        "uniform-fine",
        "uniform-coarse",
        "is2-fine-single-iteration",
    }
    coarse_err = float(rows["uniform-coarse"][0])
    for method in ("is1-fine", "is1-coarse", "is2-fine", "is2-coarse"):
        assert float(rows[method][0]) < coarse_err
    assert float(rows["is2-fine-single-iteration"][2]) <= 1e-12
    assert float(rows["uniform-fine"][1]) == 1.0


def test_convergence_ladder(tmp_path):
    out = tmp_path / "conv"
    assert run_convergence(BUMP_CFG, {"output_dir": str(out), "convergence.levels": "2"}) == EXIT_OK
    lines = (out / "convergence.csv").read_text().splitlines()
    assert lines[0] == "level,h,dt,l2_error,h1_error,observed_order_l2,observed_order_h1"
    assert len(lines) == 3
    first = lines[1].split(",")
    assert first[5] == "" and first[6] == ""  # no orders for the first level
    second = lines[2].split(",")
    assert float(second[5]) > 0.8


def test_convergence_single_level(tmp_path):
    out = tmp_path / "conv1"
    assert run_convergence(BUMP_CFG, {"output_dir": str(out), "convergence.levels": "1"}) == EXIT_OK
    lines = (out / "convergence.csv").read_text().splitlines()
    assert len(lines) == 2
    assert lines[1].endswith(",,")


def test_convergence_inject_exact_hook(tmp_path):
    out = tmp_path / "inj"
    code = run_convergence(
        BUMP_CFG,
        {"output_dir": str(out), "convergence.levels": "2", "convergence.inject_exact": "true"},
    )
    assert code == EXIT_OK
    lines = (out / "convergence.csv").read_text().splitlines()
    for line in lines[1:]:
        parts = line.split(",")
        assert float(parts[3]) == 0.0  # zero l2 errors
    assert lines[2].split(",")[5] == ""  # undefined order flagged as empty


def test_convergence_rejects_problem_without_exact(tmp_path, capsys):
    cfg = write_cfg(tmp_path, MINIMAL + "problem = custom-coefficients\nboundary_mode = homogeneous\n")
    assert run_convergence(cfg) == EXIT_CONFIG
    assert "exact solution" in capsys.readouterr().err


def test_convergence_zero_problem_all_orders_undefined(tmp_path):
    out = tmp_path / "zeroconv"
    cfg = write_cfg(
        tmp_path,
        MINIMAL + f"problem = zero\nboundary_mode = homogeneous\noutput_dir = {out}\n",
    )
    assert run_convergence(cfg, {"convergence.levels": "2"}) == EXIT_OK
    lines = (out / "convergence.csv").read_text().splitlines()
    for line in lines[1:]:
        parts = line.split(",")
        assert float(parts[3]) == 0.0 and float(parts[4]) == 0.0
        assert parts[5] == "" and parts[6] == ""


def test_nonconvergence_exit_code(tmp_path):
    out = tmp_path / "nc"
    code = run_experiment(BUMP_CFG, {"output_dir": str(out), "mode.max_iters": "1", "mode.eps": "1e-12"})
    assert code == EXIT_NO_CONVERGENCE
    assert (out / "summary.json").exists()  # outputs still written, flagged


def test_single_iteration_mode_exits_zero(tmp_path):
    out = tmp_path / "si"
    code = run_experiment(BUMP_CFG, {"output_dir": str(out), "mode.type": "single_iteration"})
    assert code == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["iterations"] == [1, 1, 1, 1, 1]
    assert summary["all_converged"] is False


def test_main_flag_overrides(tmp_path):
    out = tmp_path / "flags"
    code = main(
        [
            "run",
            str(BUMP_CFG),
            "--variant",
            "is1-coarse",
            "--mode",
            "converged",
            "--eps",
            "1e-4",
            "--max-iters",
            "50",
            "--out",
            str(out),
        ]
    )
    assert code == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["variant"] == "is1-coarse"
    assert summary["eps"] == 1e-4
    assert summary["max_iters"] == 50


def test_main_rejects_bad_variant(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["run", str(BUMP_CFG), "--variant", "is9-fine"])
    assert exc.value.code == EXIT_CONFIG


def test_parse_config_syntax_errors(tmp_path):
    path = write_cfg(tmp_path, "grid.t_end 0.1\n")
    with pytest.raises(Exception, match="key = value"):
        parse_config_file(path)


def test_missing_required_key(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "grid.interface_x = 0.25\n")
    assert run_experiment(cfg) == EXIT_CONFIG
    assert "grid.n_cells_fine" in capsys.readouterr().err


def test_load_run_config_defaults():
    pairs = parse_config_file(BUMP_CFG)
    config = load_run_config(pairs)
    assert config.variant.name == "is2-fine"
    assert config.mode.kind == "converged"
    assert config.levels == 4
    assert config.grid.domain_lo == 0.0
