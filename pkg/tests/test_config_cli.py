"""INI configuration loading, study writers, and the command line."""

import csv

import numpy as np
import pytest

from femupdate import ConfigError, load_config
from femupdate.cli import main
from femupdate.studies import run_strategy_comparison, run_update

BASE = """
[run]
schema_version = 1
benchmark = arch
modes = 5
weight_mode = uniform
seed = 0
strategy = RM
start = 2000 1100 1100
output_dir = {out}

[targets]
mode = generate
values = 5000 2200 4800
"""

TWO_PARAM = """
[run]
benchmark = arch
modes = 5
strategy = {strategy}
output_dir = {out}

[material.arch]
free = young density
young_bounds = 1000 9000
density_bounds = 1000 3000

[material.pier_left]
free =

[material.pier_right]
free =

[targets]
mode = generate
values = 3250 1800
"""


def write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_load_config_full_round_trip(tmp_path):
    path = write(tmp_path, BASE.format(out=tmp_path / "out"))
    setup = load_config(path)
    assert setup.benchmark == "arch"
    assert setup.strategy == "RM"
    assert setup.parameter_names == [
        "young:pier_left", "density:pier_left", "young:pier_right",
    ]
    assert np.array_equal(setup.start, [2000.0, 1100.0, 2000.0]) or np.array_equal(
        setup.start, [2000.0, 1100.0, 1100.0]
    )
    assert setup.problem.s == 5
    assert np.array_equal(setup.true_values, [5000.0, 2200.0, 4800.0])
    assert np.all(np.diff(setup.problem.measured) > 0)
    assert setup.record_wall_time is False


def test_material_override_reduces_parameters(tmp_path):
    path = write(tmp_path, TWO_PARAM.format(strategy="RM", out=tmp_path / "out"))
    setup = load_config(path)
    assert setup.parameter_names == ["young:arch", "density:arch"]
    assert np.array_equal(setup.start, setup.problem.box.midpoint())


def test_config_error_cases(tmp_path):
    cases = [
        ("missing_targets", BASE.replace("[targets]", "[nottargets]")),
        ("bad_strategy", BASE.replace("strategy = RM", "strategy = BB")),
        ("bad_benchmark", BASE.replace("benchmark = arch", "benchmark = tower")),
        ("bad_weights", BASE.replace("weight_mode = uniform", "weight_mode = wild")),
        ("bad_schema", BASE.replace("schema_version = 1", "schema_version = 9")),
        ("start_outside", BASE.replace("start = 2000 1100 1100", "start = 10 1100 1100")),
        (
            "values_outside",
            BASE.replace("values = 5000 2200 4800", "values = 99999 2200 4800"),
        ),
        ("bad_floats", BASE.replace("values = 5000 2200 4800", "values = a b c")),
    ]
    for name, text in cases:
        path = write(tmp_path, text.format(out=tmp_path / "out"), name + ".ini")
        with pytest.raises(ConfigError):
            load_config(path)


def test_config_unknown_material_section(tmp_path):
    text = BASE + "\n[material.nave]\nyoung = 1\n"
    path = write(tmp_path, text.format(out=tmp_path / "out"))
    with pytest.raises(ConfigError, match="nave"):
        load_config(path)


def test_config_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/run.ini")


def test_measured_targets_mode(tmp_path):
    text = BASE.format(out=tmp_path / "out").replace(
        "mode = generate", "mode = measured"
    ).replace("values = 5000 2200 4800", "values = 18 28 49 50 65")
    setup = load_config(write(tmp_path, text))
    assert setup.true_values is None
    assert np.array_equal(setup.problem.measured, [18.0, 28.0, 49.0, 50.0, 65.0])


def test_external_mesh_matches_builtin(tmp_path, arch, arch_targets):
    mesh, materials, pencil, _, _ = arch
    mesh_path = tmp_path / "arch.mesh"
    mesh.save(mesh_path)
    sections = []
    for rid, mat in enumerate(materials, start=1):
        free = []
        if mat.free_young:
            free.append("young")
        if mat.free_density:
            free.append("density")
        sections.append(
            "[material.%s]\nregion = %d\nyoung = %r\ndensity = %r\npoisson = %r\n"
            "free = %s\nyoung_bounds = %r %r\ndensity_bounds = %r %r\n"
            % (
                mat.name, rid, mat.young, mat.density, mat.poisson, " ".join(free),
                *mat.young_bounds, *mat.density_bounds,
            )
        )
    text = (
        "[run]\nbenchmark = mesh:%s\nmodes = 5\noutput_dir = %s\n\n"
        "[targets]\nmode = generate\nvalues = 5000 2200 4800\n\n%s"
        % (mesh_path, tmp_path / "out", "\n".join(sections))
    )
    setup = load_config(write(tmp_path, text))
    assert setup.parameter_names == pencil.names
    assert np.allclose(setup.problem.measured, arch_targets, rtol=1e-9)


def test_run_update_writes_outputs(tmp_path):
    path = write(tmp_path, TWO_PARAM.format(strategy="RM", out=tmp_path / "out"))
    setup = load_config(path)
    result = run_update(setup)
    assert result.converged
    out = tmp_path / "out"
    with open(out / "convergence.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:2] == ["k", "phi"]
    assert rows[0][-1] == "wall_s"
    assert len(rows) == 2 + result.n_outer  # header + k=0 + iterations
    assert all(row[-1] == "0.0" for row in rows[1:])  # wall time zeroed
    summary = (out / "summary.txt").read_text()
    assert "converged = true" in summary
    assert "parameter:young:arch" in summary
    assert "rel_error:max" in summary


def test_run_update_baseline_strategy(tmp_path):
    path = write(tmp_path, TWO_PARAM.format(strategy="AD", out=tmp_path / "outad"))
    setup = load_config(path)
    result = run_update(setup)
    assert result.converged
    assert not (tmp_path / "outad" / "convergence.csv").exists()
    assert "strategy = AD" in (tmp_path / "outad" / "summary.txt").read_text()


def test_comparison_rows_and_unsupported_strategy(tmp_path):
    path = write(tmp_path, TWO_PARAM.format(strategy="RM", out=tmp_path / "cmp"))
    setup = load_config(path)
    results = run_strategy_comparison(setup)
    with open(tmp_path / "cmp" / "comparison.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    strategies = [row[0] for row in rows[1:]]
    assert strategies == ["RM", "AD", "A", "BB"]
    bb = rows[-1]
    assert bb[1] == "unsupported"
    assert all(cell == "" for cell in bb[2:])
    facts = {row[0]: int(row[4]) for row in rows[1:-1]}
    assert facts["RM"] < facts["AD"] < facts["A"]
    assert results["RM"].converged and results["AD"].converged
    assert results["A"].value <= 1e-6  # A stalls on FD noise but lands close
    status = {row[0]: row[1] for row in rows[1:-1]}
    assert status["RM"] == "converged"


def test_cli_update_and_determinism(tmp_path, capsys):
    path = write(tmp_path, TWO_PARAM.format(strategy="RM", out=tmp_path / "o1"))
    assert main(["update", path]) == 0
    assert main(["update", path, "--output-dir", str(tmp_path / "o2")]) == 0
    a = (tmp_path / "o1" / "convergence.csv").read_bytes()
    b = (tmp_path / "o2" / "convergence.csv").read_bytes()
    assert a == b
    out = capsys.readouterr().out
    assert "converged" in out


def test_cli_eigs(tmp_path, capsys):
    path = write(tmp_path, TWO_PARAM.format(strategy="RM", out=tmp_path / "out"))
    assert main(["eigs", path]) == 0
    out = capsys.readouterr().out
    assert "f1" in out and "Hz" in out


def test_cli_mesh_export(tmp_path, capsys):
    target = tmp_path / "arch.mesh"
    assert main(["mesh", "arch", str(target)]) == 0
    assert target.exists()
    assert "440 nodes" in capsys.readouterr().out


def test_cli_config_errors_exit_2(tmp_path, capsys):
    bad = write(tmp_path, BASE.format(out=tmp_path).replace("strategy = RM", "strategy = BB"))
    assert main(["update", bad]) == 2
    assert "not supported" in capsys.readouterr().err
    assert main(["update", str(tmp_path / "missing.ini")]) == 2


def test_cli_nonconvergence_exit_1(tmp_path, capsys):
    text = TWO_PARAM.format(strategy="RM", out=tmp_path / "out") + (
        "\n[trust_region]\nmax_outer = 1\n"
    )
    path = write(tmp_path, text)
    assert main(["update", path]) == 1
