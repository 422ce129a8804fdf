import argparse
import os

import pandas as pd
import pytest

from vegcast.client.cli import CLI, load_config, parse_coupling
from vegcast.core import ConfigError
from vegcast.synth import SIDECAR_FILE


def common_flags(bundle, tmp_path):
    return ["--input-path", bundle.observations_dir, "--output-dir", str(tmp_path / "out"),
            "--cache-dir", str(tmp_path / "cache"), "--min-pixels-for-aggregate", "3", "--train-length", "60",
            "--burn-in", "112", "--issue-stride", "10", "--leads", "1,4", "--methods", "AR,PERSISTENCE",
            "--index-kinds", "VCI3M", "--log-level", "WARNING"]


def test_synth_command(tmp_path):
    code = CLI().run(["synth", "--output", str(tmp_path), "--seed", "2", "--regions", "2", "--years", "2",
                      "--pixels-per-region", "3", "--coupling", "R01:R02:0.5"])
    assert code == 0
    assert os.path.exists(os.path.join(tmp_path, SIDECAR_FILE))
    assert os.path.exists(os.path.join(tmp_path, "observations", "R02.csv"))


def test_run_command(small_bundle, tmp_path):
    assert CLI().run(["run", *common_flags(small_bundle, tmp_path)]) == 0
    assert os.path.exists(tmp_path / "out" / "reports" / "summary.json")


def test_stage_commands_chain(small_bundle, tmp_path):
    cli = CLI()
    flags = common_flags(small_bundle, tmp_path)
    out = tmp_path / "out"
    assert cli.run(["ingest", *flags]) == 0
    assert cli.run(["gapfill", *flags, "--compare-drop", "5"]) == 0
    assert os.path.exists(out / "series" / "ndvi_filled.csv")
    assert os.path.exists(out / "reports" / "interpolators.csv")
    assert cli.run(["kernel-search", *flags, "--region", "R01", "--last-weeks", "40", "--primitives", "RBF,LINEAR",
                    "--restarts", "0"]) == 0
    ranked = pd.read_csv(out / "reports" / "kernel_search.csv")
    assert list(ranked["region_id"].unique()) == ["R01"]
    assert list(ranked["rank"]) == [1, 2, 3, 4]
    assert set(ranked["structure"]) == {"RBF", "LINEAR", "RBF+LINEAR", "RBF*LINEAR"}
    assert cli.run(["indices", *flags, "--series", str(out / "series" / "ndvi_filled.csv")]) == 0
    assert cli.run(["granger", *flags, "--granger-min-coverage", "0"]) == 0
    assert os.path.exists(out / "reports" / "granger.csv")
    assert cli.run(["forecast", *flags]) == 0
    assert cli.run(["evaluate", *flags, "--series", str(out / "series" / "vci3m.csv")]) == 0
    assert os.path.exists(out / "reports" / "vci3m" / "persistence" / "summary.json")
    assert os.path.exists(out / "reports" / "coverage.csv")


@pytest.mark.parametrize("argv", [
    [],
    ["unknown"],
    ["run", "--l-max", "abc"],
    ["run", "--style", "SPOT"],
    ["run", "--log-level", "LOUD"],
    ["run", "--config", "/does/not/exist.txt"],
    ["synth", "--output", "x", "--coupling", "R01:R02"],
    ["kernel-search", "--primitives", "RBF,SPLINE"],
    ["kernel-search", "--last-weeks", "-3"],
])
def test_usage_errors_exit_with_one(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert CLI().run(argv) == 1


def test_data_errors_exit_with_two(small_bundle, tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    flags = common_flags(small_bundle, tmp_path)
    flags[1] = str(empty)
    assert CLI().run(["run", *flags]) == 2
    assert CLI().run(["evaluate", *flags, "--records", str(tmp_path / "missing.csv")]) == 2
    assert CLI().run(["granger", *flags]) == 2
    assert CLI().run(["kernel-search", *flags, "--series", str(tmp_path / "missing.csv")]) == 2


def test_command_line_overrides_the_config_file(tmp_path):
    path = tmp_path / "run.txt"
    path.write_text("# pipeline settings\nl_max=4\nleads=[2, 4]\nseed=9\n", encoding="utf-8")
    args = argparse.Namespace(config=str(path), cfg_l_max="5", cfg_seed=None)
    cfg = load_config(args)
    assert cfg.l_max == 5
    assert cfg.leads == [2, 4]
    assert cfg.seed == 9


def test_parse_coupling():
    coupling = parse_coupling("R01:R03:0.4:6")
    assert (coupling.source, coupling.target, coupling.coefficient, coupling.lag) == ("R01", "R03", 0.4, 6)
    assert parse_coupling("R01:R02:0.5").lag == 4
    with pytest.raises(ConfigError):
        parse_coupling("R01:R02:strong")
