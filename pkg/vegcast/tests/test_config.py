import pytest

from vegcast.config import PipelineConfig, parse_value
from vegcast.core import ConfigError


def test_save_and_load_keep_values(tmp_path):
    path = str(tmp_path / "run.cfg")
    cfg = PipelineConfig(leads=[2, 4, 6], style="LANDSAT_GP", granger_threshold=7.5, demean=False)
    cfg.save(path)

    text = (tmp_path / "run.cfg").read_text(encoding="utf-8")
    assert "leads=[2, 4, 6]" in text
    assert "# AR model order p" in text

    loaded = PipelineConfig().load(path)
    assert loaded.to_dict() == cfg.to_dict()


def test_comments_and_blank_lines_are_ignored(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\n\norder = 4\nleads=1,2\nstrict_window=yes\n", encoding="utf-8")
    cfg = PipelineConfig().load(str(path))
    assert cfg.order == 4
    assert cfg.leads == [1, 2]
    assert cfg.strict_window is True


def test_overrides_win_over_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("order=4\ntrain_length=150\n", encoding="utf-8")
    cfg = PipelineConfig().load(str(path))
    cfg.apply_overrides({"order": "2"}, source="command line")
    assert cfg.order == 2
    assert cfg.train_length == 150


def test_unknown_key(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("no_such_key=1\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="no_such_key"):
        PipelineConfig().load(str(path))


def test_malformed_line(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("order 4\n", encoding="utf-8")
    with pytest.raises(ConfigError, match=":1:"):
        PipelineConfig().load(str(path))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        PipelineConfig().load(str(tmp_path / "nope.cfg"))
    cfg = PipelineConfig().load(str(tmp_path / "new.cfg"), create_if_missing=True)
    assert (tmp_path / "new.cfg").exists()
    assert cfg.order == 3


@pytest.mark.parametrize("overrides", [
    {"style": "SENTINEL"},
    {"leads": "0,1"},
    {"climatology_mode": "global"},
    {"methods": "AR,ARIMA"},
    {"index_kinds": "VCI"},
    {"l_max": "0"},
    {"savgol_window": "4"},
    {"order": "x"},
    {"train_length": "5"},
])
def test_invalid_values(overrides):
    with pytest.raises(ConfigError):
        PipelineConfig().apply_overrides(overrides)


def test_burn_in_default_follows_train_length():
    assert PipelineConfig(train_length=100).effective_burn_in == 152
    assert PipelineConfig(burn_in=10).effective_burn_in == 10


def test_parse_value():
    assert parse_value("[1, 2]", list[int]) == [1, 2]
    assert parse_value("3,4", list[float]) == [3.0, 4.0]
    assert parse_value("None", int | None) is None
    assert parse_value("off", bool) is False
    with pytest.raises(ValueError):
        parse_value("maybe", bool)


def test_sub_configs():
    cfg = PipelineConfig(order=2, train_length=80, l_max=4)
    ar = cfg.ar_config(3)
    assert (ar.order, ar.train_length, ar.lead) == (2, 80, 3)
    assert cfg.gapfill_config().l_max == 4


def test_gp_settings_reach_gap_filling():
    cfg = PipelineConfig(restarts=9, seed=4, gapfill_kernel="RBF")
    gapfill = cfg.gapfill_config()
    assert (gapfill.gp_restarts, gapfill.seed, gapfill.gp_kernel) == (9, 4, "RBF")
    assert cfg.gp_forecast_settings()["restarts"] == 9
