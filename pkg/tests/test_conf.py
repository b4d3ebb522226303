import os

from noetherq.conf import conf, environment_name, load_env_files
from noetherq.utils import load_class, load_module, write_csv


def test_environment_name(monkeypatch):
    for name in ("NOETHERQ_ENVIRONMENT", "ENVIRONMENT", "ENV"):
        monkeypatch.delenv(name, raising=False)
    assert environment_name() == "development"
    monkeypatch.setenv("ENV", "Staging")
    assert environment_name() == "staging"
    monkeypatch.setenv("NOETHERQ_ENVIRONMENT", "test")
    assert environment_name() == "test"


def test_env_files_do_not_override_environment(tmp_path, monkeypatch):
    (tmp_path / "envs").mkdir()
    (tmp_path / "envs" / "test.env").write_text("NOETHERQ_SAMPLE=from-env-file\n")
    (tmp_path / ".env").write_text("NOETHERQ_SAMPLE=from-dotenv\nNOETHERQ_OTHER=1\n")
    monkeypatch.delenv("NOETHERQ_SAMPLE", raising=False)
    monkeypatch.delenv("NOETHERQ_OTHER", raising=False)

    loaded = load_env_files("test", tmp_path)

    assert [p.name for p in loaded] == ["test.env", ".env"]
    assert os.environ["NOETHERQ_SAMPLE"] == "from-env-file"
    assert os.environ["NOETHERQ_OTHER"] == "1"
    monkeypatch.delenv("NOETHERQ_SAMPLE")
    monkeypatch.delenv("NOETHERQ_OTHER")


def test_settings_namespace():
    settings = load_module("config.settings")
    assert settings["APP_NAME"] == conf.APP_NAME == "noetherq"
    assert all(name.isupper() for name in settings)
    assert conf.VELOCITY_SUFFIX == "d"
    assert conf.TIME_COORDINATE == "q0"


def test_load_class_passes_factory_kwargs():
    check = load_class("noetherq.checks.TrajectoryOracleCheck", {"tolerance": 1e-3})
    assert check.tolerance == 1e-3
    assert load_class("noetherq.checks.TrajectoryOracleCheck").tolerance == 1e-8


def test_write_csv(tmp_path):
    path = write_csv(tmp_path / "nested" / "rows.csv", ("a", "b"), [(0.1, 2), (1 / 3, -1)])
    assert path.read_text().splitlines() == [
        "a,b",
        "0.10000000000000001,2",
        "0.33333333333333331,-1",
    ]
