# tests/test_config.py
import pytest

from matchlab.config import BUDGETS, THEOREM_CONFIG, Settings, get_theorem_ids, load_settings, theorem_bounds
from matchlab.errors import ConfigError


def write(tmp_path, text):
    path = tmp_path / "config.toml"
    path.write_text(text, encoding="utf-8")
    return path


def test_defaults_without_file(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    settings = load_settings()
    assert settings == Settings()
    assert settings.exhaustive_instance_budget == BUDGETS["exhaustive_instance_budget"]


def test_sections_and_overrides(tmp_path):
    path = write(tmp_path, """
[budgets]
subspace_budget = 500

[campaign]
basis_trials = 25

[logging]
log_level = "DEBUG"

[theorems.thm31]
max_order = 6
""")
    settings = load_settings(path, progress_every=0)
    assert settings.subspace_budget == 500
    assert settings.basis_trials == 25
    assert settings.log_level == "DEBUG"
    assert settings.progress_every == 0
    assert theorem_bounds("thm31", settings) == {"max_order": 6}
    assert theorem_bounds("thm41", settings) == THEOREM_CONFIG["thm41"]["bounds"]


def test_project_file_is_picked_up(tmp_path, monkeypatch):
    (tmp_path / ".matchlab").mkdir()
    (tmp_path / ".matchlab" / "config.toml").write_text("[campaign]\nbasis_trials = 7\n", encoding="utf-8")
    monkeypatch.chdir(tmp_path)
    assert load_settings().basis_trials == 7


@pytest.mark.parametrize("text", [
    "[plots]\ncolour = 'red'\n",
    "[budgets]\nbasis_trials = 3\n",
    "[theorems.thm99]\nmax_order = 3\n",
    "[budgets\n",
])
def test_bad_files(tmp_path, text):
    with pytest.raises(ConfigError):
        load_settings(write(tmp_path, text))


def test_missing_explicit_file(tmp_path):
    with pytest.raises(ConfigError):
        load_settings(tmp_path / "absent.toml")


def test_unknown_override():
    with pytest.raises(ConfigError):
        load_settings(colour="red")


def test_theorem_ids():
    ids = get_theorem_ids()
    assert ids[0] == "thm31"
    assert "tamper" in ids
    with pytest.raises(ConfigError):
        theorem_bounds("thm99")
