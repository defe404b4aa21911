from __future__ import annotations

import pytest

from arcadia.config import (
    get_bool,
    get_float,
    get_int,
    get_str,
    load_settings,
    parse_settings,
)
from arcadia.errors import ConfigurationError


def test_basic_grammar() -> None:
    settings = parse_settings(
        """
        # training run for the scroller
        core = scroller
        train.actions = 60000

        agent.alpha = 0.1
        shaping.mode = position_bonus
        """,
        source="inline",
    )
    assert settings == {
        "core": "scroller",
        "train.actions": "60000",
        "agent.alpha": "0.1",
        "shaping.mode": "position_bonus",
    }


def test_values_keep_internal_spaces_and_symbols() -> None:
    settings = parse_settings("label = two words = fine\n", source="inline")
    assert settings["label"] == "two words = fine"


def test_duplicate_keys_are_rejected() -> None:
    with pytest.raises(ConfigurationError, match="duplicate"):
        parse_settings("a = 1\na = 2\n", source="inline")


def test_malformed_lines_name_the_source_and_line() -> None:
    with pytest.raises(ConfigurationError, match=r"myfile:2"):
        parse_settings("a = 1\njust some words\n", source="myfile")


def test_key_syntax_is_validated() -> None:
    for bad in ("UPPER = 1", "1abc = 2", "a..b = 3", "a. = 4", "-x = 5"):
        with pytest.raises(ConfigurationError):
            parse_settings(bad + "\n", source="inline")


def test_dotted_keys_allowed() -> None:
    settings = parse_settings("core.difficulty = very_hard\n", source="inline")
    assert settings == {"core.difficulty": "very_hard"}


def test_load_settings_reads_files(tmp_path) -> None:
    path = tmp_path / "run.cfg"
    path.write_text("core = racer\n# comment\n\ntrain.actions = 5\n")
    assert load_settings(str(path)) == {"core": "racer", "train.actions": "5"}


def test_load_settings_missing_file() -> None:
    with pytest.raises(ConfigurationError):
        load_settings("/nonexistent/path.cfg")


def test_typed_getters() -> None:
    settings = {"n": "42", "x": "2.5", "flag": "yes", "name": "duel"}
    assert get_int(settings, "n") == 42
    assert get_float(settings, "x") == 2.5
    assert get_bool(settings, "flag") is True
    assert get_str(settings, "name") == "duel"


def test_typed_getter_defaults() -> None:
    assert get_int({}, "n", 7) == 7
    assert get_float({}, "x", 1.5) == 1.5
    assert get_bool({}, "f", False) is False
    assert get_str({}, "s", "fallback") == "fallback"


def test_missing_required_setting() -> None:
    with pytest.raises(ConfigurationError, match="missing required setting"):
        get_int({}, "n")


def test_bad_typed_values() -> None:
    with pytest.raises(ConfigurationError):
        get_int({"n": "4.5"}, "n")
    with pytest.raises(ConfigurationError):
        get_float({"x": "wide"}, "x")
    with pytest.raises(ConfigurationError):
        get_bool({"f": "maybe"}, "f")


def test_bool_spellings() -> None:
    for text, expected in (
        ("true", True), ("yes", True), ("1", True),
        ("false", False), ("no", False), ("0", False),
        ("True", True), ("NO", False),
    ):
        assert get_bool({"f": text}, "f") is expected
