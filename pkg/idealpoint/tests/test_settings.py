"""Run configuration loading and precedence tests."""

from __future__ import annotations

import json
from pathlib import Path
import sys
import tomllib

import pytest

from idealpoint.src.errors import ParseError, ValidationError
from idealpoint.src.settings import load_run_config, merge_settings, read_config_document


def _write_config(tmp_path: Path, **overrides: object) -> Path:
    document: dict[str, object] = {
        "data": {"path": "votes.csv"},
        "anchors": [{"legislator_id": "L1", "position": [-1.0]}],
        "sampler": {"iterations": 500, "burn_in": 100},
    }
    document.update(overrides)
    path = tmp_path / "run.json"
    path.write_text(json.dumps(document), encoding="utf-8")
    return path


@pytest.mark.cli
def test_example_config_loads(example_config_path: Path) -> None:
    config = load_run_config(example_config_path)

    assert config.sampler.seed == 20100720
    assert Path(config.data.path).is_file()
    assert Path(config.data.motions_path).is_file()
    assert [anchor.legislator_id for anchor in config.anchors] == ["D01", "D12"]


@pytest.mark.cli
def test_defaults_fill_missing_sections(tmp_path: Path) -> None:
    config = load_run_config(_write_config(tmp_path))

    assert config.filter.min_participation == 0.95
    assert config.model.sigma2 == 25.0
    assert config.sampler.thin == 10
    assert config.analysis.ppc_replicates == 200
    assert not config.party.enabled
    assert not config.filter.until_stable
    assert config.data.path == str(tmp_path.resolve() / "votes.csv")


@pytest.mark.cli
def test_filter_can_run_until_stable(tmp_path: Path) -> None:
    config = load_run_config(_write_config(tmp_path, filter={"min_participation": 0.6, "until_stable": True}))

    assert config.filter.until_stable
    assert config.filter.min_participation == 0.6


@pytest.mark.cli
def test_precedence_env_file_flags(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("IDEAL_SEED", "7")
    monkeypatch.setenv("IDEAL_THREADS", "3")
    monkeypatch.setenv("IDEAL_OUTPUT_DIR", "from-env")
    path = _write_config(tmp_path, sampler={"iterations": 500, "burn_in": 100, "seed": 11})

    from_file = load_run_config(path)
    assert from_file.sampler.seed == 11
    assert from_file.threads == 3
    assert from_file.output_dir == "from-env"

    from_flags = load_run_config(path, seed=99, output_dir="from-flag", threads=1)
    assert from_flags.sampler.seed == 99
    assert from_flags.output_dir == "from-flag"
    assert from_flags.threads == 1


@pytest.mark.cli
def test_env_seed_fills_unset_seed(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("IDEAL_SEED", "7")

    assert load_run_config(_write_config(tmp_path)).sampler.seed == 7


@pytest.mark.cli
def test_bad_env_value_is_rejected(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("IDEAL_THREADS", "many")

    with pytest.raises(ValidationError, match="IDEAL_THREADS"):
        load_run_config(_write_config(tmp_path))


@pytest.mark.cli
def test_merge_does_not_mutate_the_document() -> None:
    document = {"data": {"path": "x.csv"}, "anchors": []}
    merged = merge_settings(document, seed=3)

    assert merged["sampler"]["seed"] == 3
    assert "sampler" not in document


@pytest.mark.cli
def test_schema_rejects_unknown_keys(tmp_path: Path) -> None:
    with pytest.raises(ValidationError, match="schema"):
        read_config_document(_write_config(tmp_path, colour="blue"))


@pytest.mark.cli
def test_schema_requires_anchors(tmp_path: Path) -> None:
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"data": {"path": "votes.csv"}}), encoding="utf-8")

    with pytest.raises(ValidationError):
        load_run_config(path)


@pytest.mark.cli
def test_malformed_json_reports_position(tmp_path: Path) -> None:
    path = tmp_path / "run.json"
    path.write_text('{\n  "data": {"path": "votes.csv",}\n}\n', encoding="utf-8")

    with pytest.raises(ParseError) as exc:
        load_run_config(path)
    assert exc.value.line == 2


@pytest.mark.cli
def test_burn_in_must_leave_iterations(tmp_path: Path) -> None:
    with pytest.raises(ValidationError, match="burn_in"):
        load_run_config(_write_config(tmp_path, sampler={"iterations": 100, "burn_in": 100}))


@pytest.mark.cli
def test_missing_config_file(tmp_path: Path) -> None:
    with pytest.raises(ValidationError, match="not found"):
        load_run_config(tmp_path / "absent.json")


@pytest.mark.cli
def test_declared_python_floor_covers_utc_timestamps() -> None:
    pyproject = Path(__file__).resolve().parents[2] / "pyproject.toml"
    project = tomllib.loads(pyproject.read_text(encoding="utf-8"))["project"]

    assert project["requires-python"] == ">=3.11"
    assert sys.version_info >= (3, 11)
