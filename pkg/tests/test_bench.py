from __future__ import annotations

import pytest

from arcadia.bench import (
    BASELINE_FRACTION,
    bench_core,
    bench_parallel,
    bench_report,
    check_baseline,
    load_baseline,
)
from arcadia.errors import ConfigurationError, UnknownCoreError


def test_zero_duration_measures_zero_frames() -> None:
    result = bench_core("scroller", seconds=0)
    assert result["frames"] == 0
    assert result["fps"] == 0.0


def test_bench_core_counts_frames() -> None:
    result = bench_core("racer", seconds=0.05)
    assert result["frames"] > 0
    assert result["fps"] > 0
    assert result["elapsed"] > 0


def test_bench_unknown_core() -> None:
    with pytest.raises(UnknownCoreError):
        bench_core("pinball", seconds=0.01)


def test_parallel_single_instance_runs_inline() -> None:
    result = bench_parallel("scroller", seconds=0.05, instances=1)
    assert result["instances"] == 1
    assert len(result["per_instance_fps"]) == 1
    assert result["aggregate_fps"] == pytest.approx(sum(result["per_instance_fps"]))


def test_parallel_spawns_workers() -> None:
    result = bench_parallel("scroller", seconds=0.05, instances=2)
    assert result["instances"] == 2
    assert len(result["per_instance_fps"]) == 2
    assert result["total_frames"] > 0


def test_report_shape() -> None:
    report = bench_report(["scroller", "duel"], seconds=0.02, instances=1)
    assert report["schema_version"] == 1
    assert set(report["cores"]) == {"scroller", "duel"}
    for entry in report["cores"].values():
        assert entry["single_fps"] >= 0
        assert entry["runs"][0]["instances"] == 1


def test_baseline_gate_passes_and_fails() -> None:
    report = {
        "schema_version": 1,
        "cores": {"scroller": {"single_fps": 100.0, "runs": []}},
    }
    generous = {"scroller": 50.0}
    assert check_baseline(report, generous) == []

    strict = {"scroller": 1000.0}
    failures = check_baseline(report, strict)
    assert len(failures) == 1
    assert "scroller" in failures[0]


def test_baseline_gate_is_eighty_percent() -> None:
    assert BASELINE_FRACTION == 0.8
    report = {"cores": {"racer": {"single_fps": 80.0, "runs": []}}}
    # exactly at the floor passes, a hair under fails
    assert check_baseline(report, {"racer": 100.0}) == []
    assert check_baseline(report, {"racer": 100.1}) != []


def test_baseline_ignores_unmeasured_cores() -> None:
    report = {"cores": {"racer": {"single_fps": 1.0, "runs": []}}}
    baseline = {"scroller": 10_000.0}
    assert check_baseline(report, baseline) == []


def test_load_baseline_validates(tmp_path) -> None:
    good = tmp_path / "base.json"
    good.write_text('{"single_instance_fps": {"scroller": 10}}')
    assert load_baseline(str(good)) == {"scroller": 10.0}

    with pytest.raises(ConfigurationError):
        load_baseline(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text('{"fps": 3}')
    with pytest.raises(ConfigurationError):
        load_baseline(str(bad))


def test_committed_baseline_file_parses() -> None:
    import pathlib

    committed = pathlib.Path(__file__).resolve().parent.parent / "benchmarks" / "baseline.json"
    baseline = load_baseline(str(committed))
    assert set(baseline) == {"scroller", "racer", "duel"}
