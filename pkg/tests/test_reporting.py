import json
import math
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from gaugeproj import (ConfigError, parse_config, power, run_pipeline,
                       sweep_partner)
from gaugeproj.cli import main as cli_main
from gaugeproj.hierarchy import (BranchingPlan, build_hierarchy,
                                 schedule_from_radii)
from gaugeproj.svgreport import (render_hierarchy_svg, render_shells_svg,
                                 render_sweep_svg)

FAST = {"f": {"family": "power", "s": 0.5}, "depth": 3, "angles": 64,
        "pairs": 5000, "scan_samples": 200, "seed": 7}


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

def test_parse_minimal_config_applies_defaults():
    cfg = parse_config('{"f": {"family": "power", "s": 0.5}, "depth": 4}')
    assert cfg.depth == 4
    assert cfg.angles == 256
    assert cfg.seed == 0
    assert cfg.emit == {"csv": True, "json": True, "svg": False}
    assert cfg.gauge_f() == power(0.5)
    assert cfg.gauge_g() is None  # "auto"


def test_parse_rejects_bad_depth():
    with pytest.raises(ConfigError, match="depth"):
        parse_config('{"f": {"family": "power", "s": 0.5}, "depth": 0}')


def test_parse_rejects_unknown_keys_and_lists_all_violations():
    with pytest.raises(ConfigError) as err:
        parse_config(json.dumps({"f": {"family": "power", "s": 0.5},
                                 "depth": 0, "angles": 1, "wat": 1}))
    msg = str(err.value)
    assert "wat" in msg and "depth" in msg and "angles" in msg


def test_parse_requires_gauge():
    with pytest.raises(ConfigError, match="required"):
        parse_config("{}")
    with pytest.raises(ConfigError, match="not valid JSON"):
        parse_config("{nope")


def test_config_round_trip_canonical():
    cfg = parse_config(json.dumps(FAST))
    text = cfg.canonical_json()
    again = parse_config(text)
    assert again.canonical_json() == text
    assert again == cfg


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

def test_pipeline_happy_path(tmp_path):
    cfg = parse_config(json.dumps(FAST))
    result = run_pipeline(cfg, tmp_path / "out")
    assert result.exit_code == 0
    summary = result.bundle["summary"]
    assert summary["inequalities"]["fail"] == 0
    assert summary["inequalities"]["pass"] > 10
    assert (tmp_path / "out" / "report.json").exists()
    assert (tmp_path / "out" / "checks.csv").exists()
    assert (tmp_path / "out" / "sweep.csv").exists()
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["schema_version"] == 1
    assert {r["check_id"] for r in report["checks"]} >= {
        "Eq20", "Eq21", "Eq22", "Eq23", "Eq25", "Eq32", "Eq33", "Eq34",
        "Eq35", "Eq36trend"}


def test_pipeline_records_schedule_failure(tmp_path):
    doc = dict(FAST)
    doc["f"] = {"family": "power", "s": 1.5}
    result = run_pipeline(parse_config(json.dumps(doc)), tmp_path / "out")
    stages = {s["stage"]: s for s in result.bundle["stages"]}
    assert stages["construct"]["status"] == "failed"
    assert "exceeds 1" in stages["construct"]["error"]
    assert stages["validate"]["status"] == "skipped"
    assert result.exit_code == 2


def test_pipeline_emits_svg(tmp_path):
    doc = dict(FAST)
    doc["emit"] = {"csv": True, "json": True, "svg": True}
    result = run_pipeline(parse_config(json.dumps(doc)), tmp_path / "out")
    for name in ("hierarchy.svg", "sweep.svg", "shells.svg"):
        path = tmp_path / "out" / name
        assert path.exists()
        ET.parse(path)  # well-formed XML


def test_pipeline_determinism(tmp_path):
    cfg = parse_config(json.dumps(FAST))
    run_pipeline(cfg, tmp_path / "a")
    run_pipeline(cfg, tmp_path / "b")
    for name in ("report.json", "checks.csv", "sweep.csv"):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes()


# ---------------------------------------------------------------------------
# SVG rendering
# ---------------------------------------------------------------------------

def _small_hierarchy(n=3):
    sched = schedule_from_radii([1.0, 0.2])
    return build_hierarchy(power(0.5), sched, BranchingPlan(1.0, (n,)),
                           theta=[0.0])


def test_hierarchy_svg_circle_count():
    svg = render_hierarchy_svg(_small_hierarchy(3))
    assert svg.count("<circle") == 1 + 3
    ET.fromstring(svg)


def test_hierarchy_svg_full_circle_count(h05_depth5):
    svg = render_hierarchy_svg(h05_depth5, max_discs=10 ** 5)
    h = h05_depth5
    expected = 1 + sum(h.disc_count(k) for k in range(1, h.depth + 1))
    assert svg.count("<circle") == expected
    assert "subsampled" not in svg


def test_hierarchy_svg_small_budget_notice(h05_depth5):
    svg = render_hierarchy_svg(h05_depth5, max_discs=100)
    assert "subsampled" in svg
    ET.fromstring(svg)


def test_empty_sweep_svg_axes_only():
    svg = render_sweep_svg([])
    assert "<polyline" not in svg
    assert svg.count("<line") == 2
    ET.fromstring(svg)


def test_shells_svg():
    svg = render_shells_svg([2.0 ** -n for n in range(40)])
    assert "<polyline" in svg
    ET.fromstring(svg)


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def test_cli_run_and_exit_code(tmp_path, capsys):
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(FAST))
    code = cli_main(["run", "--config", str(cfg_path), "--out",
                     str(tmp_path / "out")])
    assert code == 0
    out = capsys.readouterr().out
    assert json.loads(out)["inequalities"]["fail"] == 0


def test_cli_gauge_check(tmp_path):
    code = cli_main(["gauge-check", "--f", '{"family":"power","s":0.5}',
                     "--g", '{"family":"power","s":0.25}',
                     "--out", str(tmp_path)])
    assert code == 0
    doc = json.loads((tmp_path / "gauge_check.json").read_text())
    assert doc["integral_condition"]["status"] == "finite"
    assert doc["integral_condition"]["value"] == pytest.approx(1.0)
    assert doc["doubling"]["s"] == pytest.approx(0.5)


def test_cli_construct(tmp_path):
    code = cli_main(["construct", "--f", '{"family":"power","s":0.5}',
                     "--depth", "3", "--out", str(tmp_path)])
    assert code == 0
    doc = json.loads((tmp_path / "hierarchy.json").read_text())
    assert doc["hierarchy"]["N"] == [9, 9, 9]
    assert doc["validation"]["passed"] is True
    assert (tmp_path / "validation.csv").exists()


def test_cli_sweep(tmp_path):
    code = cli_main(["sweep", "--f", '{"family":"power","s":0.5}',
                     "--depth", "4", "--angles", "64",
                     "--out", str(tmp_path)])
    assert code == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "theta,k,cost,bound,margin"


def test_cli_energy(tmp_path):
    code = cli_main(["energy", "--f", '{"family":"power","s":0.5}',
                     "--depth", "3", "--pairs", "5000", "--seed", "3",
                     "--out", str(tmp_path)])
    assert code == 0
    doc = json.loads((tmp_path / "energy.json").read_text())
    assert doc["mean"] > 0 and doc["capacity_lower_bound"] > 0


def test_cli_classify(tmp_path):
    code = cli_main(["classify", "--f", '{"family":"logpower","s":1.1}',
                     "--psi", '{"family":"exp_power","tau":3}', "--k", "2",
                     "--out", str(tmp_path)])
    assert code == 0
    text = (tmp_path / "classify.csv").read_text()
    assert "finite" in text


def test_cli_gap_report(tmp_path):
    code = cli_main(["gap-report", "--delta", "0.5", "--s", "2.5",
                     "--out", str(tmp_path)])
    assert code == 0
    assert "gap" in (tmp_path / "gap_report.csv").read_text()


def test_cli_rejects_bad_config(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"f": {"family": "power", "s": 0.5}, "depth": 0}')
    code = cli_main(["run", "--config", str(cfg)])
    assert code == 2
    assert "depth" in capsys.readouterr().err


def test_sweep_partner_is_a_gap_pair():
    f = power(0.5)
    g = sweep_partner(f)
    assert g.family == "powerlog" and g.delta == 0.5
