# test_experiment_cli.py
import json
import math
from dataclasses import asdict
from pathlib import Path

import pytest

from tools.errors import ArgumentError, ParseError
from tools.experiment.__main__ import main
from tools.experiment.base import (
    OutputRecord, load_config, load_manifest, manifest_hash, read_increments_csv, read_samples,
    validate_manifest,
)
from tools.normal_analytics import gumbel_quantile, normalization, pickands_f, Theorem
from tools.scan_statistics import RegionRect, excursion_tail_rect_grid
from tools.simulation_harness import (
    ks_critical, mc_grid_exceedance, mc_p_inf, mc_pickands_f, mc_pickands_f_via_walk,
)


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    """Run every command from an empty directory with no SCAN_* overrides."""
    monkeypatch.chdir(tmp_path)
    for key in ("SCAN_SERIES_MAX_TERMS", "SCAN_H_TOL", "SCAN_QUAD_LIMIT", "SCAN_BLOCK_SIZE",
                "SCAN_OVERSAMPLE", "SCAN_P_INF_HORIZON", "SCAN_PICKANDS_HORIZON",
                "SCAN_MASTER_SEED", "SCAN_WORKERS"):
        monkeypatch.delenv(key, raising=False)
    return tmp_path


def record_of(path):
    return OutputRecord.from_json(path.read_text(encoding="utf-8"))


# =============================================================================
# scan
# =============================================================================

def test_scan_two_increments(tmp_path):
    (tmp_path / "inc.csv").write_text("1\n-1\n")
    out = tmp_path / "scan.json"
    assert main(["scan", "--in", "inc.csv", "--out", str(out)]) == 0
    p = record_of(out).payload
    assert (p["value"], p["i"], p["j"]) == (1.0, 0, 1)
    assert p["n"] == 2


def test_scan_header_and_stdout(tmp_path, capsys):
    (tmp_path / "inc.csv").write_text("increment\n3\n4\n")
    assert main(["scan", "--in", "inc.csv", "--engine", "naive"]) == 0
    p = json.loads(capsys.readouterr().out)["payload"]
    assert p["value"] == pytest.approx(7.0 / math.sqrt(2.0))


@pytest.mark.parametrize("text", ["1\n2,3\n", "1\nabc\n", "1\nnan\n", "x\n"])
def test_scan_rejects_bad_csv(tmp_path, text):
    (tmp_path / "bad.csv").write_text(text)
    assert main(["scan", "--in", "bad.csv"]) == 2


def test_parse_error_reports_line(tmp_path):
    (tmp_path / "bad.csv").write_text("0.5\n1.5\n2.5,3\n")
    with pytest.raises(ParseError) as info:
        read_increments_csv(str(tmp_path / "bad.csv"))
    assert info.value.line == 3
    assert "bad.csv:3:" in str(info.value)


def test_scan_missing_file_is_io_error():
    assert main(["scan", "--in", "missing.csv"]) == 1


def test_scan_domain_error_exit(tmp_path):
    (tmp_path / "inc.csv").write_text("1\n2\n")
    assert main(["scan", "--in", "inc.csv", "--min-sep", "5"]) == 2


# =============================================================================
# simulate / gof
# =============================================================================

def test_simulate_is_reproducible(tmp_path):
    argv = ["simulate", "--stat", "MAIN_DISCRETE", "--n", "128", "--reps", "30", "--seed", "7"]
    assert main(argv + ["--out", "a.json"]) == 0
    assert main(argv + ["--out", "b.json"]) == 0
    a, b = record_of(tmp_path / "a.json"), record_of(tmp_path / "b.json")
    assert a.payload == b.payload
    assert a.metadata["manifest_hash"] == b.metadata["manifest_hash"]
    assert a.metadata["master_seed"] == 7
    assert a.payload["replication"] == list(range(30))


def test_simulate_csv_independent_of_workers(tmp_path):
    argv = ["simulate", "--stat", "ERDOS_RENYI", "--c", "1", "--n", "512", "--reps", "25", "--seed", "3"]
    assert main(argv + ["--workers", "1", "--out", "one.csv"]) == 0
    assert main(argv + ["--workers", "3", "--out", "three.csv"]) == 0
    one = (tmp_path / "one.csv").read_text()
    assert one == (tmp_path / "three.csv").read_text()
    assert one.splitlines()[0] == "replication,raw_value,standardized_value"
    assert len(one.splitlines()) == 26


def test_simulate_from_manifest(tmp_path):
    (tmp_path / "m.yaml").write_text(
        "statistic: DARLING_ERDOS\nn: 64\nreplications: 5\nmaster_seed: 1\nout: s.json\n")
    assert main(["simulate", "--in", "m.yaml"]) == 0
    assert len(record_of(tmp_path / "s.json").payload["standardized_value"]) == 5


@pytest.mark.parametrize("body", [
    "statistic: MAIN_DISCRETE\nn: 64\nreplications: 5\nmaster_seed: 1\nseeds: 3\n",
    "statistic: MAIN_DISCRETE\nn: 64\nmaster_seed: 1\n",
    "statistic: MAIN_DISCRETE\nn: sixty\nreplications: 5\nmaster_seed: 1\n",
    "statistic: [MAIN_DISCRETE\n",
    "statistic: SLEPIAN\nn: 64\nreplications: 5\nmaster_seed: 1\n",
])
def test_simulate_rejects_bad_manifest(tmp_path, body):
    (tmp_path / "m.yaml").write_text(body)
    assert main(["simulate", "--in", "m.yaml"]) == 2


def test_simulate_brownian_needs_positive_oversample():
    assert main(["simulate", "--stat", "BROWNIAN", "--n", "8", "--reps", "2", "--oversample", "0",
                 "--out", "x.json"]) == 2


def test_gof_on_samples_from_simulate(tmp_path):
    assert main(["simulate", "--stat", "MAIN_DISCRETE", "--n", "64", "--reps", "20",
                 "--seed", "2", "--out", "s.csv"]) == 0
    assert main(["gof", "--in", "s.csv", "--out", "g.json"]) == 0
    p = record_of(tmp_path / "g.json").payload
    assert p["replications"] == 20
    assert 0.0 < p["ks"] <= 1.0
    assert 0.0 <= p["p_value"] <= 1.0
    assert (p["level"], p["ks_critical"]) == (0.99, ks_critical(20, 0.99))
    assert [q["p"] for q in p["quantiles"]] == [0.1, 0.25, 0.5, 0.75, 0.9]
    assert p["quantiles"][2]["gumbel"] == gumbel_quantile(0.5)


def test_simulate_csv_writes_metadata_sidecar(tmp_path):
    assert main(["simulate", "--stat", "MAIN_DISCRETE", "--n", "64", "--reps", "6",
                 "--seed", "11", "--out", "s.csv"]) == 0
    assert main(["simulate", "--stat", "MAIN_DISCRETE", "--n", "64", "--reps", "6",
                 "--seed", "11", "--out", "s.json"]) == 0
    meta = record_of(tmp_path / "s.csv.meta.json")
    full = record_of(tmp_path / "s.json")
    assert meta.metadata["master_seed"] == 11
    assert meta.metadata["manifest_hash"] != full.metadata["manifest_hash"]  # out differs
    assert meta.payload == {"statistic": "MAIN_DISCRETE", "n": 64, "replications": 6, "samples": "s.csv"}
    assert list(read_samples(str(tmp_path / "s.csv"))) == full.payload["standardized_value"]


def test_gof_level_and_quantiles(tmp_path):
    r = 400
    lines = ["value"] + [repr(gumbel_quantile((i - 0.5) / r)) for i in range(1, r + 1)]
    (tmp_path / "q.csv").write_text("\n".join(lines) + "\n")
    assert main(["gof", "--in", "q.csv", "--level", "0.95", "--out", "g.json"]) == 0
    p = record_of(tmp_path / "g.json").payload
    assert p["ks_critical"] == ks_critical(r, 0.95)
    assert p["p_value"] > 0.99
    for q in p["quantiles"]:
        assert q["empirical"] == pytest.approx(q["gumbel"], abs=0.02)
    assert main(["gof", "--in", "q.csv", "--level", "1.5"]) == 2


def test_gof_exact_quantiles(tmp_path):
    r = 2000
    lines = ["value"] + [repr(gumbel_quantile((i - 0.5) / r)) for i in range(1, r + 1)]
    (tmp_path / "q.csv").write_text("\n".join(lines) + "\n")
    assert main(["gof", "--in", "q.csv", "--out", "g.json"]) == 0
    assert record_of(tmp_path / "g.json").payload["ks"] == pytest.approx(1.0 / (2 * r), abs=1e-12)


def test_gof_reads_json_record(tmp_path):
    assert main(["simulate", "--stat", "MAIN_DISCRETE", "--n", "32", "--reps", "4",
                 "--seed", "9", "--out", "s.json"]) == 0
    samples = read_samples(str(tmp_path / "s.json"))
    assert samples.size == 4


# =============================================================================
# Manifests and records
# =============================================================================

BASE_MANIFEST = {"statistic": "MAIN_DISCRETE", "n": 1024, "replications": 100, "master_seed": 5}


def test_manifest_hash_tracks_content():
    h = manifest_hash(BASE_MANIFEST)
    assert h == manifest_hash(dict(reversed(list(BASE_MANIFEST.items()))))
    for key, value in [("n", 2048), ("replications", 101), ("master_seed", 6), ("statistic", "DARLING_ERDOS")]:
        assert manifest_hash({**BASE_MANIFEST, key: value}) != h


def test_validate_manifest_types():
    assert validate_manifest({**BASE_MANIFEST, "c": 1})["c"] == 1.0
    with pytest.raises(ArgumentError):
        validate_manifest({**BASE_MANIFEST, "n": True})
    with pytest.raises(ArgumentError):
        validate_manifest({**BASE_MANIFEST, "n": 10.5})


def test_output_record_json():
    record = OutputRecord.build("scan", {"value": 0.1 + 0.2, "xs": [1.0, 2.5]},
                                manifest=BASE_MANIFEST, master_seed=5, started=0.0)
    back = OutputRecord.from_json(record.to_json())
    assert back == record
    assert back.payload["value"] == 0.1 + 0.2
    assert set(back.metadata) == {"tool_version", "command", "master_seed", "manifest_hash", "wall_time"}
    with pytest.raises(ArgumentError):
        OutputRecord.from_json('{"payload": {}}')


# =============================================================================
# Config
# =============================================================================

CONFIG = """\
h_tol: 0.002
workers: 2
profiles:
  quick:
    h_tol: 0.005
    p_inf_horizon: 1000
"""


def test_load_config_defaults():
    cfg = load_config()
    assert cfg.source is None
    assert cfg.h_tol == 1e-3
    assert cfg.workers == 1


def test_load_config_profile_and_env(tmp_path, monkeypatch):
    path = tmp_path / "config.yaml"
    path.write_text(CONFIG)
    base = load_config(str(path))
    assert (base.h_tol, base.workers, base.p_inf_horizon) == (0.002, 2, 10_000)

    quick = load_config(str(path), profile="quick")
    assert (quick.h_tol, quick.p_inf_horizon, quick.profile) == (0.005, 1000, "quick")

    monkeypatch.setenv("SCAN_WORKERS", "6")
    assert load_config(str(path)).workers == 6


def test_load_config_errors(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(CONFIG)
    with pytest.raises(ArgumentError, match="quick"):
        load_config(str(path), profile="huge")
    (tmp_path / "bad.yaml").write_text("h_tol: 0.001\nseries_terms: 5\n")
    with pytest.raises(ArgumentError):
        load_config(str(tmp_path / "bad.yaml"))
    with pytest.raises(FileNotFoundError):
        load_config(str(tmp_path / "nope.yaml"))


def test_cli_profile_not_found(tmp_path):
    (tmp_path / "config.yaml").write_text(CONFIG)
    assert main(["--profile", "huge", "rates", "--n", "1e3"]) == 2


# =============================================================================
# constants / rates / oracle
# =============================================================================

def test_constants_command(tmp_path):
    assert main(["constants", "--out", "c.json"]) == 0
    p = record_of(tmp_path / "c.json").payload
    for form in ("A_FORM", "Y_FORM"):
        assert 0.855 <= p["H"][form]["value"] <= 0.865
    assert 0.205 <= p["clump_integral"]["value"] <= 0.215
    row = next(g for g in p["pickands"] if g["a"] == 2.0)
    assert row["f_value"] == pickands_f(2.0, 1e-10).f_value
    assert len(p["pickands"]) == 9
    assert len(p["normalization"]) == 5 * 3
    iid = next(x for x in p["normalization"] if x["theorem"] == "IID_MAX" and x["n"] == 1000)
    assert iid["a_n"] == normalization(Theorem.IID_MAX, 1000).a_n


def test_constants_rerun_is_byte_identical(tmp_path):
    (tmp_path / "config.yaml").write_text("h_tol: 0.005\n")
    assert main(["constants", "--out", "a.json"]) == 0
    assert main(["constants", "--out", "b.json"]) == 0

    def without_wall_time(name):
        return [line for line in (tmp_path / name).read_bytes().splitlines() if b'"wall_time"' not in line]

    assert without_wall_time("a.json") == without_wall_time("b.json")
    assert record_of(tmp_path / "a.json").metadata["wall_time"] is not None


def test_constants_budget_exit(tmp_path):
    (tmp_path / "config.yaml").write_text("series_max_terms: 10\n")
    assert main(["constants", "--out", "c.json"]) == 3


def test_rates_command(tmp_path):
    assert main(["rates", "--n", "1e3", "--out", "r.json"]) == 0
    rows = record_of(tmp_path / "r.json").payload["rows"]
    assert [r["row"] for r in rows] == [1, 2, 3, 4, 5, 6, 7]
    assert all(r["f_n"] > 0 for r in rows)
    assert rows[0]["f_n"] == 1000.0


def test_rates_small_n_rejected():
    assert main(["rates", "--n", "10"]) == 2


def test_oracle_p_inf(tmp_path):
    assert main(["oracle", "p_inf", "--a", "10", "--reps", "2000", "--seed", "4",
                 "--out", "o.json"]) == 0
    record = record_of(tmp_path / "o.json")
    est = record.payload["estimate"]
    assert record.metadata["master_seed"] == 4
    assert abs(est["mean"] - record.payload["analytic"]) <= 4 * max(est["std_error"], 1e-3)


@pytest.mark.parametrize("kind, flags, expected", [
    ("p_inf", ["--a", "2", "--horizon", "300", "--reps", "400"],
     lambda: mc_p_inf(2.0, 300, 400, 3)),
    ("pickands_f", ["--a", "2", "--T", "20", "--reps", "500"],
     lambda: mc_pickands_f(2.0, 20.0, 500, 3)),
    ("pickands_f_walk", ["--a", "2", "--horizon", "200", "--reps", "500"],
     lambda: mc_pickands_f_via_walk(2.0, 200, 500, 3)),
    ("grid_exceedance", ["--u", "2.5", "--mesh", "0.015625", "--reps", "50"],
     lambda: mc_grid_exceedance(RegionRect(0.0, 1.0, 1.0, 2.0), 2.5, 2 ** -6, 50, 3, 1)),
])
def test_oracle_estimate_equals_library_call(tmp_path, kind, flags, expected):
    assert main(["oracle", kind, *flags, "--seed", "3", "--out", "o.json"]) == 0
    assert record_of(tmp_path / "o.json").payload["estimate"] == asdict(expected())


def test_oracle_analytic_values():
    assert main(["oracle", "pickands_f", "--a", "2", "--T", "20", "--reps", "50", "--out", "f.json"]) == 0
    assert record_of(Path("f.json")).payload["analytic"] == pickands_f(2.0, 1e-10).f_value
    assert main(["oracle", "grid_exceedance", "--u", "2.5", "--mesh", "0.015625", "--reps", "20",
                 "--out", "g.json"]) == 0
    analytic = excursion_tail_rect_grid(RegionRect(0.0, 1.0, 1.0, 2.0), 2.5, 2 ** -6 * 2.5 ** 2).value
    assert record_of(Path("g.json")).payload["analytic"] == analytic


# =============================================================================
# Undecodable and malformed input
# =============================================================================

def test_undecodable_csv_is_parse_error(tmp_path):
    (tmp_path / "inc.csv").write_bytes(b"1\n\xff\xfe\n")
    assert main(["scan", "--in", "inc.csv"]) == 2
    with pytest.raises(ParseError) as info:
        read_increments_csv(str(tmp_path / "inc.csv"))
    assert info.value.line == 2
    with pytest.raises(ParseError):
        read_samples(str(tmp_path / "inc.csv"))


def test_undecodable_manifest_is_parse_error(tmp_path):
    (tmp_path / "m.yaml").write_bytes(b"statistic: MAIN_DISCRETE\nn: 64\nreplications: 5 \xff\n")
    assert main(["simulate", "--in", "m.yaml"]) == 2
    with pytest.raises(ParseError) as info:
        load_manifest("m.yaml")
    assert info.value.line == 3


def test_unprintable_manifest_character_is_parse_error(tmp_path):
    (tmp_path / "m.yaml").write_text("statistic: MAIN_DISCRETE\nn: 64\x07\n", encoding="utf-8")
    with pytest.raises(ParseError) as info:
        load_manifest("m.yaml")
    assert info.value.line == 2


def test_undecodable_config_is_parse_error(tmp_path):
    (tmp_path / "config.yaml").write_bytes(b"workers: 2\n\xc3\x28\n")
    assert main(["rates", "--n", "1e3"]) == 2


def test_malformed_json_record_is_parse_error(tmp_path):
    (tmp_path / "s.json").write_text('{"metadata": {},\n "payload": [\n')
    with pytest.raises(ParseError) as info:
        read_samples(str(tmp_path / "s.json"))
    assert info.value.line == 3
    assert main(["gof", "--in", "s.json"]) == 2


def test_csv_with_byte_order_mark(tmp_path):
    (tmp_path / "inc.csv").write_bytes(b"\xef\xbb\xbfincrement\n1\n-1\n")
    assert list(read_increments_csv(str(tmp_path / "inc.csv"))) == [1.0, -1.0]


@pytest.mark.parametrize("key", ["h_tol", "series_max_terms", "p_inf_horizon", "pickands_horizon"])
def test_manifest_rejects_tolerance_settings(key):
    with pytest.raises(ArgumentError, match="config.yaml"):
        validate_manifest({**BASE_MANIFEST, key: 1})
