"""CLI configuration, persistence formats, and end-to-end command runs."""

import json

import pytest

from sde_rand_em.cli import build_config, main
from sde_rand_em.errors import ConfigError
from sde_rand_em.report import (
    CSV_COLUMNS,
    ResultRow,
    format_float,
    read_csv,
    read_summary,
    write_csv,
)

FAST_LADDER = ["--ns", "8,16", "--nref", "256", "--samples", "16", "--seed", "9"]


def test_format_float_round_trips():
    for x in (0.1, 1.0 / 3.0, 2.0, 4.9406564584124654e-324, 123456.789e-12):
        assert float(format_float(x)) == x


def test_csv_header_only_for_empty_rows(tmp_path):
    path = tmp_path / "points.csv"
    write_csv(path, [])
    assert path.read_bytes() == (",".join(CSV_COLUMNS) + "\n").encode()


def test_csv_rows_sorted_and_round_trip(tmp_path):
    rows = [
        ResultRow(64, "standard", 2.0, 0.01, 0.001, 100, 7),
        ResultRow(16, "standard", 2.0, 0.04, 0.004, 100, 7),
        ResultRow(32, "randomised", 2.0, 1.0 / 3.0, 0.002, 100, 7),
    ]
    path = tmp_path / "points.csv"
    write_csv(path, rows)
    parsed = read_csv(path)
    assert [(r.scheme, r.n) for r in parsed] == [
        ("randomised", 32), ("standard", 16), ("standard", 64)
    ]
    first = path.read_bytes()
    write_csv(path, parsed)
    assert path.read_bytes() == first


def test_config_defaults_and_validation():
    config = build_config(["converge", "--out", "x"])
    assert config.scheme == "randomised"
    assert config.ns == (16, 32, 64, 128, 256, 512)
    assert config.n_ref == 8192
    with pytest.raises(ConfigError, match="n_ref"):
        build_config(["converge", "--ns", "16,32", "--nref", "128"])
    with pytest.raises(ConfigError, match="ns"):
        build_config(["converge", "--ns", "32,16", "--nref", "8192"])
    with pytest.raises(ConfigError, match="samples"):
        build_config(["converge", "--ns", "8", "--nref", "128", "--samples", "4"])
    with pytest.raises(ConfigError, match="alpha"):
        build_config(["converge", "--alpha", "2.0"])
    with pytest.raises(ConfigError, match="q"):
        build_config(["iprobe", "--q", "2"])
    with pytest.raises(ConfigError, match="ns"):
        build_config(["converge", "--family", "weierstrass", "--L", "8",
                      "--ns", "64,128", "--nref", "4096"])


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"samples": 32, "master_seed": 77, "ns": [8, 16]}))
    config = build_config(["converge", "--config", str(cfg), "--nref", "256",
                           "--samples", "16"])
    assert config.master_seed == 77       # from file
    assert config.samples == 16           # flag overrides file
    assert config.ns == (8, 16)
    with pytest.raises(ConfigError, match="unknown keys"):
        cfg.write_text(json.dumps({"nope": 1}))
        build_config(["converge", "--config", str(cfg)])


def test_invalid_config_exits_2(tmp_path, capsys):
    code = main(["converge", "--ns", "16,32", "--nref", "64",
                 "--out", str(tmp_path)])
    assert code == 2
    assert "config error" in capsys.readouterr().err


def test_converge_zero_drift_degenerate(tmp_path):
    out = tmp_path / "run"
    code = main(["converge", "--family", "zero", *FAST_LADDER, "--out", str(out)])
    assert code == 0
    summary = read_summary(out / "summary.txt")
    assert summary["band_check"] == "degenerate-zero"
    rows = read_csv(out / "points.csv")
    assert all(r.estimate < 1e-12 for r in rows)
    # Every config field appears in the echo, defaults included.
    for key in ("config.family", "config.alpha", "config.q", "config.workers",
                "config.emit_svg", "config.anchor", "config.truncation"):
        assert key in summary


def test_converge_summary_reports_fit(tmp_path):
    out = tmp_path / "run"
    code = main(["converge", "--family", "product", "--alpha", "0.3",
                 "--ns", "8,16,32", "--nref", "512", "--samples", "24",
                 "--seed", "3", "--out", str(out)])
    assert code == 0
    summary = read_summary(out / "summary.txt")
    assert float(summary["fit.slope"]) > 0.0
    assert float(summary["predicted_slope"]) == pytest.approx(0.8)
    assert summary["band_check"] in ("pass", "fail")
    assert float(summary["envelope_max"]) <= 1.0


def test_converge_deterministic_reruns_byte_identical(tmp_path):
    args = ["converge", "--family", "product", "--alpha", "0.3", *FAST_LADDER]
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert (out1 / "points.csv").read_bytes() == (out2 / "points.csv").read_bytes()


def test_compare_command(tmp_path):
    out = tmp_path / "cmp"
    code = main(["compare", "--family", "product", "--alpha", "0.25",
                 "--ns", "8,16,32", "--nref", "512", "--samples", "24",
                 "--seed", "3", "--out", str(out)])
    assert code == 0
    summary = read_summary(out / "summary.txt")
    assert "standard.slope" in summary
    assert "randomised.slope" in summary
    assert "slope_gap" in summary
    rows = read_csv(out / "points.csv")
    assert {r.scheme for r in rows} == {"standard", "randomised"}


def test_quadrature_command_with_figure(tmp_path):
    out = tmp_path / "quad"
    code = main(["quadrature", "--family", "product", "--alpha", "0.3",
                 "--ns", "16,32,64,128", "--samples", "400", "--seed", "5",
                 "--out", str(out), "--svg"])
    assert code == 0
    assert (out / "points.csv").exists()
    assert (out / "errors.svg").stat().st_size > 0
    rows = read_csv(out / "points.csv")
    assert {r.scheme for r in rows} == {"randomised", "leftpoint"}
    summary = read_summary(out / "summary.txt")
    assert float(summary["randomised.predicted_slope"]) == pytest.approx(0.8)
    assert float(summary["leftpoint.predicted_slope"]) == pytest.approx(0.3)


def test_iprobe_command(tmp_path):
    out = tmp_path / "probe"
    code = main(["iprobe", "--family", "product", "--alpha", "0.25",
                 "--ns", "8,16", "--q", "8", "--samples", "16", "--seed", "5",
                 "--out", str(out)])
    assert code == 0
    rows = read_csv(out / "points.csv")
    assert {r.scheme for r in rows} == {"I1", "I2"}
    summary = read_summary(out / "summary.txt")
    assert "I1.slope" in summary and "I2.slope" in summary


def test_selftest_command(tmp_path, capsys):
    out = tmp_path / "st"
    code = main(["selftest", "--out", str(out)])
    assert code == 0
    captured = capsys.readouterr().out
    assert "passed: " in captured
    summary = read_summary(out / "summary.txt")
    assert int(summary["failed"]) == 0


def test_strict_flag_turns_band_failure_into_exit_3(tmp_path):
    # The single-kink product drift superconverges, so the class-rate band
    # check fails; under --strict that is exit code 3.
    out = tmp_path / "strict"
    args = ["converge", "--family", "product", "--alpha", "0.3",
            "--ns", "8,16,32", "--nref", "512", "--samples", "24",
            "--seed", "3", "--out", str(out)]
    plain = main(args)
    summary = read_summary(out / "summary.txt")
    strict = main(args + ["--strict"])
    assert plain == 0
    if summary["band_check"] == "fail":
        assert strict == 3
    else:
        assert strict == 0


def test_workers_flag_does_not_change_csv(tmp_path):
    base = ["converge", "--family", "product", "--alpha", "0.3",
            "--ns", "8,16", "--nref", "256", "--samples", "130", "--seed", "9"]
    out1, out2 = tmp_path / "w1", tmp_path / "w2"
    assert main(base + ["--out", str(out1), "--workers", "1"]) == 0
    assert main(base + ["--out", str(out2), "--workers", "4"]) == 0
    assert (out1 / "points.csv").read_bytes() == (out2 / "points.csv").read_bytes()
