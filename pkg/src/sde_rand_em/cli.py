"""Command-line front end: configuration, orchestration, and result persistence.

Commands
    converge    strong-error ladder for one scheme, with order fit
    compare     both schemes on shared noise, with slope gap
    quadrature  randomised vs left-point quadrature ladders for a time integrand
    iprobe      prefix-sup drift-mismatch probes along the randomised scheme
    selftest    quick oracle battery with pass counts

Every run writes a delimited per-point file (``points.csv``) and a
line-oriented ``summary.txt`` echoing the complete configuration (defaults
included) next to the results; ``--svg`` additionally renders a log-log
figure.  Exit codes: 0 success, 2 configuration error, 3 failed
prediction-band check under ``--strict``.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, fields
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .core import RngStream
from .drifts import DEFAULT_ANCHOR, FAMILIES, DriftSpec, ObservableSpec
from .errors import ConfigError
from .experiments import (
    SCHEME_RANDOMISED,
    SCHEME_STANDARD,
    compare_schemes,
    gamma_exponent,
    measure_I1,
    measure_I2,
    predicted_randomised_order,
    predicted_standard_order,
    run_ladder,
)
from .fitting import fit_points
from .quadrature import (
    Affine,
    PowerKink,
    WeierstrassFunction,
    quadrature_order_experiment,
)
from .report import ResultRow, render_ladder_figure, write_csv, write_summary
from .selftest import run_selftest

COMMANDS = ("converge", "compare", "quadrature", "iprobe", "selftest")

_DEFAULTS = {
    "family": "product",
    "alpha": 0.5,
    "beta": 1.0,
    "amplitude": 1.0,
    "d": 1,
    "anchor": DEFAULT_ANCHOR,
    "truncation": 12,
    "scheme": SCHEME_RANDOMISED,
    "ns": (16, 32, 64, 128, 256, 512),
    "n_ref": 8192,
    "samples": 500,
    "p": 2.0,
    "q": 16,
    "master_seed": 1,
    "output_dir": "out",
    "emit_svg": False,
    "strict": False,
    "workers": 1,
}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run configuration; every field appears in the summary echo."""

    command: str
    family: str
    alpha: float
    beta: float
    amplitude: float
    d: int
    anchor: float
    truncation: int
    scheme: str
    ns: tuple[int, ...]
    n_ref: int
    samples: int
    p: float
    q: int
    master_seed: int
    output_dir: str
    emit_svg: bool
    strict: bool
    workers: int

    def drift(self) -> DriftSpec:
        return DriftSpec(
            family=self.family,
            alpha=self.alpha,
            beta=self.beta,
            amplitude=self.amplitude,
            d=self.d,
            anchor=self.anchor,
            truncation=self.truncation,
        )


def _parse_ns(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"ns: cannot parse resolution list {text!r}") from None


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sde-rand-em",
        description="Strong-convergence experiments for Euler-Maruyama schemes with rough drift",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        cp = sub.add_parser(command)
        cp.add_argument("--config", type=str, default=None,
                        help="JSON file with defaults; explicit flags override it")
        cp.add_argument("--family", choices=FAMILIES, default=None)
        cp.add_argument("--alpha", type=float, default=None)
        cp.add_argument("--beta", type=float, default=None)
        cp.add_argument("--K", dest="amplitude", type=float, default=None)
        cp.add_argument("--d", type=int, default=None)
        cp.add_argument("--anchor", type=float, default=None)
        cp.add_argument("--L", dest="truncation", type=int, default=None)
        cp.add_argument("--scheme", choices=(SCHEME_STANDARD, SCHEME_RANDOMISED), default=None)
        cp.add_argument("--ns", type=str, default=None, help="comma-separated resolutions")
        cp.add_argument("--nref", dest="n_ref", type=int, default=None)
        cp.add_argument("--samples", type=int, default=None)
        cp.add_argument("--p", type=float, default=None)
        cp.add_argument("--seed", dest="master_seed", type=int, default=None)
        cp.add_argument("--q", type=int, default=None)
        cp.add_argument("--out", dest="output_dir", type=str, default=None)
        cp.add_argument("--svg", dest="emit_svg", action="store_const", const=True, default=None)
        cp.add_argument("--strict", action="store_const", const=True, default=None)
        cp.add_argument("--workers", type=int, default=None)
    return parser


def build_config(argv: list[str]) -> RunConfig:
    args = vars(_build_parser().parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config")

    resolved = dict(_DEFAULTS)
    if config_path is not None:
        try:
            loaded = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: cannot read {config_path}: {exc}") from None
        unknown = set(loaded) - set(_DEFAULTS)
        if unknown:
            raise ConfigError(f"config: unknown keys {sorted(unknown)}")
        resolved.update(loaded)
    for key, value in args.items():
        if value is not None:
            resolved[key] = value
    if isinstance(resolved["ns"], str):
        resolved["ns"] = _parse_ns(resolved["ns"])
    resolved["ns"] = tuple(int(n) for n in resolved["ns"])

    config = RunConfig(command=command, **resolved)
    _validate(config)
    return config


def _validate(config: RunConfig) -> None:
    try:
        drift = config.drift()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if config.command in ("converge", "compare"):
        if config.n_ref < 16 * max(config.ns):
            raise ConfigError(
                f"n_ref: must be at least 16*max(ns) = {16 * max(config.ns)}, got {config.n_ref}"
            )
        for n in config.ns:
            if config.n_ref % n != 0:
                raise ConfigError(f"n_ref: {config.n_ref} not divisible by ladder point {n}")
    if config.command in ("converge", "compare", "iprobe") and config.samples < 10:
        raise ConfigError(f"samples: need at least 10, got {config.samples}")
    if config.command == "quadrature" and config.samples < 100:
        raise ConfigError(f"samples: quadrature ladders need at least 100, got {config.samples}")
    if list(config.ns) != sorted(set(config.ns)) or not config.ns:
        raise ConfigError("ns: resolutions must be non-empty and strictly ascending")
    if config.workers < 1:
        raise ConfigError(f"workers: must be at least 1, got {config.workers}")
    if config.q < 8 and config.command == "iprobe":
        raise ConfigError(f"q: fine factor must be at least 8, got {config.q}")
    # The Weierstrass profile is rough only down to scale 2**-truncation; the
    # ladder must stay far above that floor or measured orders drift upward.
    if drift.family == "weierstrass" and config.command != "selftest":
        if 4 * max(config.ns) > 2**drift.truncation:
            raise ConfigError(
                f"ns: max resolution {max(config.ns)} resolves the Weierstrass "
                f"roughness floor 2**-{drift.truncation}; raise L or shorten the ladder"
            )


def _config_entries(config: RunConfig) -> list[tuple[str, object]]:
    entries = []
    for field_ in fields(config):
        value = getattr(config, field_.name)
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        entries.append((f"config.{field_.name}", value))
    return entries


def _time_function(config: RunConfig):
    """Map the drift's time profile onto a corpus integrand for quadrature runs."""
    if config.family in ("zero",):
        return Affine(0.0, 0.0)
    if config.family in ("constant", "space_only"):
        return Affine(config.amplitude, 0.0)
    if config.family == "weierstrass":
        return WeierstrassFunction(config.alpha, config.anchor,
                                   level=config.truncation, scale=config.amplitude)
    return PowerKink(config.alpha, config.anchor, scale=config.amplitude)


def _band_text(ok: bool | None) -> str:
    if ok is None:
        return "degenerate-zero"
    return "pass" if ok else "fail"


def _finish(
    config: RunConfig,
    rows: list[ResultRow],
    extra_entries: list[tuple[str, object]],
    figure_series: list[dict] | None,
    started: float,
    band_checks: list[bool | None],
) -> int:
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(out_dir / "points.csv", rows)

    entries: list[tuple[str, object]] = [("command", config.command)]
    entries.extend(_config_entries(config))
    entries.extend(extra_entries)
    entries.append(("tool_version", __version__))
    entries.append(("timestamp", datetime.now(timezone.utc).isoformat()))
    entries.append(("wall_clock_s", time.perf_counter() - started))
    write_summary(out_dir / "summary.txt", entries)

    if config.emit_svg and figure_series:
        render_ladder_figure(
            out_dir / "errors.svg",
            figure_series,
            title=f"{config.command}: {config.family} drift",
        )
    failed = any(ok is False for ok in band_checks)
    if config.strict and failed:
        return 3
    return 0


def _run_converge(config: RunConfig, started: float) -> int:
    drift = config.drift()
    ladder = run_ladder(
        drift, config.scheme, config.ns, config.n_ref, config.samples,
        config.p, config.master_seed, config.workers,
    )
    predicted = (
        predicted_randomised_order(drift)
        if config.scheme == SCHEME_RANDOMISED
        else predicted_standard_order(drift)
    )
    fit = ladder.fit(predicted)
    rows = [
        ResultRow(n, config.scheme, config.p, float(est), float(se),
                  config.samples, config.master_seed)
        for n, est, se in zip(ladder.ns, ladder.estimates, ladder.std_errors)
    ]
    ok = fit.prediction_within_band()
    entries = [
        ("fit.slope", fit.slope),
        ("fit.intercept", fit.intercept),
        ("fit.r_squared", fit.r_squared),
        ("fit.slope_stderr", fit.slope_stderr),
        ("fit.flag", fit.note or "ok"),
        ("predicted_slope", predicted),
        ("gamma", gamma_exponent(drift)),
        ("band_check", _band_text(ok)),
        ("envelope_max", ladder.envelope_max),
        ("drift_bound", drift.sup_bound()),
    ]
    series = [{
        "label": config.scheme,
        "ns": ladder.ns,
        "estimates": ladder.estimates,
        "std_errors": ladder.std_errors,
        "fit": fit,
    }]
    return _finish(config, rows, entries, series, started, [ok])


def _run_compare(config: RunConfig, started: float) -> int:
    drift = config.drift()
    comparison = compare_schemes(
        drift, config.ns, config.n_ref, config.samples, config.p,
        config.master_seed, config.workers,
    )
    rows = []
    series = []
    entries = []
    checks = []
    for scheme in (SCHEME_STANDARD, SCHEME_RANDOMISED):
        ladder = comparison.ladders[scheme]
        fit = comparison.fits[scheme]
        rows.extend(
            ResultRow(n, scheme, config.p, float(est), float(se),
                      config.samples, config.master_seed)
            for n, est, se in zip(ladder.ns, ladder.estimates, ladder.std_errors)
        )
        entries.extend([
            (f"{scheme}.slope", fit.slope),
            (f"{scheme}.r_squared", fit.r_squared),
            (f"{scheme}.slope_stderr", fit.slope_stderr),
            (f"{scheme}.predicted_slope", fit.predicted),
            (f"{scheme}.flag", fit.note or "ok"),
        ])
        series.append({
            "label": scheme,
            "ns": ladder.ns,
            "estimates": ladder.estimates,
            "std_errors": ladder.std_errors,
            "fit": fit,
        })
        checks.append(fit.prediction_within_band())
    entries.append(("slope_gap", comparison.slope_gap if comparison.slope_gap is not None
                    else "degenerate-zero"))
    entries.append(("band_check_standard", _band_text(checks[0])))
    entries.append(("band_check_randomised", _band_text(checks[1])))
    entries.append(("envelope_max",
                    max(l.envelope_max for l in comparison.ladders.values())))
    return _finish(config, rows, entries, series, started, checks)


def _run_quadrature(config: RunConfig, started: float) -> int:
    g = _time_function(config)
    stream = RngStream(config.master_seed)
    result = quadrature_order_experiment(g, config.ns, config.samples, stream, config.p)
    alpha_eff = config.alpha if not isinstance(g, Affine) else 1.0
    rand_fit = fit_points(result.ns, result.randomised_errors, predicted=0.5 + alpha_eff)
    det_fit = fit_points(result.ns, result.leftpoint_errors, predicted=alpha_eff)
    rows = [
        ResultRow(n, "randomised", config.p, float(err), 0.0, config.samples,
                  config.master_seed)
        for n, err in zip(result.ns, result.randomised_errors)
    ] + [
        ResultRow(n, "leftpoint", config.p, float(err), 0.0, config.samples,
                  config.master_seed)
        for n, err in zip(result.ns, result.leftpoint_errors)
    ]
    ok_rand = rand_fit.prediction_within_band()
    ok_det = det_fit.prediction_within_band()
    entries = [
        ("integrand", type(g).__name__),
        ("randomised.slope", rand_fit.slope),
        ("randomised.predicted_slope", rand_fit.predicted),
        ("randomised.flag", rand_fit.note or "ok"),
        ("leftpoint.slope", det_fit.slope),
        ("leftpoint.predicted_slope", det_fit.predicted),
        ("leftpoint.flag", det_fit.note or "ok"),
        ("band_check_randomised", _band_text(ok_rand)),
        ("band_check_leftpoint", _band_text(ok_det)),
    ]
    series = [
        {"label": "randomised", "ns": result.ns, "estimates": result.randomised_errors,
         "fit": rand_fit},
        {"label": "leftpoint", "ns": result.ns, "estimates": result.leftpoint_errors,
         "fit": det_fit},
    ]
    return _finish(config, rows, entries, series, started, [ok_rand, ok_det])


def _run_iprobe(config: RunConfig, started: float) -> int:
    drift = config.drift()
    g2 = ObservableSpec("smooth_decay", config.d)
    rows = []
    estimates = {"I1": [], "I2": []}
    envelope = 0.0
    for n in config.ns:
        r1 = measure_I1(drift, n, config.q, config.samples, config.p,
                        config.master_seed, config.workers)
        r2 = measure_I2(drift, g2, n, config.q, config.samples, config.p,
                        config.master_seed, config.workers)
        for res in (r1, r2):
            rows.append(ResultRow(n, res.kind, config.p, res.estimate, res.std_error,
                                  config.samples, config.master_seed))
            estimates[res.kind].append(res)
            envelope = max(envelope, res.envelope_max)
    predicted = 0.5 + gamma_exponent(drift)
    entries: list[tuple[str, object]] = [("predicted_slope", predicted)]
    series = []
    checks = []
    for kind in ("I1", "I2"):
        results = estimates[kind]
        fit = fit_points(
            [r.n for r in results],
            [r.estimate for r in results],
            [r.std_error for r in results],
            predicted=predicted,
        )
        ok = fit.prediction_within_band()
        checks.append(ok)
        entries.extend([
            (f"{kind}.slope", fit.slope),
            (f"{kind}.flag", fit.note or "ok"),
            (f"{kind}.band_check", _band_text(ok)),
        ])
        series.append({
            "label": kind,
            "ns": [r.n for r in results],
            "estimates": [r.estimate for r in results],
            "std_errors": [r.std_error for r in results],
            "fit": fit,
        })
    entries.append(("envelope_max", envelope))
    return _finish(config, rows, entries, series, started, checks)


def _run_selftest(config: RunConfig, started: float) -> int:
    passed, failed, lines = run_selftest()
    for line in lines:
        print(line)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries: list[tuple[str, object]] = [("command", "selftest")]
    entries.extend(_config_entries(config))
    entries.extend((f"check.{i}", line) for i, line in enumerate(lines[:-2]))
    entries.append(("passed", passed))
    entries.append(("failed", failed))
    entries.append(("tool_version", __version__))
    entries.append(("timestamp", datetime.now(timezone.utc).isoformat()))
    entries.append(("wall_clock_s", time.perf_counter() - started))
    write_summary(out_dir / "summary.txt", entries)
    if failed and config.strict:
        return 3
    return 0


def run(config: RunConfig) -> int:
    """Execute a validated configuration; returns the process exit code."""
    started = time.perf_counter()
    handlers = {
        "converge": _run_converge,
        "compare": _run_compare,
        "quadrature": _run_quadrature,
        "iprobe": _run_iprobe,
        "selftest": _run_selftest,
    }
    return handlers[config.command](config, started)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = build_config(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    raise SystemExit(main())
