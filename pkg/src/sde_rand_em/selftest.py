"""Quick self-contained oracle checks behind the ``selftest`` CLI command.

Each check is small enough to run in well under a second; together they cover
the exactly-known values (grid maps, quadrature on constants and affine
integrands, zero/constant drift trajectories) plus the determinism contracts.
"""

from __future__ import annotations

import tempfile
from pathlib import Path

import numpy as np

from .core import (
    RandomOffsets,
    RngStream,
    coarsen_path,
    kappa,
    kappa_tau,
    sample_brownian,
    sample_offsets,
)
from .drifts import DriftSpec, ObservableSpec
from .experiments import measure_I1, measure_I2, run_ladder
from .integrators import simulate_randomised_em, simulate_standard_em
from .quadrature import (
    Affine,
    PowerKink,
    integral_oracle,
    leftpoint_quadrature,
    martingale_diagnostic,
    randomised_quadrature,
)
from .report import ResultRow, read_csv, write_csv


def _check_kappa():
    assert kappa(4, 0.6) == 0.5
    assert kappa(4, 0.5) == 0.5
    assert kappa(10, 0.99) == 0.9
    assert kappa(7, 1.0) == 1.0


def _check_kappa_tau():
    taus = RandomOffsets(np.array([0.1, 0.2, 0.5, 0.9]))
    assert abs(kappa_tau(4, 0.6, taus) - 0.625) < 1e-15
    assert abs(kappa_tau(2, 0.0, RandomOffsets(np.array([0.25, 0.5]))) - 0.125) < 1e-15


def _check_coarsen():
    path = sample_brownian(16, 2, RngStream(7).child(0, "brownian", 16))
    coarse = coarsen_path(path, 4)
    assert np.array_equal(coarse.positions, path.positions[::4])
    twice = coarsen_path(coarsen_path(path, 2), 2)
    assert np.array_equal(twice.increments, coarsen_path(path, 4).increments)


def _check_offsets():
    s = RngStream(11).child(3, "offsets", 64)
    a = sample_offsets(64, s)
    b = sample_offsets(64, s)
    assert np.array_equal(a.taus, b.taus)
    assert np.all((a.taus > 0) & (a.taus < 1))


def _check_quadrature_constant():
    run = randomised_quadrature(Affine(1.0, 0.0), 8, RandomOffsets(np.full(8, 0.5)))
    assert np.array_equal(run.values, np.arange(9) / 8)


def _check_quadrature_affine():
    run = randomised_quadrature(Affine(0.0, 1.0), 2, RandomOffsets(np.array([0.5, 0.5])))
    assert abs(run.values[2] - 0.5) < 1e-15
    run = leftpoint_quadrature(Affine(0.0, 1.0), 2)
    assert abs(run.values[2] - 0.25) < 1e-15


def _check_oracle():
    assert abs(integral_oracle(Affine(0.0, 1.0), 1.0) - 0.5) < 1e-15
    val = integral_oracle(PowerKink(0.5, 0.5), 1.0)
    assert abs(val - 2.0 * 0.5**1.5 / 1.5) < 1e-14


def _check_martingale_constant_exact():
    report = martingale_diagnostic(Affine(3.7, 0.0), 16, 200, RngStream(5).child("selftest"))
    assert np.all(report.step_means == 0.0)
    assert report.n_flagged == 0


def _check_zero_drift_exact():
    drift = DriftSpec("zero", d=2)
    ladder = run_ladder(drift, "randomised", (8, 16), 256, 16, 2.0, master_seed=3)
    assert float(ladder.estimates.max()) < 1e-12


def _check_constant_drift_closed_form():
    drift = DriftSpec("constant", d=1)
    path = sample_brownian(64, 1, RngStream(9).child(0, "brownian", 64))
    traj = simulate_standard_em(drift, path)
    t = np.arange(65)[:, None] / 64
    exact = drift.constant_vector() * t + path.positions
    assert float(np.abs(traj.states - exact).max()) < 1e-12


def _check_scheme_agreement():
    drift = DriftSpec("space_only", beta=1.0, d=1)
    path = sample_brownian(32, 1, RngStream(13).child(0, "brownian", 32))
    offsets = sample_offsets(32, RngStream(13).child(0, "offsets", 32))
    a = simulate_standard_em(drift, path)
    b = simulate_randomised_em(drift, path, offsets)
    assert np.array_equal(a.states, b.states)


def _check_probe_consistency():
    drift = DriftSpec("product", alpha=0.5, beta=1.0, d=1)
    i1 = measure_I1(drift, 16, 8, 16, 2.0, master_seed=21)
    i2 = measure_I2(drift, ObservableSpec("unit", 1), 16, 8, 16, 2.0, master_seed=21)
    assert i1.estimate == i2.estimate


def _check_csv_round_trip():
    rows = [
        ResultRow(16, "randomised", 2.0, 0.034567891234567892, 0.001234, 500, 42),
        ResultRow(8, "randomised", 2.0, 0.07123456789, 0.003, 500, 42),
    ]
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "points.csv"
        write_csv(path, rows)
        first = path.read_bytes()
        write_csv(path, read_csv(path))
        assert path.read_bytes() == first


CHECKS = [
    ("grid map kappa", _check_kappa),
    ("grid map kappa_tau", _check_kappa_tau),
    ("path coarsening couples bit-exactly", _check_coarsen),
    ("offsets deterministic and open-interval", _check_offsets),
    ("quadrature exact on constants", _check_quadrature_constant),
    ("quadrature affine closed form", _check_quadrature_affine),
    ("integral oracle closed forms", _check_oracle),
    ("martingale increments exact on constants", _check_martingale_constant_exact),
    ("zero-drift strong error vanishes", _check_zero_drift_exact),
    ("constant-drift closed form", _check_constant_drift_closed_form),
    ("schemes agree on time-independent drift", _check_scheme_agreement),
    ("unit-observable probe equals plain probe", _check_probe_consistency),
    ("csv round trip byte-identical", _check_csv_round_trip),
]


def run_selftest() -> tuple[int, int, list[str]]:
    """Run all checks; returns (passed, failed, report lines)."""
    passed = 0
    failed = 0
    lines = []
    for name, check in CHECKS:
        try:
            check()
        except Exception as exc:  # noqa: BLE001 - report any failure mode
            failed += 1
            lines.append(f"FAIL {name}: {exc!r}")
        else:
            passed += 1
            lines.append(f"PASS {name}")
    lines.append(f"passed: {passed}")
    lines.append(f"failed: {failed}")
    return passed, failed, lines
