"""Strong-error ladders, order fits, scheme comparison, and quadrature-error probes.

Monte Carlo structure: sample m draws its Brownian path from the stream
``(m, "brownian", n_fine)`` and its offsets from ``(m, "offsets", n)`` (the
reference run uses ``(m, "offsets_ref", n_ref)``), so every per-sample result
is a pure function of the master seed and the sample index.  Samples are
processed in fixed-size chunks and aggregated in chunk order; the worker
count only decides which process evaluates a chunk, never what the chunk
computes, which is what makes outputs byte-identical across worker counts.

Ladders are coupled: all resolutions (and the reference) of sample m are
driven by the same fine Brownian path, so pathwise differences measure
scheme error rather than noise.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import RngStream
from .drifts import DriftSpec, ObservableSpec, drift_callable, observable_callable
from .errors import ConfigError
from .fitting import OrderFit, fit_points
from .integrators import (
    SCHEME_RANDOMISED,
    SCHEME_STANDARD,
    SCHEMES,
    _extension_batch,
    _run_scheme_batch,
)

CHUNK_SIZE = 64
BATCHES = 10

_TIME_INDEPENDENT = ("zero", "constant", "space_only")


def effective_time_exponent(drift: DriftSpec) -> float:
    """alpha entering the rate formulas; 1 for drifts without time dependence."""
    return 1.0 if drift.family in _TIME_INDEPENDENT else drift.alpha


def gamma_exponent(drift: DriftSpec) -> float:
    """Effective regularity alpha ^ (beta/2) governing the randomised rate."""
    return min(effective_time_exponent(drift), drift.beta / 2.0)


def predicted_randomised_order(drift: DriftSpec) -> float:
    """Worst-case class order 1/2 + gamma of the randomised scheme."""
    return 0.5 + gamma_exponent(drift)


def predicted_standard_order(drift: DriftSpec) -> float:
    """Worst-case class order alpha ^ (1/2 + beta/2) of the standard scheme."""
    return min(effective_time_exponent(drift), 0.5 + drift.beta / 2.0)


@dataclass(frozen=True)
class ErrorLadder:
    """Strong-error estimates across a resolution ladder for one scheme."""

    drift: DriftSpec
    scheme: str
    p: float
    ns: tuple[int, ...]
    n_ref: int
    samples: int
    estimates: np.ndarray
    std_errors: np.ndarray
    master_seed: int
    envelope_max: float

    def fit(self, predicted: float | None = None) -> OrderFit:
        return fit_points(self.ns, self.estimates, self.std_errors, predicted)


@dataclass(frozen=True)
class SchemeComparison:
    """Paired ladders for both schemes on identical Brownian randomness."""

    ladders: dict
    fits: dict
    slope_gap: float | None


@dataclass(frozen=True)
class IProbeResult:
    """L^p size of a prefix-sup quadrature-error functional along the scheme."""

    kind: str
    n: int
    q: int
    samples: int
    p: float
    estimate: float
    std_error: float
    master_seed: int
    envelope_max: float


def _chunk_ranges(samples: int) -> list[tuple[int, int]]:
    return [(s, min(s + CHUNK_SIZE, samples)) for s in range(0, samples, CHUNK_SIZE)]


def _map_chunks(fn, jobs, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def _chunk_positions(master_seed: int, start: int, stop: int, n_fine: int, d: int) -> np.ndarray:
    """Brownian node positions (C, n_fine+1, d) from per-sample streams."""
    root = RngStream(master_seed)
    count = stop - start
    positions = np.empty((count, n_fine + 1, d))
    positions[:, 0] = 0.0
    scale = math.sqrt(1.0 / n_fine)
    for i, m in enumerate(range(start, stop)):
        gen = root.child(m, "brownian", n_fine).generator()
        inc = gen.standard_normal((n_fine, d)) * scale
        np.cumsum(inc, axis=0, out=positions[i, 1:])
    return positions


def _chunk_taus(master_seed: int, start: int, stop: int, tag: str, n: int) -> np.ndarray:
    """Uniform offsets (C, n), strictly inside (0, 1), from per-sample streams."""
    root = RngStream(master_seed)
    taus = np.empty((stop - start, n))
    for i, m in enumerate(range(start, stop)):
        gen = root.child(m, tag, n).generator()
        u = gen.random(n)
        while True:
            zero = u == 0.0
            if not zero.any():
                break
            u[zero] = gen.random(int(zero.sum()))
        taus[i] = u
    return taus


def _envelope(states: np.ndarray, positions: np.ndarray, x0: np.ndarray) -> float:
    dev = states - positions - x0
    return float(np.linalg.norm(dev, axis=-1).max())


def _sup_error(ref_nodes: np.ndarray, states: np.ndarray) -> np.ndarray:
    diff = ref_nodes - states
    return np.linalg.norm(diff, axis=-1).max(axis=-1)


def _ladder_chunk(job) -> dict:
    drift, schemes, ns, n_ref, x0, master_seed, start, stop = job
    x0 = np.zeros(drift.d) if x0 is None else np.asarray(x0, dtype=float)
    positions = _chunk_positions(master_seed, start, stop, n_ref, drift.d)
    taus_ref = _chunk_taus(master_seed, start, stop, "offsets_ref", n_ref)

    ref = _run_scheme_batch(drift, positions, taus_ref, x0)
    envelope = _envelope(ref, positions, x0)

    errors = {scheme: np.empty((stop - start, len(ns))) for scheme in schemes}
    for col, n in enumerate(ns):
        q = n_ref // n
        coarse_pos = positions[:, ::q]
        ref_nodes = ref[:, ::q]
        taus_n = None
        for scheme in schemes:
            if scheme == SCHEME_RANDOMISED:
                if taus_n is None:
                    taus_n = _chunk_taus(master_seed, start, stop, "offsets", n)
                states = _run_scheme_batch(drift, coarse_pos, taus_n, x0)
            else:
                states = _run_scheme_batch(drift, coarse_pos, None, x0)
            envelope = max(envelope, _envelope(states, coarse_pos, x0))
            errors[scheme][:, col] = _sup_error(ref_nodes, states)
    return {"errors": errors, "envelope": envelope}


def _moment_estimate(values: np.ndarray, p: float) -> tuple[float, float]:
    """L^p average with a batch-means standard error mapped through the 1/p power."""
    powered = values**p
    mean_power = float(powered.mean())
    estimate = mean_power ** (1.0 / p)
    batch_means = np.array([b.mean() for b in np.array_split(powered, BATCHES)])
    se_power = float(batch_means.std(ddof=1) / math.sqrt(BATCHES))
    if mean_power == 0.0:
        return estimate, 0.0
    return estimate, se_power * estimate ** (1.0 - p) / p


def _validate_ladder(ns, n_ref: int, samples: int, p: float) -> tuple[int, ...]:
    ns = tuple(int(n) for n in ns)
    if len(ns) == 0:
        raise ConfigError("ns: resolution ladder must not be empty")
    if any(n < 1 for n in ns):
        raise ConfigError("ns: resolutions must be positive integers")
    if list(ns) != sorted(set(ns)):
        raise ConfigError("ns: resolutions must be strictly ascending")
    if n_ref < 16 * max(ns):
        raise ConfigError(f"n_ref: must be at least 16*max(ns) = {16 * max(ns)}, got {n_ref}")
    for n in ns:
        if n_ref % n != 0:
            raise ConfigError(f"n_ref: {n_ref} is not divisible by ladder resolution {n}")
    if samples < 10:
        raise ConfigError(f"samples: need at least 10 for batch-means errors, got {samples}")
    if p < 1.0:
        raise ConfigError(f"p: moment order must be >= 1, got {p}")
    return ns


def _run_ladders(
    drift: DriftSpec,
    schemes: tuple[str, ...],
    ns,
    n_ref: int,
    samples: int,
    p: float,
    master_seed: int,
    workers: int = 1,
    x0=None,
) -> dict:
    ns = _validate_ladder(ns, n_ref, samples, p)
    for scheme in schemes:
        if scheme not in SCHEMES:
            raise ConfigError(f"scheme: must be one of {SCHEMES}, got {scheme!r}")
    x0_key = None if x0 is None else tuple(float(v) for v in np.atleast_1d(x0))
    jobs = [
        (drift, schemes, ns, n_ref, x0_key, master_seed, start, stop)
        for start, stop in _chunk_ranges(samples)
    ]
    results = _map_chunks(_ladder_chunk, jobs, workers)

    envelope = max(r["envelope"] for r in results)
    ladders = {}
    for scheme in schemes:
        per_sample = np.concatenate([r["errors"][scheme] for r in results], axis=0)
        estimates = np.empty(len(ns))
        std_errors = np.empty(len(ns))
        for col in range(len(ns)):
            estimates[col], std_errors[col] = _moment_estimate(per_sample[:, col], p)
        ladders[scheme] = ErrorLadder(
            drift=drift,
            scheme=scheme,
            p=p,
            ns=ns,
            n_ref=n_ref,
            samples=samples,
            estimates=estimates,
            std_errors=std_errors,
            master_seed=master_seed,
            envelope_max=envelope,
        )
    return ladders


def run_ladder(
    drift: DriftSpec,
    scheme: str,
    ns,
    n_ref: int,
    samples: int,
    p: float,
    master_seed: int,
    workers: int = 1,
    x0=None,
) -> ErrorLadder:
    """Coupled strong-error ladder for one scheme against the reference run."""
    return _run_ladders(drift, (scheme,), ns, n_ref, samples, p, master_seed, workers, x0)[scheme]


def strong_error_estimate(
    drift: DriftSpec,
    scheme: str,
    n: int,
    n_ref: int,
    samples: int,
    p: float,
    master_seed: int,
    workers: int = 1,
    x0=None,
) -> tuple[float, float]:
    """L^p strong error at a single resolution; (estimate, standard error)."""
    ladder = run_ladder(drift, scheme, (n,), n_ref, samples, p, master_seed, workers, x0)
    return float(ladder.estimates[0]), float(ladder.std_errors[0])


def fit_order(ladder: ErrorLadder, predicted: float | None = None) -> OrderFit:
    """Least-squares order fit of a ladder; degenerate ladders are flagged, not raised."""
    return ladder.fit(predicted)


def compare_schemes(
    drift: DriftSpec,
    ns,
    n_ref: int,
    samples: int,
    p: float,
    master_seed: int,
    workers: int = 1,
    x0=None,
) -> SchemeComparison:
    """Both schemes on identical Brownian randomness, with fitted orders and gap."""
    ladders = _run_ladders(
        drift, (SCHEME_STANDARD, SCHEME_RANDOMISED), ns, n_ref, samples, p,
        master_seed, workers, x0,
    )
    fits = {
        SCHEME_STANDARD: ladders[SCHEME_STANDARD].fit(predicted_standard_order(drift)),
        SCHEME_RANDOMISED: ladders[SCHEME_RANDOMISED].fit(predicted_randomised_order(drift)),
    }
    gap = None
    if not fits[SCHEME_STANDARD].degenerate and not fits[SCHEME_RANDOMISED].degenerate:
        gap = fits[SCHEME_RANDOMISED].slope - fits[SCHEME_STANDARD].slope
    return SchemeComparison(ladders=ladders, fits=fits, slope_gap=gap)


def _probe_sups(
    drift: DriftSpec,
    g2: ObservableSpec | None,
    states: np.ndarray,
    fine_positions: np.ndarray,
    taus: np.ndarray,
    q: int,
    x0: np.ndarray,
) -> np.ndarray:
    """Prefix-sup of the (optionally weighted) drift-mismatch integral per sample.

    Integrand on the fine grid (left endpoints):
        f(r, X_r) - f(t*, X_{kappa(r)})          for the plain probe,
      ( f_0(r, X_r) - f_0(t*, X_{kappa(r)}) ) * g2(r, X_r)   when g2 is given,
    where X_r is the continuous extension and t* the frozen randomised time of
    r's subinterval.  Prefix sums use the left-Riemann rule at step 1/(q n).
    """
    m, n_plus_1, d = states.shape
    n = n_plus_1 - 1
    nf = q * n
    hf = 1.0 / nf
    f = drift_callable(drift)

    fine_states = _extension_batch(
        drift, states, fine_positions, taus, q, x0, SCHEME_RANDOMISED
    )
    k = np.arange(nf)
    j = k // q
    r = k / nf
    t_eval = (np.arange(n) + taus) / n        # (M, n)
    t_eval_fine = t_eval[:, j]                # (M, nf)
    anchor_drift = f(t_eval_fine, states[:, j])
    delta = f(r, fine_states[:, :nf]) - anchor_drift  # (M, nf, d)

    if g2 is None:
        prefix = np.zeros((m, nf + 1, d))
        np.cumsum(delta * hf, axis=1, out=prefix[:, 1:])
        if d == 1:
            return np.abs(prefix[:, :, 0]).max(axis=1)
        return np.linalg.norm(prefix, axis=-1).max(axis=1)

    weights = observable_callable(g2)(r, fine_states[:, :nf])  # (M, nf)
    contributions = (delta[:, :, 0] * weights) * hf
    prefix = np.zeros((m, nf + 1))
    np.cumsum(contributions, axis=1, out=prefix[:, 1:])
    return np.abs(prefix).max(axis=1)


def _probe_chunk(job) -> dict:
    drift, g2, n, q, x0, master_seed, start, stop = job
    x0 = np.zeros(drift.d) if x0 is None else np.asarray(x0, dtype=float)
    nf = q * n
    fine_positions = _chunk_positions(master_seed, start, stop, nf, drift.d)
    coarse_positions = fine_positions[:, ::q]
    taus = _chunk_taus(master_seed, start, stop, "offsets", n)
    states = _run_scheme_batch(drift, coarse_positions, taus, x0)
    sups = _probe_sups(drift, g2, states, fine_positions, taus, q, x0)
    return {"sups": sups, "envelope": _envelope(states, coarse_positions, x0)}


def _measure_probe(
    kind: str,
    drift: DriftSpec,
    g2: ObservableSpec | None,
    n: int,
    q: int,
    samples: int,
    p: float,
    master_seed: int,
    workers: int,
    x0,
) -> IProbeResult:
    if q < 8:
        raise ConfigError(f"q: fine factor must be at least 8, got {q}")
    if n < 1:
        raise ConfigError(f"n: resolution must be positive, got {n}")
    if samples < 10:
        raise ConfigError(f"samples: need at least 10, got {samples}")
    if p < 1.0:
        raise ConfigError(f"p: moment order must be >= 1, got {p}")
    if g2 is not None and g2.d != drift.d:
        raise ConfigError(f"observable: dimension {g2.d} does not match drift d={drift.d}")
    x0_key = None if x0 is None else tuple(float(v) for v in np.atleast_1d(x0))
    jobs = [
        (drift, g2, n, q, x0_key, master_seed, start, stop)
        for start, stop in _chunk_ranges(samples)
    ]
    results = _map_chunks(_probe_chunk, jobs, workers)
    sups = np.concatenate([r["sups"] for r in results])
    estimate, std_error = _moment_estimate(sups, p)
    return IProbeResult(
        kind=kind,
        n=n,
        q=q,
        samples=samples,
        p=p,
        estimate=estimate,
        std_error=std_error,
        master_seed=master_seed,
        envelope_max=max(r["envelope"] for r in results),
    )


def measure_I1(
    drift: DriftSpec,
    n: int,
    q: int,
    samples: int,
    p: float,
    master_seed: int,
    workers: int = 1,
    x0=None,
) -> IProbeResult:
    """L^p prefix-sup of the raw drift-mismatch integral along the randomised scheme."""
    return _measure_probe("I1", drift, None, n, q, samples, p, master_seed, workers, x0)


def measure_I2(
    drift: DriftSpec,
    g2: ObservableSpec,
    n: int,
    q: int,
    samples: int,
    p: float,
    master_seed: int,
    workers: int = 1,
    x0=None,
) -> IProbeResult:
    """Like ``measure_I1`` but weighted by the observable and using drift component 0."""
    return _measure_probe("I2", drift, g2, n, q, samples, p, master_seed, workers, x0)


def probe_trajectory_value(
    drift: DriftSpec,
    fine_path,
    offsets,
    q: int,
    g2: ObservableSpec | None = None,
    x0=None,
) -> float:
    """Single-trajectory probe value for an explicitly given path and offsets.

    Exposes the probe integrand on controlled inputs, which is how the
    hand-checkable cases are verified.
    """
    from .core import coarsen_path

    n = fine_path.n_fine // q
    if fine_path.n_fine != q * n:
        raise ConfigError(f"q: {q} does not divide fine resolution {fine_path.n_fine}")
    x0 = np.zeros(drift.d) if x0 is None else np.asarray(x0, dtype=float)
    coarse = coarsen_path(fine_path, q)
    taus = offsets.taus[None, :n]
    states = _run_scheme_batch(drift, coarse.positions[None], taus, x0)
    sups = _probe_sups(drift, g2, states, fine_path.positions[None], taus, q, x0)
    return float(sups[0])
