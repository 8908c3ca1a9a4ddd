"""Euler-Maruyama integrators: left-endpoint and randomised-time variants.

Both schemes advance

    X_{j+1} = X_j + f(t*, X_j) / n + (B(t_{j+1}) - B(t_j)),

with t* = t_j for the standard scheme and t* = t_j + tau_j/n for the
randomised one (subinterval j uses ``offsets.taus[j]``).

States are maintained internally as  x0 + (drift integral) + B(t_j): the
drift accumulator is carried separately and recombined with the Brownian node
positions at every step.  This is the same recursion up to float rounding,
but it makes the zero-drift output equal x0 + B bit-for-bit and keeps coarse,
fine, and reference runs exactly coupled through shared node positions, so
exactness checks can assert at 1e-12 instead of eyeballing noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    BrownianPath,
    RandomOffsets,
    RngStream,
    TimeGrid,
    sample_offsets,
)
from .drifts import DriftSpec, drift_callable
from .errors import CouplingError

SCHEME_STANDARD = "standard"
SCHEME_RANDOMISED = "randomised"
SCHEMES = (SCHEME_STANDARD, SCHEME_RANDOMISED)


@dataclass(frozen=True)
class DiscreteTrajectory:
    """Scheme output on the nodes of ``grid``, with the inputs that produced it."""

    grid: TimeGrid
    states: np.ndarray
    scheme: str
    drift: DriftSpec
    x0: np.ndarray
    path: BrownianPath
    offsets: RandomOffsets | None = None

    @property
    def d(self) -> int:
        return self.states.shape[1]

    def drift_deviation(self) -> float:
        """max_j |X_j - x0 - B(t_j)|: bounded by sup|f| for any bounded drift."""
        dev = self.states - self.path.positions - self.x0
        return float(np.linalg.norm(dev, axis=-1).max())


@dataclass(frozen=True)
class ContinuousExtension:
    """The scheme's continuous-time interpolant evaluated on a finer grid."""

    base: DiscreteTrajectory
    fine_grid: TimeGrid
    fine_states: np.ndarray


def _as_x0(x0, d: int) -> np.ndarray:
    if x0 is None:
        return np.zeros(d)
    arr = np.atleast_1d(np.asarray(x0, dtype=float))
    if arr.shape != (d,):
        raise ValueError(f"x0 must have shape ({d},), got {arr.shape}")
    return arr


def _run_scheme_batch(
    drift: DriftSpec,
    positions: np.ndarray,
    taus: np.ndarray | None,
    x0: np.ndarray,
) -> np.ndarray:
    """Advance a batch of trajectories; ``positions`` has shape (M, n+1, d).

    ``taus`` is (M, n) for the randomised scheme or None for the standard one.
    """
    f = drift_callable(drift)
    m, n_plus_1, d = positions.shape
    n = n_plus_1 - 1
    h = 1.0 / n
    drift_integral = np.zeros((m, d))
    states = np.empty((m, n_plus_1, d))
    states[:, 0] = x0
    for j in range(n):
        current = x0 + drift_integral + positions[:, j]
        t_eval = j * h if taus is None else (j + taus[:, j]) * h
        drift_integral = drift_integral + f(t_eval, current) * h
        states[:, j + 1] = x0 + drift_integral + positions[:, j + 1]
    if not np.isfinite(states).all():
        raise FloatingPointError("non-finite state encountered during integration")
    return states


def simulate_standard_em(drift: DriftSpec, path: BrownianPath, x0=None) -> DiscreteTrajectory:
    """Left-endpoint Euler-Maruyama on the grid carried by ``path``."""
    if path.d != drift.d:
        raise ValueError(f"path dimension {path.d} does not match drift d={drift.d}")
    x0 = _as_x0(x0, drift.d)
    states = _run_scheme_batch(drift, path.positions[None], None, x0)[0]
    return DiscreteTrajectory(TimeGrid(path.n_fine), states, SCHEME_STANDARD, drift, x0, path)


def simulate_randomised_em(
    drift: DriftSpec, path: BrownianPath, offsets: RandomOffsets, x0=None
) -> DiscreteTrajectory:
    """Randomised Euler-Maruyama: drift evaluated at a uniform node per step."""
    if path.d != drift.d:
        raise ValueError(f"path dimension {path.d} does not match drift d={drift.d}")
    n = path.n_fine
    if offsets.n < n:
        raise ValueError(f"offsets too short: have {offsets.n}, need {n}")
    x0 = _as_x0(x0, drift.d)
    states = _run_scheme_batch(drift, path.positions[None], offsets.taus[None, :n], x0)[0]
    return DiscreteTrajectory(
        TimeGrid(n), states, SCHEME_RANDOMISED, drift, x0, path, offsets
    )


def simulate_reference(
    drift: DriftSpec, fine_path: BrownianPath, x0, stream: RngStream
) -> DiscreteTrajectory:
    """Reference proxy for the exact solution: randomised EM on the finest grid.

    Offsets come from the dedicated ``offsets_ref`` sub-stream, independent of
    the offsets of any coarse run under comparison, while the Brownian path is
    exactly the one the coarse runs coarsen from.
    """
    offsets = sample_offsets(
        fine_path.n_fine, stream.child("offsets_ref", fine_path.n_fine)
    )
    return simulate_randomised_em(drift, fine_path, offsets, x0)


def _frozen_times(scheme: str, n: int, taus: np.ndarray | None) -> np.ndarray:
    """Per-subinterval drift evaluation times, shape (n,) or (M, n)."""
    base = np.arange(n)
    if scheme == SCHEME_STANDARD:
        return base / n
    return (base + taus) / n


def extend_continuous(
    traj: DiscreteTrajectory,
    fine_path: BrownianPath,
    q: int,
    offsets: RandomOffsets | None = None,
) -> ContinuousExtension:
    """Evaluate the scheme's continuous version on a grid ``q`` times finer.

    Inside subinterval j the interpolant is

        X(t) = X_j + f(t*, X_j) * (t - t_j) + B(t) - B(t_j),

    with the same frozen time argument t* the scheme used on that subinterval.
    ``fine_path`` must coarsen to the path that drove the trajectory; at
    shared nodes the output equals the discrete states bit-for-bit.
    """
    n = traj.grid.n
    if q < 1:
        raise ValueError(f"q must be positive, got {q}")
    if fine_path.n_fine != q * n:
        raise ValueError(f"fine path resolution {fine_path.n_fine} is not q*n = {q * n}")
    if not np.array_equal(fine_path.positions[::q], traj.path.positions):
        raise CouplingError("fine path does not coarsen to the trajectory's path")

    if traj.scheme == SCHEME_RANDOMISED:
        if offsets is None:
            offsets = traj.offsets
        if offsets is None or offsets.n < n:
            raise ValueError("randomised extension needs the offsets that drove the scheme")
        if traj.offsets is not None and not np.array_equal(
            offsets.taus[:n], traj.offsets.taus[:n]
        ):
            raise ValueError("offsets disagree with the ones that drove the trajectory")
        taus = offsets.taus[:n]
    else:
        taus = None

    fine_states = _extension_batch(
        traj.drift,
        traj.states[None],
        fine_path.positions[None],
        None if taus is None else taus[None],
        q,
        traj.x0,
        traj.scheme,
    )[0]
    return ContinuousExtension(traj, TimeGrid(q * n), fine_states)


def _extension_batch(
    drift: DriftSpec,
    states: np.ndarray,
    fine_positions: np.ndarray,
    taus: np.ndarray | None,
    q: int,
    x0: np.ndarray,
    scheme: str,
) -> np.ndarray:
    """Vectorised interpolant; states (M, n+1, d), fine_positions (M, qn+1, d)."""
    m, n_plus_1, d = states.shape
    n = n_plus_1 - 1
    nf = q * n
    f = drift_callable(drift)

    k = np.arange(nf + 1)
    j = np.minimum(k // q, n - 1)
    r = k / nf
    t_nodes = j / n

    anchor_states = states[:, j]           # (M, nf+1, d)
    t_eval = _frozen_times(scheme, n, taus)  # (n,) or (M, n)
    t_eval_fine = t_eval[..., j]           # (nf+1,) or (M, nf+1)
    anchor_drift = f(t_eval_fine, anchor_states)

    fine_states = (
        anchor_states
        + anchor_drift * (r - t_nodes)[..., None]
        + (fine_positions - fine_positions[:, j * q])
    )
    # Shared nodes must match the discrete states exactly, not up to rounding.
    fine_states[:, ::q] = states
    if not np.isfinite(fine_states).all():
        raise FloatingPointError("non-finite state encountered during extension")
    return fine_states
