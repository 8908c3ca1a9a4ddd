"""Stratified randomised Riemann quadrature, deterministic baselines, and diagnostics.

The randomised rule draws one uniform node per subinterval:

    Q^j[g] = (1/n) * sum_{i<j} g((i + tau_i) / n),         Q^0 = 0,

against the left-endpoint baseline (1/n) * sum_{i<j} g(i/n).  The prefix
error sequence  int_0^{j/n} g - Q^j  is a martingale in j because each
subinterval's uniform node makes the summand conditionally unbiased; the
diagnostics below test exactly that property step by step.

Truth values come from a small registered corpus of integrands with exact
antiderivatives, so order measurements are never polluted by oracle error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import RandomOffsets, RngStream
from .errors import UnsupportedFunctionError
from .fitting import OrderFit, fit_points


class TimeFunction:
    """Base class for the registered corpus: callable with an exact antiderivative."""

    def __call__(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def antiderivative(self, t: float) -> float:
        """F(t) = int_0^t g(r) dr, exact up to float rounding."""
        raise NotImplementedError

    def interval(self, s: float, t: float) -> float:
        """int_s^t g(r) dr; overridden where a direct form is exact."""
        return self.antiderivative(t) - self.antiderivative(s)


@dataclass(frozen=True)
class Affine(TimeFunction):
    """g(r) = const + slope * r."""

    const: float = 0.0
    slope: float = 0.0

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return self.const + self.slope * r

    def antiderivative(self, t: float) -> float:
        return self.const * t + 0.5 * self.slope * t * t

    def interval(self, s: float, t: float) -> float:
        # Written on (t - s) so constants integrate exactly on dyadic grids.
        return self.const * (t - s) + 0.5 * self.slope * (t - s) * (t + s)


@dataclass(frozen=True)
class PowerKink(TimeFunction):
    """g(r) = scale * |r - anchor|**exponent: Hölder-rough at the anchor only.

    Despite having exponent-Hölder regularity as a class member, its roughness
    sits at a single point, so both quadrature rules superconverge on it (the
    left-point error is O(1/n), the randomised RMS error O(n**-(1+exponent)));
    use ``WeierstrassFunction`` when the worst-case class orders are wanted.
    """

    exponent: float
    anchor: float
    scale: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.exponent <= 1.0:
            raise ValueError(f"exponent must lie in (0, 1], got {self.exponent}")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return self.scale * np.abs(r - self.anchor) ** self.exponent

    def antiderivative(self, t: float) -> float:
        p = self.exponent + 1.0
        a = self.anchor
        if t <= a:
            return self.scale * (a**p - (a - t) ** p) / p
        return self.scale * (a**p + (t - a) ** p) / p


@dataclass(frozen=True)
class WeierstrassFunction(TimeFunction):
    """Truncated Weierstrass profile: uniformly exponent-Hölder down to scale 2**-level.

    g(r) = scale * c_L * sum_{k=0..level} 2**(-k*exponent) * cos(2**k pi (r - anchor)).
    Grids must keep 1/n well above 2**-level, otherwise the roughness floor is
    resolved and measured orders drift up.
    """

    exponent: float
    anchor: float
    level: int = 16
    scale: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.exponent <= 1.0:
            raise ValueError(f"exponent must lie in (0, 1], got {self.exponent}")
        if self.level < 0:
            raise ValueError(f"level must be non-negative, got {self.level}")

    def _parts(self):
        ks = np.arange(self.level + 1)
        weights = 2.0 ** (-ks * self.exponent)
        return weights, (2.0**ks) * math.pi

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        weights, freqs = self._parts()
        c = self.scale / weights.sum()
        # Accumulate frequency by frequency: r can be a large Monte Carlo
        # batch and a trailing frequency axis would blow up memory.
        shifted = r - self.anchor
        total = np.zeros_like(shifted)
        for w, freq in zip(weights, freqs):
            total += w * np.cos(freq * shifted)
        return c * total

    def antiderivative(self, t: float) -> float:
        weights, freqs = self._parts()
        c = self.scale / weights.sum()
        upper = (weights / freqs) * np.sin(freqs * (t - self.anchor))
        lower = (weights / freqs) * np.sin(freqs * (0.0 - self.anchor))
        return float(c * (upper - lower).sum())


def integral_oracle(g: TimeFunction, t: float) -> float:
    """Ground truth int_0^t g for corpus members; rejects anything else."""
    if not isinstance(g, TimeFunction):
        raise UnsupportedFunctionError(
            f"integrand {g!r} is not in the registered corpus with exact antiderivatives"
        )
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    return g.antiderivative(t)


@dataclass(frozen=True)
class QuadratureRun:
    """Prefix quadrature values Q^0..Q^n, optionally with truth and error process."""

    n: int
    values: np.ndarray
    truth: np.ndarray | None = None
    error_process: np.ndarray | None = None

    def with_truth(self, g: TimeFunction) -> "QuadratureRun":
        truth = np.array([integral_oracle(g, j / self.n) for j in range(self.n + 1)])
        return QuadratureRun(self.n, self.values, truth, truth - self.values)


def _prefix_values(contributions: np.ndarray) -> np.ndarray:
    values = np.zeros(contributions.size + 1)
    np.cumsum(contributions, out=values[1:])
    return values


def randomised_quadrature(g, n: int, offsets: RandomOffsets) -> QuadratureRun:
    """Stratified randomised rule with one uniform node per subinterval."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if offsets.n < n:
        raise ValueError(f"offsets too short: have {offsets.n}, need {n}")
    nodes = (np.arange(n) + offsets.taus[:n]) / n
    return QuadratureRun(n, _prefix_values(np.asarray(g(nodes)) / n))


def leftpoint_quadrature(g, n: int) -> QuadratureRun:
    """Deterministic left-endpoint Riemann rule."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    nodes = np.arange(n) / n
    return QuadratureRun(n, _prefix_values(np.asarray(g(nodes)) / n))


@dataclass(frozen=True)
class MartingaleReport:
    """Per-step conditional-mean test of the quadrature error process.

    ``step_means[j]`` is the Monte Carlo mean over offset draws of the j-th
    error increment  int_{t_j}^{t_{j+1}} g - g(node_j)/n, which is exactly
    zero in expectation.  A step is flagged when |mean| exceeds four standard
    errors.  ``q_mean``/``q_se`` summarise the terminal value Q^n against the
    exact integral ``q_truth`` (the unbiasedness check).
    """

    n: int
    samples: int
    step_means: np.ndarray
    step_ses: np.ndarray
    flagged: np.ndarray
    q_mean: float
    q_se: float
    q_truth: float

    @property
    def n_flagged(self) -> int:
        return int(self.flagged.sum())

    @property
    def unbiased_within_4se(self) -> bool:
        # The 1e-12 floor covers constant integrands, where all draws coincide
        # and only float summation noise separates the mean from the integral.
        return abs(self.q_mean - self.q_truth) <= max(4.0 * self.q_se, 1e-12)


def martingale_diagnostic(g: TimeFunction, n: int, samples: int, stream: RngStream) -> MartingaleReport:
    """Test that error increments have conditional mean zero, step by step.

    Increments are computed directly from per-interval truth rather than by
    differencing prefix sums, so constants yield exact zeros.
    """
    if samples < 100:
        raise ValueError(f"samples must be at least 100, got {samples}")
    if not isinstance(g, TimeFunction):
        raise UnsupportedFunctionError("martingale diagnostic needs a corpus integrand")
    gen = stream.generator()
    taus = gen.random((samples, n))
    i = np.arange(n)
    nodes = (i[None, :] + taus) / n
    contrib = np.asarray(g(nodes)) / n
    interval_truth = np.array([g.interval(j / n, (j + 1) / n) for j in range(n)])
    increments = interval_truth[None, :] - contrib

    means = increments.mean(axis=0)
    ses = increments.std(axis=0, ddof=1) / math.sqrt(samples)
    flagged = np.where(ses > 0.0, np.abs(means) > 4.0 * ses, means != 0.0)

    q = contrib.sum(axis=1)
    q_mean = float(q.mean())
    q_se = float(q.std(ddof=1) / math.sqrt(samples))
    return MartingaleReport(
        n=n,
        samples=samples,
        step_means=means,
        step_ses=ses,
        flagged=flagged,
        q_mean=q_mean,
        q_se=q_se,
        q_truth=integral_oracle(g, 1.0),
    )


@dataclass(frozen=True)
class QuadratureOrderResult:
    """Terminal-error ladders and fitted orders for both quadrature rules."""

    ns: tuple[int, ...]
    samples: int
    p: float
    randomised_errors: np.ndarray
    leftpoint_errors: np.ndarray
    randomised_fit: OrderFit
    leftpoint_fit: OrderFit


def quadrature_order_experiment(
    g: TimeFunction,
    ns,
    samples: int,
    stream: RngStream,
    p: float = 2.0,
) -> QuadratureOrderResult:
    """Error-vs-resolution ladders for the randomised and left-point rules.

    For each n the randomised error is the L^p average over ``samples``
    independent offset draws of |int_0^1 g - Q^n|; the left-point error is a
    single deterministic number.  Both ladders are fitted on log-log scale.
    """
    ns = tuple(int(n) for n in ns)
    if len(ns) < 2:
        raise ValueError("resolution ladder must contain at least two points")
    if sorted(ns) != list(ns):
        raise ValueError("ns must be ascending")
    if samples < 100:
        raise ValueError(f"samples must be at least 100, got {samples}")
    truth = integral_oracle(g, 1.0)

    rand_errors = []
    det_errors = []
    for n in ns:
        taus = stream.child("quadrature", n).generator().random((samples, n))
        nodes = (np.arange(n)[None, :] + taus) / n
        q_terminal = np.asarray(g(nodes)).mean(axis=1)
        err = np.abs(truth - q_terminal)
        rand_errors.append(float(np.mean(err**p) ** (1.0 / p)))
        det_errors.append(abs(truth - float(np.asarray(g(np.arange(n) / n)).mean())))

    rand_errors = np.array(rand_errors)
    det_errors = np.array(det_errors)
    return QuadratureOrderResult(
        ns=ns,
        samples=samples,
        p=p,
        randomised_errors=rand_errors,
        leftpoint_errors=det_errors,
        randomised_fit=fit_points(ns, rand_errors),
        leftpoint_fit=fit_points(ns, det_errors),
    )
