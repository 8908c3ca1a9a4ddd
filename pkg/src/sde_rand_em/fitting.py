"""Least-squares estimation of empirical convergence orders from error ladders."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Half-width added on top of 3 sigma when checking a predicted order against a
# fitted slope.  It absorbs the arbitrarily small epsilon appearing in the
# theoretical rates together with pre-asymptotic bias at desk-scale ladders.
PREDICTION_BAND = 0.15


@dataclass(frozen=True)
class OrderFit:
    """Result of regressing log(error) on log(1/n).

    ``slope`` is the empirical convergence order.  ``per_point_ci`` holds the
    95% half-widths of log(error) per ladder point propagated from the Monte
    Carlo standard errors.  ``slope_stderr`` is a conservative standard error
    for the slope: the larger of the residual-based OLS value and the value
    propagated from the per-point measurement noise.  ``predicted`` carries
    the theoretical order this ladder is expected to follow, if any, and
    ``band`` the tolerance used by ``prediction_within_band``.
    """

    slope: float
    intercept: float
    r_squared: float
    per_point_ci: np.ndarray
    slope_stderr: float
    predicted: float | None = None
    band: float = PREDICTION_BAND
    degenerate: bool = False
    note: str = ""

    def prediction_within_band(self) -> bool | None:
        """Whether the predicted order lies in [slope - 3se, slope + 3se + band]."""
        if self.predicted is None or self.degenerate:
            return None
        lo = self.slope - 3.0 * self.slope_stderr
        hi = self.slope + 3.0 * self.slope_stderr + self.band
        return lo <= self.predicted <= hi


def fit_points(
    ns,
    estimates,
    std_errors=None,
    predicted: float | None = None,
    band: float = PREDICTION_BAND,
) -> OrderFit:
    """Ordinary least squares of log(estimate) against log(1/n).

    Needs at least 3 strictly positive estimates; otherwise a degenerate fit
    is returned (flagged, not raised) so callers can report it.
    """
    ns = np.asarray(ns, dtype=float)
    est = np.asarray(estimates, dtype=float)
    if std_errors is None:
        ses = np.zeros_like(est)
    else:
        ses = np.asarray(std_errors, dtype=float)
    if ns.shape != est.shape or ns.ndim != 1:
        raise ValueError("ns and estimates must be 1-d arrays of equal length")

    if est.size < 3:
        return OrderFit(0.0, 0.0, 0.0, np.zeros_like(est), 0.0, predicted, band,
                        degenerate=True, note="fewer than 3 ladder points")
    if np.any(est <= 0.0):
        return OrderFit(0.0, 0.0, 0.0, np.zeros_like(est), 0.0, predicted, band,
                        degenerate=True, note="degenerate-zero")

    x = np.log(1.0 / ns)
    y = np.log(est)
    sigma = np.divide(ses, est, out=np.zeros_like(est), where=est > 0)

    dx = x - x.mean()
    sxx = float(np.sum(dx * dx))
    slope = float(np.sum(dx * y) / sxx)
    intercept = float(y.mean() - slope * x.mean())

    resid = y - (intercept + slope * x)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot

    m = est.size
    se_resid = 0.0
    if m > 2 and ss_tot > 0.0:
        se_resid = float(np.sqrt(np.sum(resid**2) / (m - 2) / sxx))
    weights = dx / sxx
    se_meas = float(np.sqrt(np.sum((weights * sigma) ** 2)))
    slope_stderr = max(se_resid, se_meas)

    return OrderFit(
        slope=slope,
        intercept=intercept,
        r_squared=r_squared,
        per_point_ci=1.96 * sigma,
        slope_stderr=slope_stderr,
        predicted=predicted,
        band=band,
    )
