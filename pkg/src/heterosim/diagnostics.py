"""Quantitative post-processing of trajectories and fields.

Spatial averages, norms, front location, spike counting and a conservative
oscillation classifier (steady / period-1 / period-2 / aperiodic) built on
peak clustering with an autocorrelation cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.signal import find_peaks

from .errors import InsufficientDataError, NoFrontError
from .grids import Grid1D
from .savanna import SL_FIELD_NAMES, SimulationRun

MIN_SAMPLES = 2000
STEADY_RANGE = 1e-3
PROMINENCE_FRACTION = 0.05     # of the post-transient range, for peak picking
CLUSTER_SPREAD = 0.05          # relative spread of a "tight" cluster
HEIGHT_SEPARATION = 0.10       # of range, to call two height clusters distinct
CORR_CONFIRM = 0.9             # autocorrelation support required for periodX
CORR_REJECT = 0.8              # any peak above this contradicts aperiodicity


class PeriodTag(Enum):
    STEADY = "steady"
    PERIOD1 = "period1"
    PERIOD2 = "period2"
    APERIODIC = "aperiodic"


@dataclass(frozen=True)
class TimeSeries:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("times and values must have equal length")
        dt = np.diff(self.times)
        if len(dt) and (np.any(dt <= 0) or not np.allclose(dt, dt[0], rtol=1e-6)):
            raise ValueError("times must be strictly increasing and uniformly spaced")

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])


@dataclass(frozen=True)
class PeriodClass:
    tag: PeriodTag
    base_period: float | None
    note: str = ""

    def __post_init__(self):
        has_period = self.tag in (PeriodTag.PERIOD1, PeriodTag.PERIOD2)
        if has_period != (self.base_period is not None):
            raise ValueError("base_period present iff tag is period1/period2")


def l1_norm(field: np.ndarray, grid: Grid1D) -> float:
    """Trapezoid integral of ``|field|`` over the domain."""
    return float(np.trapezoid(np.abs(np.asarray(field, dtype=float)), grid.nodes))


def spatial_average(run: SimulationRun, component: str, grid: Grid1D) -> TimeSeries:
    """Trapezoid average of one component over the grid, per snapshot."""
    snaps = run.snapshots
    if snaps.ndim == 3:
        if component not in SL_FIELD_NAMES:
            raise ValueError(f"unknown component {component!r}, expected one of {SL_FIELD_NAMES}")
        fields = snaps[:, SL_FIELD_NAMES.index(component), :]
    elif snaps.ndim == 2:
        if component not in ("G", "value"):
            raise ValueError(f"unknown component {component!r} for a scalar-field run")
        fields = snaps
    else:
        raise ValueError(f"cannot average snapshots of shape {snaps.shape}")
    vals = np.trapezoid(fields, grid.nodes, axis=1) / grid.length
    return TimeSeries(times=run.times, values=vals)


def autocorrelation(values: np.ndarray) -> np.ndarray:
    """Normalized autocorrelation of a demeaned series (lag 0 .. n-1).

    Each lag is normalized by its overlap length so a perfectly periodic
    signal scores ~1 at its period instead of decaying with lag.
    """
    v = np.asarray(values, dtype=float)
    v = v - v.mean()
    n = len(v)
    variance = float(v @ v) / n
    if variance == 0.0:
        return np.zeros(n)
    full = np.correlate(v, v, mode="full")[n - 1:]
    counts = n - np.arange(n)
    return full / counts / variance


def correlation_peaks(values: np.ndarray, max_lag: int | None = None):
    """Local maxima of the autocorrelation beyond lag 0: (lags, heights)."""
    ac = autocorrelation(values)
    if max_lag is None:
        max_lag = len(ac) // 2
    ac = ac[: max_lag + 1]
    idx, _ = find_peaks(ac)
    return idx, ac[idx]


def _tight(samples: np.ndarray, scale: float) -> bool:
    return len(samples) > 0 and float(np.std(samples)) < CLUSTER_SPREAD * scale


def detect_period(series: TimeSeries, transient_fraction: float = 0.5) -> PeriodClass:
    """Classify an oscillation record after discarding the leading transient.

    Peak heights and inter-peak intervals are clustered: one tight cluster of
    each means period 1; two alternating height clusters with a consistent
    pair interval mean period 2.  The classification must be supported by the
    autocorrelation of the post-transient series (a peak of at least 0.9 at
    the reported period); otherwise the series is reported aperiodic, which
    is a negative classification rather than a proof of chaos.
    """
    if not 0.0 <= transient_fraction < 1.0:
        raise ValueError("transient_fraction must lie in [0, 1)")
    start = int(len(series.values) * transient_fraction)
    vals = series.values[start:]
    times = series.times[start:]
    if len(vals) < MIN_SAMPLES:
        raise InsufficientDataError(
            f"need at least {MIN_SAMPLES} post-transient samples, got {len(vals)}"
        )
    vrange = float(np.ptp(vals))
    if vrange < STEADY_RANGE:
        return PeriodClass(PeriodTag.STEADY, None, f"range {vrange:.2e} below {STEADY_RANGE}")

    peak_idx, _ = find_peaks(vals, prominence=PROMINENCE_FRACTION * vrange)
    if len(peak_idx) < 4:
        return _autocorr_fallback(vals, series.dt,
                                  note=f"only {len(peak_idx)} prominent peaks")

    peak_times = times[peak_idx]
    heights = vals[peak_idx]
    intervals = np.diff(peak_times)

    interval_tight = float(np.std(intervals)) < CLUSTER_SPREAD * float(np.mean(intervals))
    if interval_tight and _tight(heights, vrange):
        base = float(np.mean(intervals))
        return _confirm(vals, series.dt, PeriodTag.PERIOD1, base,
                        note="single interval and height cluster")

    even, odd = heights[0::2], heights[1::2]
    if min(len(even), len(odd)) >= 2:
        separation = abs(float(np.mean(even)) - float(np.mean(odd)))
        spans = peak_times[2:] - peak_times[:-2]  # every two peaks
        spans_tight = float(np.std(spans)) < CLUSTER_SPREAD * float(np.mean(spans))
        if (separation > HEIGHT_SEPARATION * vrange and _tight(even, vrange)
                and _tight(odd, vrange) and spans_tight):
            base = float(np.mean(spans))
            return _confirm(vals, series.dt, PeriodTag.PERIOD2, base,
                            note="alternating height clusters")

    return _autocorr_fallback(vals, series.dt, note="no tight peak clustering")


def _confirm(vals, dt, tag, base, note):
    """Require autocorrelation support at the candidate period, else aperiodic."""
    lag = base / dt
    lags, heights = correlation_peaks(vals)
    if len(lags):
        window = np.abs(lags - lag) <= max(0.1 * lag, 2.0)
        support = float(heights[window].max()) if window.any() else 0.0
    else:
        support = 0.0
    if support >= CORR_CONFIRM:
        return PeriodClass(tag, base, f"{note}; autocorrelation {support:.3f} at period")
    return PeriodClass(
        PeriodTag.APERIODIC, None,
        f"{note} but autocorrelation support {support:.3f} < {CORR_CONFIRM}",
    )


def _autocorr_fallback(vals, dt, note):
    """No clean peak structure: decide between aperiodic and correlation-derived period."""
    lags, heights = correlation_peaks(vals)
    if len(lags) == 0:
        return PeriodClass(PeriodTag.APERIODIC, None, f"{note}; no correlation peaks")
    best = int(np.argmax(heights))
    top = float(heights[best])
    if top >= CORR_CONFIRM:
        base = float(lags[best] * dt)
        return PeriodClass(PeriodTag.PERIOD1, base,
                           f"{note}; period from autocorrelation peak {top:.3f}")
    if top >= CORR_REJECT:
        return PeriodClass(PeriodTag.APERIODIC, None,
                           f"{note}; marginal correlation peak {top:.3f}")
    return PeriodClass(PeriodTag.APERIODIC, None,
                       f"{note}; all correlation peaks below {CORR_REJECT}")


def count_spikes(field: np.ndarray, grid: Grid1D,
                 window: tuple[float, float] | None = None,
                 prominence_fraction: float = 0.2) -> int:
    """Count local maxima with prominence at least a fraction of the local range.

    Fronts do not count: a monotone transition has no interior maximum.
    """
    if not 0.0 < prominence_fraction < 1.0:
        raise ValueError("prominence_fraction must lie in (0, 1)")
    field = np.asarray(field, dtype=float)
    x = grid.nodes
    if window is not None:
        mask = (x >= window[0]) & (x <= window[1])
        field = field[mask]
    if len(field) < 3:
        return 0
    frange = float(np.ptp(field))
    if frange == 0.0:
        return 0
    idx, _ = find_peaks(field, prominence=prominence_fraction * frange)
    return int(len(idx))


def locate_front(field: np.ndarray, level: float, grid: Grid1D) -> float:
    """Position of the steepest crossing of ``level``, linearly interpolated.

    With several crossings the one with the largest local gradient wins;
    no crossing at all raises :class:`NoFrontError`.
    """
    field = np.asarray(field, dtype=float)
    x = grid.nodes
    shifted = field - level
    cross = shifted[:-1] * shifted[1:] <= 0
    # discard "crossings" where both sides sit exactly on the level
    cross &= ~((shifted[:-1] == 0) & (shifted[1:] == 0))
    idx = np.flatnonzero(cross)
    if len(idx) == 0:
        raise NoFrontError(f"field never crosses level {level}")
    slopes = np.abs(field[idx + 1] - field[idx])
    j = idx[int(np.argmax(slopes))]
    if field[j + 1] == field[j]:
        return float(x[j])
    frac = (level - field[j]) / (field[j + 1] - field[j])
    return float(x[j] + frac * (x[j + 1] - x[j]))
