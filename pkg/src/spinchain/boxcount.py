"""Modified box counting for fidelity time series.

Each window of length L contributes its largest excursion Delta_i
(max - min of the curve inside the window); M(L) = sum_i Delta_i / L
then scales as L^(-D) over a window of box lengths, and D is the fractal
dimension of the signal: 1 for a straight line, 2 for a long periodic
curve, in between for fractal signals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .chain import ChainSpec, sample_disorder, substream
from .evolve import FidelitySeries, fidelity_series
from .fitting import FitResult, ThresholdScaling, line_fit, threshold_scaling

__all__ = [
    "DegenerateSeriesError",
    "WindowSelectionError",
    "TrimResult",
    "BoxCountCurve",
    "transient_trim",
    "default_box_lengths",
    "box_count",
    "fit_dimension",
    "dimension_of_series",
    "dimension_curve",
    "dimension_threshold",
]

TRIM_THRESHOLD = 0.55


class DegenerateSeriesError(ValueError):
    """The series is constant: every excursion vanishes, no dimension."""


class WindowSelectionError(RuntimeError):
    """No box-length window met the linearity requirements."""


class TrimResult(NamedTuple):
    series: FidelitySeries
    reached: bool


@dataclass(frozen=True)
class BoxCountCurve:
    """Box lengths L (time units), counts M(L), and the grid step."""

    lengths: np.ndarray
    m_values: np.ndarray
    dt: float

    def __post_init__(self):
        for name in ("lengths", "m_values"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.flags.writeable = False
            object.__setattr__(self, name, a)


def transient_trim(series: FidelitySeries, threshold: float = TRIM_THRESHOLD) -> TrimResult:
    """Drop the head of the series before fidelity first falls to ~1/2.

    Everything before the first sample with F <= threshold goes; if the
    threshold is never reached the series comes back unchanged with
    reached=False so callers can flag it.
    """
    if len(series) == 0:
        raise ValueError("empty series")
    hit = series.fidelity <= threshold
    if not np.any(hit):
        return TrimResult(series, False)
    i = int(np.argmax(hit))
    if i == 0:
        return TrimResult(series, True)
    return TrimResult(FidelitySeries(times=series.times[i:],
                                     amplitude=series.amplitude[i:],
                                     fidelity=series.fidelity[i:]), True)


def default_box_lengths(n_samples: int, dt: float) -> np.ndarray:
    """Geometric grid of box lengths, ratio 2^(1/4), from 4 dt to T/8.

    The bounds keep the grid away from the coarse-grain regime at the
    sample scale and the finite-length regime near the full duration.
    """
    max_windows = (n_samples - 1) // 8
    if max_windows < 4:
        raise ValueError(f"series too short for box counting ({n_samples} samples)")
    counts, c = [], 4.0
    while round(c) <= max_windows:
        counts.append(round(c))
        c *= 2.0 ** 0.25
    return np.unique(np.array(counts, dtype=int)) * dt


def box_count(series: FidelitySeries, lengths=None) -> BoxCountCurve:
    """Sum of per-window excursions over L for each box length L.

    Windows span [i L, (i+1) L] including both boundary samples; an
    incomplete window at the end of the series is dropped.  Each L must
    be an integer multiple of the grid step and fit inside the series.
    """
    dt = series.dt
    if lengths is None:
        lengths = default_box_lengths(len(series), dt)
    lengths = np.atleast_1d(np.asarray(lengths, dtype=float))
    f = series.fidelity
    m_values = np.empty(lengths.shape[0])
    for idx, length in enumerate(lengths):
        n = int(round(length / dt))
        if n < 1 or abs(n * dt - length) > 1e-6 * dt:
            raise ValueError(f"box length {length} is not a multiple of dt={dt}")
        if n > len(series) - 1:
            raise ValueError(f"box length {length} exceeds the series duration")
        windows = np.lib.stride_tricks.sliding_window_view(f, n + 1)[::n]
        excursions = windows.max(axis=1) - windows.min(axis=1)
        m_values[idx] = excursions.sum() / length
    order = np.argsort(lengths)
    return BoxCountCurve(lengths=lengths[order], m_values=m_values[order], dt=dt)


def _window_stats(logl, logm):
    """Prefix sums so any contiguous sub-grid fit costs O(1)."""
    z = np.zeros(1)
    return (np.concatenate([z, np.cumsum(logl)]),
            np.concatenate([z, np.cumsum(logm)]),
            np.concatenate([z, np.cumsum(logl * logl)]),
            np.concatenate([z, np.cumsum(logl * logm)]),
            np.concatenate([z, np.cumsum(logm * logm)]))


def _r_squared(sums, i, j):
    sx, sy, sxx, sxy, syy = sums
    n = j - i + 1
    px = sx[j + 1] - sx[i]
    py = sy[j + 1] - sy[i]
    cxx = (sxx[j + 1] - sxx[i]) - px * px / n
    cxy = (sxy[j + 1] - sxy[i]) - px * py / n
    cyy = (syy[j + 1] - syy[i]) - py * py / n
    if cxx <= 0:
        return -np.inf
    rss = cyy - cxy * cxy / cxx
    if cyy <= 0:
        return 1.0 if abs(rss) < 1e-30 else -np.inf
    return 1.0 - rss / cyy


def _auto_window(lengths, logl, logm, r2_min, min_points, min_ratio):
    """Most linear interior sub-grid spanning >= min_ratio in L, R^2 >= r2_min.

    The first and last grid points never qualify (coarse-grain and
    finite-length regimes).  Among qualifying windows the one with the
    highest R^2 wins: box-count curves are smooth enough that a window
    straddling two scaling regimes still shows R^2 ~ 0.999, so taking
    the longest window instead would absorb regime crossovers and bias
    the slope (a strictly periodic signal then reads D ~ 1.9 rather
    than 2).  Near-exact ties go to the longer window, then to the one
    farthest from the grid ends.
    """
    n = lengths.shape[0]
    sums = _window_stats(logl, logm)
    best, best_key = None, None
    for i in range(1, n - 1):
        for j in range(i + min_points - 1, n - 1):
            if lengths[j] / lengths[i] < min_ratio:
                continue
            r2 = _r_squared(sums, i, j)
            if r2 < r2_min:
                continue
            edge = min(i, (n - 1) - j)
            key = (round(r2, 9), j - i, edge, -abs(i - ((n - 1) - j)))
            if best_key is None or key > best_key:
                best, best_key = (i, j, r2), key
    return best


def fit_dimension(curve: BoxCountCurve, window=None, r2_min: float = 0.995,
                  min_points: int = 6, min_ratio: float = 10.0) -> FitResult:
    """Fractal dimension D = -slope of log M vs log L.

    With an explicit window (L_min, L_max) the fit uses every grid point
    inside it (at least min_points required).  Otherwise the window is
    selected automatically as the longest interior sub-grid spanning at
    least a factor min_ratio in L with linear-fit R^2 >= r2_min; when no
    sub-grid qualifies the fit is refused, which is the expected outcome
    for weakly disordered chains whose scaling region collapses.
    """
    lengths, m = curve.lengths, curve.m_values
    if np.all(m <= 0):
        raise DegenerateSeriesError(
            "all excursions vanish (constant series), dimension undefined")
    keep = m > 0
    lengths, m = lengths[keep], m[keep]
    logl, logm = np.log(lengths), np.log(m)
    grid_index = np.flatnonzero(keep)

    if window is not None:
        lo, hi = float(window[0]), float(window[1])
        sel = (lengths >= lo * (1 - 1e-12)) & (lengths <= hi * (1 + 1e-12))
        if int(sel.sum()) < min_points:
            raise ValueError(
                f"window [{lo}, {hi}] holds {int(sel.sum())} grid points, "
                f"need >= {min_points}")
        i, j = int(np.argmax(sel)), int(len(sel) - 1 - np.argmax(sel[::-1]))
    else:
        found = _auto_window(lengths, logl, logm, r2_min, min_points, min_ratio)
        if found is None:
            diag = _best_diagnostic(lengths, logl, logm, min_points, min_ratio)
            raise WindowSelectionError(
                "no contiguous box-length window spanning "
                f">= {min_ratio}x reached R^2 >= {r2_min}; best candidate {diag}")
        i, j, _ = found

    slope, intercept, slope_err, r2, rss = line_fit(logl[i:j + 1], logm[i:j + 1])
    return FitResult(
        model="box-dimension",
        params={"dimension": float(-slope), "log_prefactor": float(intercept),
                "r_squared": float(r2)},
        stderr={"dimension": float(slope_err)},
        residual_norm=float(np.sqrt(rss)),
        mask=tuple(int(g) for g in grid_index[i:j + 1]),
        window=(float(lengths[i]), float(lengths[j])),
    )


def _best_diagnostic(lengths, logl, logm, min_points, min_ratio):
    n = lengths.shape[0]
    sums = _window_stats(logl, logm)
    best_r2, best_win = -np.inf, None
    for i in range(1, n - 1):
        for j in range(i + min_points - 1, n - 1):
            if lengths[j] / lengths[i] < min_ratio:
                continue
            r2 = _r_squared(sums, i, j)
            if r2 > best_r2:
                best_r2, best_win = r2, (float(lengths[i]), float(lengths[j]))
    return f"window={best_win} with R^2={best_r2:.6f}"


def dimension_of_series(series: FidelitySeries, lengths=None, window=None,
                        trim_threshold: float = TRIM_THRESHOLD):
    """Trim the transient, box count, fit: returns (FitResult, BoxCountCurve)."""
    trimmed, _ = transient_trim(series, trim_threshold)
    curve = box_count(trimmed, lengths)
    return fit_dimension(curve, window=window), curve


def dimension_curve(n_sites: int, eps_j_grid, n_real: int, master_seed: int,
                    base_coupling: float = 1.0, corr_p: float = 0.5,
                    t_max: float = 1e4, dt: float = 0.05,
                    trim_threshold: float = TRIM_THRESHOLD, key_prefix: tuple = ()):
    """Mean fractal dimension vs coupling disorder for one chain length.

    The dimension is fitted per realization and the fits averaged
    (averaging the fidelity first would restore periodicity and destroy
    the fractal signal).  Points where every realization is refused or
    degenerate come back as NaN, with one note per failure.
    """
    d_mean = np.full(len(eps_j_grid), np.nan)
    d_err = np.full(len(eps_j_grid), np.nan)
    notes = []
    for i, eps_j in enumerate(eps_j_grid):
        spec = ChainSpec(n_sites=n_sites, base_coupling=base_coupling,
                         eps_j=float(eps_j), corr_p=corr_p)
        dims = []
        for r in range(n_real):
            stream = substream(master_seed, *key_prefix, i, r)
            series = fidelity_series(spec, sample_disorder(spec, stream), t_max, dt)
            try:
                fit, _ = dimension_of_series(series, trim_threshold=trim_threshold)
            except (WindowSelectionError, DegenerateSeriesError) as err:
                notes.append((float(eps_j), r, f"{type(err).__name__}: {err}"))
                continue
            dims.append(fit.params["dimension"])
        if dims:
            d_mean[i] = float(np.mean(dims))
            d_err[i] = float(np.std(dims, ddof=1) / np.sqrt(len(dims))) if len(dims) > 1 else 0.0
    return d_mean, d_err, notes


def dimension_threshold(curves: dict, d_target: float) -> ThresholdScaling:
    """Disorder strength where D crosses d_target, power-law fitted vs N.

    curves maps N -> (eps_grid, D_values); non-finite D entries (refused
    fits) are dropped before locating the crossing.
    """
    cleaned = {}
    for n, (grid, vals) in curves.items():
        grid = np.asarray(grid, dtype=float)
        vals = np.asarray(vals, dtype=float)
        ok = np.isfinite(vals)
        cleaned[n] = (grid[ok], vals[ok])
    return threshold_scaling(cleaned, d_target, model="dimension-threshold")
