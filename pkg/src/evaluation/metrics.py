from collections import namedtuple

import numpy as np
from scipy import signal as spsig

from src.core import UniformSignal
from src.signals.uniform import interpolate_at


#--------------------------- Intuitive instantaneous respiration ---------------------------#
def irr_from_breath_marks(marks, grid):
    """Intuitive instantaneous respiration rate, piecewise constant between breaths:
        IRR(t) = 1 / (t_k - t_{k-1})    for t_k <= t < t_{k+1}

    The rate is undefined (NaN) before the second mark and the last value is held
    after the last mark.

    Args:
        marks (np.Array): Strictly increasing times of the ends of inspiration.
        grid (np.Array): Times at which to evaluate the rate.

    Returns:
        irr (np.Array): The rate in Hz at every time of `grid`.
    """
    marks = np.asarray(marks, dtype=np.float64)
    grid = np.asarray(grid, dtype=np.float64)
    if len(marks) < 2:
        raise ValueError(f"Need at least 2 breath marks, got {len(marks)}")
    if np.any(np.diff(marks) <= 0):
        raise ValueError("Breath marks must be strictly increasing")
    rates = 1.0 / np.diff(marks)
    k = np.searchsorted(marks, grid, side="right") - 1
    irr = np.full(grid.shape, np.nan)
    defined = k >= 1
    irr[defined] = rates[k[defined] - 1]
    return irr


def detect_breath_marks(resp, min_spacing_s=1.0):
    """Locate the ends of inspiration as the local maxima of a respiration signal at
    least `min_spacing_s` apart. Each maximum is refined to sub-sample precision by
    fitting a parabola through it and its two neighbours.

    Returns:
        marks (np.Array): Times of the ends of inspiration in seconds.
    """
    x = resp.samples
    distance = max(1, int(np.ceil(min_spacing_s / resp.dt)))
    peaks, _ = spsig.find_peaks(x, distance=distance)
    peaks = peaks[(peaks > 0) & (peaks < len(x) - 1)]
    left, mid, right = x[peaks - 1], x[peaks], x[peaks + 1]
    curvature = left - 2 * mid + right
    with np.errstate(divide="ignore", invalid="ignore"):
        offset = np.where(curvature < 0, 0.5 * (left - right) / curvature, 0.0)
    return resp.t0 + resp.dt * (peaks + offset)


#-------------------------------------- Segment error -------------------------------------#
"""Segment comparison of two instantaneous-frequency estimates.
`deltas` holds the signed relative error in percent of every segment with valid
samples, `e_k` the median of their absolute values, `e_k_signed` the median of the
signed values, and `n_empty` the number of segments without valid samples."""
SegmentErrorReport = namedtuple("SegmentErrorReport",
    ["K", "deltas", "e_k", "e_k_signed", "n_empty"])


def segment_error(if_ref, if_est, dt, K):
    """Compare two instantaneous-frequency series over K equal, non-overlapping
    segments of the record. Per segment, both series are averaged over their valid
    (finite) samples and
        delta_i = (avg_ref - avg_est) / avg_ref * 100

    Args:
        if_ref (np.Array): Reference instantaneous frequency.
        if_est (np.Array): Estimated instantaneous frequency, same length.
        dt (float): Sampling interval in seconds.
        K (int): Number of segments, 1 <= K <= length.

    Returns:
        report (SegmentErrorReport): The per-segment errors and their median.

    Raises:
        ValueError: If a segment of the reference does not average to a positive
            frequency.
    """
    if_ref = np.asarray(if_ref, dtype=np.float64)
    if_est = np.asarray(if_est, dtype=np.float64)
    if if_ref.shape != if_est.shape or if_ref.ndim != 1:
        raise ValueError(f"Length missmatch!\nref: {if_ref.shape}\nest: {if_est.shape}")
    n = len(if_ref)
    if not 1 <= K <= n:
        raise ValueError(f"Segment count must satisfy 1 <= K <= {n}, got K={K}")
    if not dt > 0:
        raise ValueError(f"Sampling interval must be positive, got dt={dt}")

    # Sample m at time m*dt falls into segment floor(m*dt / (T/K)) with T = n*dt.
    segment = (np.arange(n) * K) // n
    valid = np.isfinite(if_ref) & np.isfinite(if_est)
    deltas = []
    n_empty = 0
    for i in range(K):
        members = valid & (segment == i)
        if not members.any():
            n_empty += 1
            continue
        avg_ref = if_ref[members].mean()
        if not avg_ref > 0:
            raise ValueError(f"Reference frequency must be positive, segment {i} averages {avg_ref}")
        avg_est = if_est[members].mean()
        deltas.append((avg_ref - avg_est) / avg_ref * 100)
    deltas = np.asarray(deltas)
    if len(deltas) == 0:
        return SegmentErrorReport(K, deltas, np.nan, np.nan, n_empty)
    return SegmentErrorReport(K, deltas, float(np.median(np.abs(deltas))),
                              float(np.median(deltas)), n_empty)


#------------------------------------ Heart-rate variability ------------------------------------#
"""Time-domain heart-rate variability over normal-to-normal intervals.
`mean_rr`, `sdnn` and `rmssd` are in ms, `nn50` is a count and `pnn50` a percentage."""
HrvReport = namedtuple("HrvReport", ["mean_rr", "rmssd", "sdnn", "nn50", "pnn50"])


def nn_intervals(beats):
    """Intervals in ms between consecutive normal beats, ectopic beats removed."""
    normal = np.array([label == "N" for label in beats.labels], dtype=bool)
    return 1000.0 * np.diff(beats.times[normal])


def hrv_time_domain(beats):
    """Compute the time-domain HRV measures of a beat series.

    SDNN is the population standard deviation of the NN intervals, RMSSD the root
    mean square of their successive differences, NN50 the number of successive
    differences larger than 50 ms and PNN50 that number as a percentage of all
    successive differences.

    Args:
        beats (core.BeatSeries): At least 3 normal beats.

    Returns:
        report (HrvReport): The HRV measures.
    """
    nn = nn_intervals(beats)
    if len(nn) < 2:
        raise ValueError(f"Need at least 3 normal beats, got {beats.labels.count('N')}")
    successive = np.diff(nn)
    nn50 = int(np.sum(np.abs(successive) > 50.0))
    return HrvReport(
        mean_rr=float(nn.mean()),
        rmssd=float(np.sqrt(np.mean(np.square(successive)))),
        sdnn=float(nn.std()),
        nn50=nn50,
        pnn50=100.0 * nn50 / len(successive),
    )


#------------------------------------ Ground-truth scoring ------------------------------------#
def interior(n, trim):
    """Slice dropping `trim` of the `n` samples at both ends of a record."""
    if not 0 <= trim < 0.5:
        raise ValueError(f"Trim fraction must satisfy 0 <= trim < 0.5, got {trim}")
    cut = int(np.floor(trim * n))
    return slice(cut, n - cut)


def score_against_truth(sample, if_est, K, trim=0.1):
    """Segment error of an estimate against the ideal instantaneous frequency of a
    generated sample. The truth is interpolated onto the time grid of the estimate
    and both are compared on the interior of the estimate only.

    Args:
        sample (core.Sample): The generated sample holding `true_iif`.
        if_est (core.UniformSignal): The estimated instantaneous frequency.
        K (int): Number of segments, reduced to the interior length if larger.
        trim (float, optional): Fraction dropped at both ends. Default value is 0.1.

    Returns:
        report (SegmentErrorReport): The segment errors of the estimate.
    """
    truth = UniformSignal(sample.true_iif, sample.signal.dt, sample.signal.t0)
    ref = interpolate_at(truth, if_est.times)
    inner = interior(len(ref), trim)
    ref, est = ref[inner], if_est.samples[inner]
    return segment_error(ref, est, if_est.dt, min(K, len(ref)))
