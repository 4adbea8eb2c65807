import numpy as np
from scipy import ndimage

from src.core import DyadicSignal, UniformSignal


def _window_extent(window):
    """Offsets (left, right) of a running window of `window` samples.
    The extent matches the centring of `scipy.ndimage` filters with origin 0.
    """
    left = window // 2
    return left, window - 1 - left


def _lower_median(values):
    values = np.sort(values)
    return values[(len(values) - 1) // 2]


def running_median(x, window):
    """Running lower median of `x` with a window of `window` samples.
    Near the edges the window shrinks so that it never leaves the signal.
    """
    n = len(x)
    left, right = _window_extent(window)
    baseline = ndimage.rank_filter(x, rank=(window - 1) // 2, size=window, mode="nearest")
    for i in range(min(left, n)):
        baseline[i] = _lower_median(x[:min(n, i + right + 1)])
    for i in range(max(0, n - right), n):
        baseline[i] = _lower_median(x[max(0, i - left):])
    return baseline


def median_detrend(sig, window_s):
    """Remove the baseline wander of `sig` by subtracting its running median.

    Args:
        sig (core.UniformSignal): The signal to detrend.
        window_s (float): Length of the median window in seconds. The window in
            samples is ROUND(window_s / dt).

    Returns:
        detrended (core.UniformSignal): Signal of the same length, dt and t0.
    """
    if not window_s > 0:
        raise ValueError(f"Median window must be positive, got {window_s}")
    window = int(np.floor(window_s / sig.dt + 0.5))
    if window < 1:
        raise ValueError(f"Median window of {window_s}s is shorter than one sample")
    if window > len(sig):
        raise ValueError(f"Median window of {window} samples exceeds signal length {len(sig)}")
    baseline = running_median(sig.samples, window)
    return UniformSignal(sig.samples - baseline, sig.dt, sig.t0)


def reflect_pad(sig, n_pad):
    """Pad `sig` on both sides with `n_pad` samples using reflecting boundary
    conditions. The edge sample is not repeated.
    """
    if not 1 <= n_pad < len(sig):
        raise ValueError(f"Padding must satisfy 1 <= n_pad < {len(sig)}, got {n_pad}")
    padded = np.pad(sig.samples, n_pad, mode="reflect")
    return UniformSignal(padded, sig.dt, sig.t0 - n_pad * sig.dt)


def crop(sig, n_pad):
    """Undo `reflect_pad`: drop `n_pad` samples from both sides of `sig`."""
    if not 0 <= 2 * n_pad <= len(sig) - 2:
        raise ValueError(f"Cannot crop {n_pad} samples from both sides of {len(sig)} samples")
    return UniformSignal(sig.samples[n_pad:len(sig) - n_pad], sig.dt, sig.t0 + n_pad * sig.dt)


def resample(sig, new_dt):
    """Linearly interpolate `sig` onto a uniform grid with spacing `new_dt`.
    The new grid starts at the first sample time and spans the same time range.
    """
    if not new_dt > 0:
        raise ValueError(f"Sampling interval must be positive, got new_dt={new_dt}")
    if new_dt == sig.dt:
        return UniformSignal(sig.samples.copy(), sig.dt, sig.t0)
    span = sig.dt * (len(sig) - 1)
    # Tolerate round-off so that a grid point landing on the last sample is kept.
    n = int(np.floor(span / new_dt * (1 + 1e-12))) + 1
    if n < 2:
        raise ValueError(f"Resampling {span}s at dt={new_dt} leaves fewer than 2 samples")
    offsets = new_dt * np.arange(n)
    samples = np.interp(offsets, sig.dt * np.arange(len(sig)), sig.samples)
    return UniformSignal(samples, new_dt, sig.t0)


def to_dyadic(sig):
    """Truncate `sig` to the largest length 2^(L+1) not exceeding its length,
    keeping the earliest samples.

    Returns:
        dyadic (core.DyadicSignal): The truncated signal and its L.
    """
    L = int(np.log2(len(sig))) - 1
    # Guard against log2 round-off for lengths just below a power of two.
    while 2 ** (L + 1) > len(sig):
        L -= 1
    while 2 ** (L + 2) <= len(sig):
        L += 1
    n = 2 ** (L + 1)
    return DyadicSignal(UniformSignal(sig.samples[:n], sig.dt, sig.t0), L)


def interpolate_at(sig, times):
    """Linearly interpolate `sig` at arbitrary `times`; NaN outside its range."""
    times = np.asarray(times, dtype=np.float64)
    return np.interp(times, sig.times, sig.samples, left=np.nan, right=np.nan)
