from functools import lru_cache

import numpy as np

from src.core import UniformSignal
from src.transforms.cwt import WaveletSpec
from src.transforms.sst import synchrosqueeze


def reconstruct_band(S, r, n_w, kappa=1.0):
    """Reconstruct the oscillation carried by a band of 2*n_w+1 bins around the ridge:
        f(m) = kappa * Re( sum over l in [c(m)-n_w, c(m)+n_w] of S(l, m) )

    The band is clipped to the frequency grid.

    Args:
        S (core.SstMatrix): Squeezed coefficients of shape (n_xi, n).
        r (core.Ridge): The ridge, one bin per column of `S`.
        n_w (int): Half-width of the band in bins, n_w >= 0.
        kappa (float, optional): Amplitude calibration constant, see `calibrate_kappa`.
            Default value is 1.0.

    Returns:
        signal (core.UniformSignal): The reconstructed signal on the time axis of `S`.
    """
    if n_w < 0:
        raise ValueError(f"Band half-width must be non-negative, got n_w={n_w}")
    n_xi, n = S.values.shape
    bins = np.asarray(r.bins)
    if bins.shape != (n,):
        raise ValueError(f"Ridge of length {bins.shape} does not match {n} columns")
    lo = np.clip(bins - n_w, 0, n_xi - 1)
    hi = np.clip(bins + n_w, 0, n_xi - 1)
    # Band sums from the running sum over bins, one zero row prepended.
    cumulative = np.vstack([np.zeros((1, n), dtype=S.values.dtype), np.cumsum(S.values, axis=0)])
    columns = np.arange(n)
    band = cumulative[hi + 1, columns] - cumulative[lo, columns]
    return UniformSignal(kappa * np.real(band), S.dt, S.t0)


@lru_cache(maxsize=None)
def _kappa(sigma, n_v, gamma):
    n, dt, f0 = 1024, 1.0, 1.0 / 16
    t = dt * np.arange(n)
    reference = UniformSignal(np.cos(2 * np.pi * f0 * t), dt)
    S = synchrosqueeze(reference, WaveletSpec(sigma), n_v, gamma, n_xi=64)
    amplitude = np.abs(S.values.sum(axis=0))
    return 1.0 / np.median(amplitude[n // 8: n - n // 8])


def calibrate_kappa(wavelet, n_v, gamma=1e-8):
    """Return the constant that maps the squeezed band sum of a unit-amplitude tone
    to unit amplitude. It is computed once per (wavelet, n_v, gamma) from a reference
    tone and cached.
    """
    return _kappa(wavelet.sigma, int(n_v), float(gamma))
