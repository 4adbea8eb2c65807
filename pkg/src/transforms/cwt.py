from collections import namedtuple

import numpy as np

from src.core import CwtMatrix, ScaleGrid


class WaveletSpec(namedtuple("WaveletSpec", ["sigma"])):
    """Mother wavelet given by its Fourier transform psi_hat(xi) = 2^(-((xi-1)/sigma)^2).

    Attributes:
        sigma (float): Width of the frequency-domain bump, 0 < sigma < 1.
    """
    __slots__ = ()

    def __new__(cls, sigma):
        if not 0 < sigma < 1:
            raise ValueError(f"Wavelet width must satisfy 0 < sigma < 1, got {sigma}")
        return super().__new__(cls, float(sigma))


RESPIRATION_WAVELET = WaveletSpec(0.15)
EDR_WAVELET = WaveletSpec(0.125)


def wavelet_hat(xi, spec):
    """Evaluate the wavelet in the frequency domain.
    The bump is truncated to exactly 0 for xi <= 0, which makes the wavelet
    analytic and admissible.

    Args:
        xi (float or np.Array): Dimensionless frequency.
        spec (WaveletSpec): The wavelet.

    Returns:
        psi_hat (float or np.Array): Values of the same shape as `xi`.
    """
    xi = np.asarray(xi, dtype=np.float64)
    psi = np.where(xi > 0, np.exp2(-np.square((xi - 1.0) / spec.sigma)), 0.0)
    return psi if psi.ndim else float(psi)


def make_scale_grid(L, n_v, dt):
    """Return the scales a_j = 2^(j/n_v) * dt, j = 1, ..., L*n_v."""
    if n_v < 1:
        raise ValueError(f"Number of voices must be at least 1, got {n_v}")
    j = np.arange(1, L * n_v + 1)
    return ScaleGrid(np.exp2(j / n_v) * dt, int(n_v))


def _filtered_spectra(sig, spec, n_v, derivative=False):
    x = sig.inner.samples
    dt = sig.inner.dt
    grid = make_scale_grid(sig.L, n_v, dt)
    xi = np.fft.fftfreq(len(x), d=dt)
    x_hat = np.fft.fft(x)
    # Rows are indexed by scale, columns by discrete frequency (Hz).
    psi = wavelet_hat(np.outer(grid.scales, xi), spec) * np.sqrt(grid.scales)[:, None]
    spectra = x_hat[None, :] * psi
    if derivative:
        spectra = spectra * (2j * np.pi * xi)[None, :]
    return spectra, grid


def cwt(sig, spec, n_v):
    """Continuous wavelet transform of a dyadic signal, computed in the frequency
    domain. Row j is the inverse DFT of f_hat(xi) * conj(psi_hat(a_j * xi)) * a_j^(1/2).

    Args:
        sig (core.DyadicSignal): The signal, of length n = 2^(L+1).
        spec (WaveletSpec): The mother wavelet.
        n_v (int): Number of voices per octave.

    Returns:
        W (core.CwtMatrix): Coefficients of shape (L*n_v, n).
    """
    spectra, grid = _filtered_spectra(sig, spec, n_v)
    return CwtMatrix(np.fft.ifft(spectra, axis=1), grid, sig.inner.dt)


def cwt_time_derivative(sig, spec, n_v, stencil="central"):
    """Time derivative of the continuous wavelet transform.

    Args:
        sig (core.DyadicSignal): The signal, of length n = 2^(L+1).
        spec (WaveletSpec): The mother wavelet.
        n_v (int): Number of voices per octave.
        stencil (str, optional): "central" takes central finite differences of the
            CWT along time, one-sided at the two edges. "spectral" differentiates
            exactly in the frequency domain. Default value is "central".

    Returns:
        dW (core.CwtMatrix): Derivative coefficients of shape (L*n_v, n).
    """
    if stencil == "central":
        W = cwt(sig, spec, n_v)
        return W._replace(values=np.gradient(W.values, W.dt, axis=1, edge_order=1))
    if stencil == "spectral":
        spectra, grid = _filtered_spectra(sig, spec, n_v, derivative=True)
        return CwtMatrix(np.fft.ifft(spectra, axis=1), grid, sig.inner.dt)
    raise ValueError(f"Unknown derivative stencil {stencil!r}")
