import numpy as np

from src.core import CwtMatrix, DyadicSignal, FreqGrid, PhaseMatrix, SstMatrix
from src.signals.uniform import reflect_pad, to_dyadic
from src.transforms.cwt import cwt, cwt_time_derivative


def phase_transform(W, dW, gamma):
    """Estimate the instantaneous frequency at every cell of the CWT:
        omega(j, m) = Re( -i/(2 pi) * dW(j, m) / W(j, m) )

    Cells with |W(j, m)| <= gamma are excluded and hold `np.inf`.

    Args:
        W (core.CwtMatrix): The wavelet coefficients.
        dW (core.CwtMatrix): Their time derivative.
        gamma (float): Magnitude threshold, gamma > 0.

    Returns:
        omega (core.PhaseMatrix): Frequency estimates in Hz.
    """
    if W.values.shape != dW.values.shape:
        raise ValueError(f"Shape missmatch!\nW: {W.values.shape}\ndW: {dW.values.shape}")
    if not np.array_equal(W.grid.scales, dW.grid.scales):
        raise ValueError("W and dW are computed on different scale grids")
    if not gamma > 0:
        raise ValueError(f"Threshold must be positive, got gamma={gamma}")
    omega = np.full(W.values.shape, np.inf)
    keep = np.abs(W.values) > gamma
    omega[keep] = np.real(-1j / (2 * np.pi) * dW.values[keep] / W.values[keep])
    return PhaseMatrix(omega, W.grid)


def make_freq_grid(n, n_xi, dt):
    """Discretize [1/(n*dt), 1/(2*dt)] geometrically into `n_xi` frequencies.

    Returns:
        grid (core.FreqGrid): xi_l = 2^(l*delta_xi) * xi_min, l = 0, ..., n_xi-1,
            with delta_xi = log2(n/2) / (n_xi-1).
    """
    if n < 4 or n & (n - 1):
        raise ValueError(f"Signal length must be a power of two >= 4, got {n}")
    if n_xi < 2:
        raise ValueError(f"Frequency grid needs at least 2 bins, got n_xi={n_xi}")
    if not dt > 0:
        raise ValueError(f"Sampling interval must be positive, got dt={dt}")
    xi_min = 1.0 / (n * dt)
    xi_max = 1.0 / (2 * dt)
    delta_xi = np.log2(n / 2) / (n_xi - 1)
    xi = xi_min * np.exp2(delta_xi * np.arange(n_xi))
    xi[0], xi[-1] = xi_min, xi_max
    return FreqGrid(xi, delta_xi, xi_min, xi_max)


def squeeze_weights(W):
    """Per-cell contribution (ln2/n_v) * W(j, m) * a_j^(-1/2) to the squeezed matrix."""
    scales = W.grid.scales
    return (np.log(2) / W.grid.n_v) * W.values / np.sqrt(scales)[:, None]


def squeeze_bins(W, omega, grid, gamma):
    """Frequency bin of every cell of the CWT, or -1 if the cell is not included.
    A cell is included if |W| > gamma, its frequency estimate is positive and it
    rounds to a bin inside the grid.
    """
    w = omega.values
    keep = (np.abs(W.values) > gamma) & np.isfinite(w) & (w > 0)
    bins = np.full(w.shape, -1, dtype=np.int64)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.floor(np.log2(w[keep] / grid.xi_min) / grid.delta_xi + 0.5)
    inside = (k >= 0) & (k < len(grid.xi))
    k[~inside] = -1
    bins[keep] = k.astype(np.int64)
    return bins


def squeeze(W, omega, grid, gamma):
    """Reassign the CWT energy onto the frequency grid.
        S(l, m) = sum over j in B(l, m) of (ln2/n_v) * W(j, m) * a_j^(-1/2)

    where B(l, m) holds the included cells whose frequency estimate rounds to bin l.

    Args:
        W (core.CwtMatrix): The wavelet coefficients.
        omega (core.PhaseMatrix): Frequency estimates of the same shape.
        grid (core.FreqGrid): The target frequency grid.
        gamma (float): Magnitude threshold.

    Returns:
        S (core.SstMatrix): Squeezed coefficients of shape (n_xi, n).
    """
    if W.values.shape != omega.values.shape:
        raise ValueError(f"Shape missmatch!\nW: {W.values.shape}\nomega: {omega.values.shape}")
    n_xi = len(grid.xi)
    n = W.values.shape[1]
    bins = squeeze_bins(W, omega, grid, gamma)
    weights = squeeze_weights(W)
    included = bins >= 0
    # Flatten (bin, time) into a single index so that the partition is one bincount.
    columns = np.broadcast_to(np.arange(n), bins.shape)[included]
    flat = bins[included] * n + columns
    contrib = weights[included]
    real = np.bincount(flat, weights=contrib.real, minlength=n_xi * n)
    imag = np.bincount(flat, weights=contrib.imag, minlength=n_xi * n)
    values = (real + 1j * imag).reshape(n_xi, n)
    return SstMatrix(values, grid, W.dt, 0.0)


def synchrosqueeze(sig, wavelet, n_v, gamma, n_xi, derivative="spectral"):
    """Run the synchrosqueezing transform on a uniform signal.
    The signal is truncated to dyadic length n, padded with n/2 reflected samples on
    both sides, transformed, and cropped back to the central n samples.

    Args:
        sig (core.UniformSignal): The input signal.
        wavelet (WaveletSpec): The mother wavelet.
        n_v (int): Number of voices per octave.
        gamma (float): Magnitude threshold of the phase transform.
        n_xi (int): Number of frequency bins.
        derivative (str, optional): Stencil of the CWT time derivative, "spectral"
            or "central". Default value is "spectral".

    Returns:
        S (core.SstMatrix): Squeezed coefficients of shape (n_xi, n), with `t0` set to
            the time of the first retained sample.
    """
    dyadic = to_dyadic(sig)
    n = len(dyadic.inner)
    if n < 4:
        raise ValueError(f"Synchrosqueezing needs at least 4 samples, got {len(sig)}")
    n_pad = n // 2
    # The padded signal has length 2n = 2^(L+2) and spans one more octave.
    padded = DyadicSignal(reflect_pad(dyadic.inner, n_pad), dyadic.L + 1)
    W = cwt(padded, wavelet, n_v)
    dW = cwt_time_derivative(padded, wavelet, n_v, stencil=derivative)
    interior = slice(n_pad, n_pad + n)
    W = CwtMatrix(W.values[:, interior], W.grid, W.dt)
    dW = CwtMatrix(dW.values[:, interior], dW.grid, dW.dt)
    omega = phase_transform(W, dW, gamma)
    grid = make_freq_grid(n, n_xi, sig.dt)
    S = squeeze(W, omega, grid, gamma)
    return S._replace(t0=dyadic.inner.t0)
