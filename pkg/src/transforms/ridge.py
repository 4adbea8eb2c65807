import numpy as np
from tqdm import tqdm

from src.core import DegenerateInputError, Ridge


def _log_magnitudes(S):
    magnitude = np.abs(np.asarray(S.values if hasattr(S, "values") else S))
    q = magnitude.sum()
    if not q > 0:
        raise DegenerateInputError("The squeezed matrix is zero everywhere")
    with np.errstate(divide="ignore"):
        return np.log(magnitude / q)


def ridge_score(S, bins, lmbda):
    """Evaluate the ridge functional for a curve:
        sum_m log(|S(c(m), m)| / q) - lambda * sum_m (c(m) - c(m-1))^2

    Args:
        S (core.SstMatrix or np.Array): Squeezed coefficients of shape (n_xi, n).
        bins (np.Array): 0-based bin index c(m) for every column, shape (n,), or a
            batch of curves of shape (b, n).
        lmbda (float): Smoothness penalty.

    Returns:
        score (float or np.Array): The score of the curve(s); -inf if a curve passes
            through a zero cell.
    """
    logs = _log_magnitudes(S)
    bins = np.asarray(bins)
    n = logs.shape[1]
    fit = logs[bins, np.arange(n)].sum(axis=-1)
    jumps = np.square(np.diff(bins, axis=-1)).sum(axis=-1)
    return fit - lmbda * jumps


def extract_ridge(S, lmbda, progress=False):
    """Extract the curve maximizing the ridge functional by dynamic programming.

    The DP runs forward in time keeping, for every bin, the best score of a curve
    ending in that bin, and backtracks from the best final bin. All n_xi predecessor
    bins are considered at every step, so the result is the exact global maximizer.
    Ties are broken toward the lower bin index.

    Args:
        S (core.SstMatrix): Squeezed coefficients of shape (n_xi, n).
        lmbda (float): Smoothness penalty, lambda >= 0.
        progress (bool, optional): If True, display a progress bar over time.
            Default value is False.

    Returns:
        ridge (core.Ridge): The 0-based bin curve and its frequencies in Hz.
    """
    if not lmbda >= 0:
        raise ValueError(f"Smoothness penalty must be non-negative, got lambda={lmbda}")
    logs = _log_magnitudes(S)
    n_xi, n = logs.shape
    bins = np.arange(n_xi)
    # penalty[l, p] is the cost of jumping from bin p to bin l.
    penalty = lmbda * np.square(bins[:, None] - bins[None, :]).astype(np.float64)

    score = logs[:, 0].copy()
    backpointers = np.zeros((n, n_xi), dtype=np.int32)
    for m in tqdm(range(1, n), disable=not progress):
        candidates = score[None, :] - penalty
        best = np.argmax(candidates, axis=1)
        score = candidates[bins, best] + logs[:, m]
        backpointers[m] = best

    if not np.isfinite(score.max()):
        raise DegenerateInputError("Every curve passes through a zero cell")
    curve = np.empty(n, dtype=np.int64)
    curve[-1] = np.argmax(score)
    for m in range(n - 1, 0, -1):
        curve[m - 1] = backpointers[m, curve[m]]
    return Ridge(curve, S.grid.xi[curve])


def ridge_to_if(r, grid):
    """Map the bins of a ridge through the frequency grid (SST-IF, in Hz)."""
    bins = np.asarray(r.bins)
    if bins.size and (bins.min() < 0 or bins.max() >= len(grid.xi)):
        raise ValueError(f"Ridge bins outside [0, {len(grid.xi) - 1}]")
    return grid.xi[bins]
