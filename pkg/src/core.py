import abc
from collections import namedtuple

import numpy as np


#------------------------------------- Error types --------------------------------------#
class InsufficientBeatsError(ValueError):
    """Raised when fewer beats are available than a stage requires."""


class DegenerateInputError(ValueError):
    """Raised when a time-frequency representation carries no usable energy."""


class ParseError(ValueError):
    """Raised when an input file cannot be parsed.

    Attributes:
        line_number (int): One-based number of the offending line, or None if the
            error is not tied to a single line.
    """

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


#------------------------------------- Data records -------------------------------------#
class UniformSignal(namedtuple("UniformSignal", ["samples", "dt", "t0"])):
    """A real-valued, uniformly sampled time series.
    Sample `m` corresponds to time `t0 + m * dt`.

    Attributes:
        samples (np.Array): A 1D float array of the sample values.
        dt (float): Sampling interval in seconds.
        t0 (float): Time of the first sample in seconds.
    """
    __slots__ = ()

    def __new__(cls, samples, dt, t0=0.0):
        samples = np.asarray(samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"Expected a 1D array of samples, got shape {samples.shape}")
        if len(samples) < 2:
            raise ValueError(f"A signal needs at least 2 samples, got {len(samples)}")
        if not dt > 0:
            raise ValueError(f"Sampling interval must be positive, got dt={dt}")
        return super().__new__(cls, samples, float(dt), float(t0))

    def __len__(self):
        return len(self.samples)

    @property
    def times(self):
        """np.Array: The sample times in seconds."""
        return self.t0 + self.dt * np.arange(len(self.samples))


class DyadicSignal(namedtuple("DyadicSignal", ["inner", "L"])):
    """A uniform signal of length n = 2^(L+1)."""
    __slots__ = ()

    def __new__(cls, inner, L):
        if L < 0 or len(inner) != 2 ** (L + 1):
            raise ValueError(f"Signal of length {len(inner)} is not of length 2^(L+1), L={L}")
        return super().__new__(cls, inner, int(L))


"""Geometric scale grid a_j = 2^(j/n_v) * dt, j = 1, ..., L*n_v."""
ScaleGrid = namedtuple("ScaleGrid", ["scales", "n_v"])

"""Complex wavelet coefficients of shape (L*n_v, n) over a `ScaleGrid`."""
CwtMatrix = namedtuple("CwtMatrix", ["values", "grid", "dt"])

"""Per-cell instantaneous-frequency estimates in Hz; excluded cells hold `np.inf`."""
PhaseMatrix = namedtuple("PhaseMatrix", ["values", "grid"])

"""Log-spaced frequency axis xi_l = 2^(l*delta_xi) * xi_min, l = 0, ..., n_xi-1."""
FreqGrid = namedtuple("FreqGrid", ["xi", "delta_xi", "xi_min", "xi_max"])

"""Synchrosqueezed coefficients of shape (n_xi, n) on a `FreqGrid`."""
SstMatrix = namedtuple("SstMatrix", ["values", "grid", "dt", "t0"])

"""A 0-based frequency-bin curve and its frequencies in Hz."""
Ridge = namedtuple("Ridge", ["bins", "freqs"])


BEAT_LABELS = ("N", "PVC", "PAC")


class BeatSeries(namedtuple("BeatSeries", ["times", "labels", "polarity"])):
    """R-peak (or S-peak) times with a label per beat.

    Attributes:
        times (np.Array): Strictly increasing beat times in seconds.
        labels (tuple[str]): One of "N", "PVC", "PAC" for every beat.
        polarity (str): "R" if the beats are R-peaks, "S" if they are S-peaks.
    """
    __slots__ = ()

    def __new__(cls, times, labels=None, polarity="R"):
        times = np.asarray(times, dtype=np.float64).reshape(-1)
        labels = ("N",) * len(times) if labels is None else tuple(labels)
        if len(labels) != len(times):
            raise ValueError(f"Got {len(labels)} labels for {len(times)} beats")
        unknown = set(labels) - set(BEAT_LABELS)
        if unknown:
            raise ValueError(f"Unknown beat labels: {sorted(unknown)}")
        if np.any(np.diff(times) <= 0):
            raise ValueError("Beat times must be strictly increasing")
        if polarity not in ("R", "S"):
            raise ValueError(f"Polarity must be 'R' or 'S', got {polarity!r}")
        return super().__new__(cls, times, labels, polarity)

    def __len__(self):
        return len(self.times)

    def select(self, keep):
        """Return the beats for which the boolean mask `keep` is True."""
        keep = np.asarray(keep, dtype=bool)
        labels = tuple(l for l, k in zip(self.labels, keep) if k)
        return BeatSeries(self.times[keep], labels, self.polarity)


"""Returned by every call to `Generator.generate`.
A `Sample` holds the generated `signal`, the ground-truth instantaneous frequency
`true_iif` sampled on the signal grid, and the `beats` (None for respiration).
"""
Sample = namedtuple("Sample", ["signal", "true_iif", "beats"])


#---------------------------------- Abstract interfaces ---------------------------------#
class Generator(abc.ABC):
    """Abstract ground-truth signal generator.
    This interface defines an API for a generator of synthetic signals whose
    instantaneous frequency is known exactly. Generation is a pure function of the
    generator configuration and the seed.
    """

    @abc.abstractmethod
    def generate(self, seed):
        """Generate a signal and its ground truth.

        Args:
            seed (int): Seed for the random number generator.

        Returns:
            sample (core.Sample): A namedtuple containing:
                signal (core.UniformSignal): The generated signal.
                true_iif (np.Array): The true instantaneous frequency in Hz at every
                    sample of `signal`.
                beats (core.BeatSeries): The generated beats, or None.
        """


class Estimator(abc.ABC):
    """Abstract instantaneous-frequency estimator.
    This interface defines an API for an estimator that consumes a generated
    `Sample` and returns its estimate of the instantaneous frequency.
    """

    @abc.abstractmethod
    def estimate(self, sample):
        """Estimate the instantaneous frequency of `sample`.

        Returns:
            if_est (core.UniformSignal): The estimated instantaneous frequency in Hz.
        """
