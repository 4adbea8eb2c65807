from collections import namedtuple
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from src import core
from src.core import InsufficientBeatsError, UniformSignal
from src.edr.beats import MIN_BEATS, beat_census, detect_peaks
from src.infrastructure.config import as_public_dict
from src.infrastructure.logging import log_banner, log_event, log_parameters
from src.signals.uniform import median_detrend, resample
from src.transforms.cwt import WaveletSpec
from src.transforms.reconstruction import calibrate_kappa, reconstruct_band
from src.transforms.ridge import extract_ridge, ridge_score, ridge_to_if
from src.transforms.sst import synchrosqueeze


@dataclass(frozen=True)
class SstConfig:
    """Parameters for estimating the instantaneous frequency of a respiratory signal.
    If `resample_dt` is set, the signal is first linearly resampled to that interval.
    """
    sigma: float = 0.15
    n_v: int = 32
    gamma: float = 1e-8
    lmbda: float = 5.0
    n_w: int = 80
    n_xi: int = 512
    derivative: str = "spectral"
    resample_dt: float = None

    def __post_init__(self):
        _validate(self)
        if self.resample_dt is not None and not self.resample_dt > 0:
            raise ValueError(f"resample_dt must be positive, got {self.resample_dt}")


@dataclass(frozen=True)
class EdrConfig:
    """Parameters of the ECG-derived respiration pipeline."""
    sigma: float = 0.125
    n_v: int = 32
    gamma: float = 1e-8
    lmbda: float = 10.0
    n_w: int = 80
    n_xi: int = 512
    detrend_window: float = 0.1
    edr_dt: float = 0.25
    keep_pac: bool = True
    derivative: str = "spectral"

    def __post_init__(self):
        _validate(self)
        if not self.detrend_window > 0 or not self.edr_dt > 0:
            raise ValueError("detrend_window and edr_dt must be positive")


def _validate(cfg):
    WaveletSpec(cfg.sigma)
    if cfg.n_v < 1 or cfg.n_xi < 2 or cfg.n_w < 0:
        raise ValueError(f"Need n_v >= 1, n_xi >= 2 and n_w >= 0, got "
                         f"n_v={cfg.n_v}, n_xi={cfg.n_xi}, n_w={cfg.n_w}")
    if not cfg.gamma > 0 or not cfg.lmbda >= 0:
        raise ValueError(f"Need gamma > 0 and lambda >= 0, got gamma={cfg.gamma}, lambda={cfg.lmbda}")
    if cfg.derivative not in ("spectral", "central"):
        raise ValueError(f"Unknown derivative stencil {cfg.derivative!r}")


"""Result of `run_sst`: the SST-IF as a uniform signal, the ridge, the squeezed matrix,
the reconstruction from the band around the ridge, and the ridge score."""
SstRun = namedtuple("SstRun", ["if_est", "ridge", "sst", "reconstruction", "score"])

"""Result of `run_edr`.
`edr_t` is the beat-amplitude spline, `if_e` the SST-IF of `edr_t`, `edr` the
reconstructed respiration. `n_excluded` counts the beats left out of the spline and
`n_dropped` the spline beats beyond the dyadic analysis window."""
EdrResult = namedtuple("EdrResult",
    ["if_e", "edr", "sst", "ridge", "edr_t", "census", "n_excluded", "n_dropped"])


def _analyze(sig, cfg, stdout=None, progress=False):
    wavelet = WaveletSpec(cfg.sigma)
    S = synchrosqueeze(sig, wavelet, cfg.n_v, cfg.gamma, cfg.n_xi, derivative=cfg.derivative)
    ridge = extract_ridge(S, cfg.lmbda, progress=progress)
    if_est = UniformSignal(ridge_to_if(ridge, S.grid), S.dt, S.t0)
    kappa = calibrate_kappa(wavelet, cfg.n_v, cfg.gamma)
    reconstruction = reconstruct_band(S, ridge, cfg.n_w, kappa)
    score = float(ridge_score(S, ridge.bins, cfg.lmbda))
    if stdout is not None:
        log_event(f"SST grid: n={S.values.shape[1]}, n_xi={len(S.grid.xi)}, "
                  f"xi=[{S.grid.xi_min:.6g}, {S.grid.xi_max:.6g}] Hz", stdout)
        log_event(f"Ridge score: {score:.6g}; median SST-IF: {np.median(if_est.samples):.6g} Hz", stdout)
    return SstRun(if_est, ridge, S, reconstruction, score)


def run_sst(sig, cfg=SstConfig(), stdout=None, progress=False):
    """Estimate the instantaneous frequency of an oscillatory signal (SST-IF).

    Args:
        sig (core.UniformSignal): The signal, e.g. a respiration belt recording.
        cfg (SstConfig, optional): The parameters. Default value is `SstConfig()`.
        stdout (file, optional): Stream for logging information, or None for no
            logging. Default value is None.
        progress (bool, optional): If True, display a progress bar for the ridge
            extraction. Default value is False.

    Returns:
        run (SstRun): The estimate over the dyadic-truncated record.
    """
    if stdout is not None:
        log_banner(stdout)
        log_parameters(as_public_dict(cfg), stdout)
    if cfg.resample_dt is not None:
        sig = resample(sig, cfg.resample_dt)
    return _analyze(sig, cfg, stdout, progress)


def beat_amplitudes(ecg, times):
    """Read the ECG at the samples nearest to `times`."""
    idx = np.floor((np.asarray(times) - ecg.t0) / ecg.dt + 0.5).astype(np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= len(ecg)):
        raise ValueError("Beat times fall outside the ECG record")
    return ecg.samples[idx]


def spline_beats(beats, keep_pac=True):
    """Return the mask of beats that enter the beat-amplitude spline.
    PVC beats are always excluded; PAC beats are kept unless `keep_pac` is False.
    """
    excluded = ("PVC",) if keep_pac else ("PVC", "PAC")
    return np.array([label not in excluded for label in beats.labels], dtype=bool)


def build_edr_t(ecg, beats, edr_dt, keep_pac=True):
    """Construct the traditional EDR signal: a natural cubic spline through the ECG
    amplitudes at the beat times, sampled uniformly from the first to the last beat.

    Args:
        ecg (core.UniformSignal): The detrended ECG.
        beats (core.BeatSeries): The beats.
        edr_dt (float): Sampling interval of the result in seconds.
        keep_pac (bool, optional): If False, PAC beats are excluded together with the
            PVC beats. Default value is True.

    Returns:
        edr_t (core.UniformSignal): The spline, starting at the first used beat.
    """
    used = beats.select(spline_beats(beats, keep_pac))
    if len(used) < MIN_BEATS:
        raise InsufficientBeatsError(
            f"{len(used)} beats left after excluding ectopic beats, at least {MIN_BEATS} needed")
    amplitudes = beat_amplitudes(ecg, used.times)
    spline = CubicSpline(used.times, amplitudes, bc_type="natural")
    span = used.times[-1] - used.times[0]
    n = int(np.floor(span / edr_dt * (1 + 1e-12))) + 1
    if n < 2:
        raise InsufficientBeatsError(f"Beats span {span:.3g}s, shorter than edr_dt={edr_dt}s")
    t = used.times[0] + edr_dt * np.arange(n)
    return UniformSignal(spline(t), edr_dt, used.times[0])


def run_edr(ecg, beats, cfg=EdrConfig(), stdout=None, progress=False):
    """Derive the respiration from a single-lead ECG.

    The steps are: remove the baseline wander with a running median; build the
    beat-amplitude spline EDR_T; synchrosqueeze EDR_T; extract the ridge (SST-IF_E);
    reconstruct the respiration from the band around the ridge.

    Args:
        ecg (core.UniformSignal): The raw ECG.
        beats (core.BeatSeries): Beat times and labels, detected or annotated.
        cfg (EdrConfig, optional): The parameters. Default value is `EdrConfig()`.
        stdout (file, optional): Stream for logging information, or None for no
            logging. Default value is None.
        progress (bool, optional): If True, display a progress bar for the ridge
            extraction. Default value is False.

    Returns:
        result (EdrResult): The estimates over the dyadic-truncated EDR_T record.
    """
    census = beat_census(beats)
    if stdout is not None:
        log_banner(stdout)
        log_parameters(as_public_dict(cfg), stdout)
        log_event(f"Beats: {census.total} total, {census.pvc} PVC, {census.pac} PAC", stdout)
        if census.pvc_burden_exceeded:
            log_event(f"WARNING: PVC burden {100 * census.pvc_ratio:.2f}% exceeds 4%", stdout)

    detrended = median_detrend(ecg, cfg.detrend_window)
    keep = spline_beats(beats, cfg.keep_pac)
    n_excluded = int(np.sum(~keep))
    edr_t = build_edr_t(detrended, beats, cfg.edr_dt, cfg.keep_pac)

    run = _analyze(edr_t, cfg, stdout, progress)
    t_end = run.if_est.times[-1]
    n_dropped = int(np.sum(beats.times[keep] > t_end))
    if stdout is not None:
        log_event(f"Excluded beats: {n_excluded}; dropped beats beyond {t_end:.6g}s: {n_dropped}", stdout)
    return EdrResult(run.if_est, run.reconstruction, run.sst, run.ridge, edr_t, census,
                     n_excluded, n_dropped)


class EdrEstimator(core.Estimator):
    """Estimator adapter running `run_edr` on generated ECG samples.

    Attributes:
        cfg (EdrConfig): The pipeline parameters.
        use_annotations (bool): If True, use the generated beats; otherwise detect them.
    """

    def __init__(self, cfg=EdrConfig(), use_annotations=True):
        self.cfg = cfg
        self.use_annotations = use_annotations

    def estimate(self, sample):
        beats = sample.beats
        if not self.use_annotations:
            beats = detect_peaks(median_detrend(sample.signal, self.cfg.detrend_window))
        return run_edr(sample.signal, beats, self.cfg).if_e


class SstEstimator(core.Estimator):
    """Estimator adapter running `run_sst` on generated respiration samples."""

    def __init__(self, cfg=SstConfig()):
        self.cfg = cfg

    def estimate(self, sample):
        return run_sst(sample.signal, self.cfg).if_est
