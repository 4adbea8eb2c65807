from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from src import core
from src.core import BeatSeries, Sample, UniformSignal
from src.infrastructure.util_funcs import make_rng


def _unit_amplitude(t):
    return np.ones_like(t)


def _record_times(duration, dt):
    n = int(np.floor(duration / dt + 0.5))
    if n < 2:
        raise ValueError(f"A record of {duration}s at dt={dt} has fewer than 2 samples")
    return dt * np.arange(n)


#-------------------------------------- Respiration --------------------------------------#
@dataclass(frozen=True)
class RespirationSpec:
    """An adaptive harmonic model A(t) s(2 pi phi(t)) + noise of a respiratory signal.

    Attributes:
        phase_fn (Callable): The phase phi(t) in cycles, increasing on the record.
        phase_derivative (Callable): phi'(t) in Hz, the ideal instantaneous frequency.
        amplitude_fn (Callable): The positive amplitude A(t). Default is A = 1.
        harmonics (tuple): Pairs (k, c_k) of the Fourier coefficients of the
            2pi-periodic shape s(theta) = sum_k Re(c_k exp(i k theta)).
            The first harmonic must be present and dominant. Default is a cosine.
        delta (float): Dominance bound, |c_k| < delta |c_1| for k != 1, 0 < delta < 1.
        noise_sd (float): Standard deviation of the added white noise.
        duration (float): Length of the record in seconds.
        dt (float): Sampling interval in seconds.
    """
    phase_fn: Callable
    phase_derivative: Callable
    amplitude_fn: Callable = _unit_amplitude
    harmonics: tuple = ((1, 1.0),)
    delta: float = 0.5
    noise_sd: float = 0.0
    duration: float = 300.0
    dt: float = 0.25

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError(f"Dominance bound must satisfy 0 < delta < 1, got {self.delta}")
        if self.noise_sd < 0:
            raise ValueError(f"Noise level must be non-negative, got {self.noise_sd}")
        if not self.dt > 0 or not self.duration > 0:
            raise ValueError(f"Need positive duration and dt, got {self.duration}, {self.dt}")
        coefficients = dict(self.harmonics)
        if any(int(k) != k or k < 1 for k in coefficients):
            raise ValueError(f"Harmonic orders must be positive integers, got {sorted(coefficients)}")
        if 1 not in coefficients or coefficients[1] == 0:
            raise ValueError("The shape function needs a non-zero first harmonic")
        c1 = abs(coefficients[1])
        for k, c in coefficients.items():
            if k != 1 and not abs(c) < self.delta * c1:
                raise ValueError(f"Harmonic {k} with |c|={abs(c):.3g} is not dominated "
                                 f"by the first harmonic (delta={self.delta})")

        t = self.times()
        if np.any(self.amplitude_fn(t) <= 0):
            raise ValueError("Amplitude must be positive on the record")
        if np.any(self.phase_derivative(t) <= 0):
            raise ValueError("Instantaneous frequency must be positive on the record")

    def times(self):
        return _record_times(self.duration, self.dt)

    def shape(self, theta):
        """Evaluate the shape function s at the angles `theta`."""
        s = np.zeros_like(theta, dtype=np.float64)
        for k, c in self.harmonics:
            s += abs(c) * np.cos(k * theta + np.angle(c))
        return s

    def clean(self, t):
        """The noise-free signal A(t) s(2 pi phi(t))."""
        t = np.asarray(t, dtype=np.float64)
        return self.amplitude_fn(t) * self.shape(2 * np.pi * self.phase_fn(t))

    @classmethod
    def tone(cls, freq, **kwargs):
        """Constant instantaneous frequency `freq`: phi(t) = freq * t."""
        return cls(phase_fn=lambda t: freq * t,
                   phase_derivative=lambda t: np.full_like(t, freq, dtype=np.float64),
                   **kwargs)

    @classmethod
    def chirp(cls, f_start, f_end, **kwargs):
        """Instantaneous frequency moving linearly from `f_start` at t = 0 to `f_end`
        at the end of the record.
        """
        duration = kwargs.get("duration", cls.duration)
        rate = (f_end - f_start) / duration
        return cls(phase_fn=lambda t: f_start * t + 0.5 * rate * t ** 2,
                   phase_derivative=lambda t: f_start + rate * t,
                   **kwargs)

    @classmethod
    def modulated(cls, f_mean, f_dev, f_mod, **kwargs):
        """Instantaneous frequency oscillating as f_mean + f_dev sin(2 pi f_mod t)."""
        if not abs(f_dev) < f_mean:
            raise ValueError(f"Frequency deviation {f_dev} must be below the mean {f_mean}")
        w = 2 * np.pi * f_mod
        return cls(phase_fn=lambda t: f_mean * t - f_dev / w * (np.cos(w * t) - 1),
                   phase_derivative=lambda t: f_mean + f_dev * np.sin(w * t),
                   **kwargs)


def gen_respiration(spec, seed):
    """Sample the respiratory model of `spec`.

    Args:
        spec (RespirationSpec): The model.
        seed (int): Seed for the noise.

    Returns:
        sample (core.Sample): The signal, its ideal instantaneous frequency phi'(t)
            at every sample, and no beats.
    """
    rng = make_rng(seed)
    t = spec.times()
    samples = spec.clean(t)
    if spec.noise_sd > 0:
        samples = samples + spec.noise_sd * rng.standard_normal(len(t))
    true_iif = np.asarray(spec.phase_derivative(t), dtype=np.float64)
    return Sample(UniformSignal(samples, spec.dt), true_iif, None)


#------------------------------------------ ECG ------------------------------------------#
RR_MODELS = ("metronomic", "af", "ramp")

# Ectopic beats arrive after this fraction of the regular RR interval.
PREMATURITY = 0.7
# First and last beats keep this distance in seconds to the record edges.
BEAT_MARGIN = 0.5


@dataclass(frozen=True)
class EcgSpec:
    """A spike-train ECG whose beat amplitudes follow a respiration.

    Attributes:
        rr_model (str): "metronomic" for constant RR intervals of `rr_mean`, "af" for
            independent draws uniform on `rr_range`, "ramp" for intervals moving
            linearly from `rr_range[0]` to `rr_range[1]` over the record.
        rr_mean (float): RR interval of the metronomic model in seconds.
        rr_range (tuple): Interval bounds of the AF-like and ramp models in seconds.
        spike_width (float): Width of the raised-cosine beat template in seconds.
        amplitude (float): Beat amplitude without modulation.
        respiration (RespirationSpec): The modulating respiration; only its noise-free
            model is used.
        mod_depth (float): Beat amplitudes are scaled by 1 + mod_depth * resp(t_i).
        drift_amplitude (float): Amplitude of the sinusoidal baseline wander.
        drift_freq (float): Frequency of the baseline wander in Hz.
        noise_sd (float): Standard deviation of the added white noise.
        pac_fraction (float): Probability that a beat is a PAC: premature, with a
            valid modulated amplitude.
        pvc_fraction (float): Probability that a beat is a PVC: premature, with a
            random amplitude unrelated to the respiration.
        duration (float): Length of the record in seconds.
        dt (float): Sampling interval in seconds.
    """
    rr_model: str = "metronomic"
    rr_mean: float = 0.8
    rr_range: tuple = (0.4, 1.2)
    spike_width: float = 0.04
    amplitude: float = 1.0
    respiration: RespirationSpec = field(default_factory=lambda: RespirationSpec.tone(0.25))
    mod_depth: float = 0.0
    drift_amplitude: float = 0.0
    drift_freq: float = 0.05
    noise_sd: float = 0.0
    pac_fraction: float = 0.0
    pvc_fraction: float = 0.0
    duration: float = 300.0
    dt: float = 0.002

    def __post_init__(self):
        if self.rr_model not in RR_MODELS:
            raise ValueError(f"Unknown RR model {self.rr_model!r}, expected one of {RR_MODELS}")
        lo, hi = self.rr_range
        shortest = self.rr_mean if self.rr_model == "metronomic" else min(lo, hi)
        if self.rr_model == "af" and not lo < hi:
            raise ValueError(f"AF-like RR interval needs low < high, got {self.rr_range}")
        # Premature beats must still not overlap the previous template.
        if not PREMATURITY * shortest > self.spike_width:
            raise ValueError(f"RR intervals down to {shortest}s are too short for "
                             f"spikes of width {self.spike_width}s")
        if not self.spike_width < 2 * BEAT_MARGIN:
            raise ValueError(f"Spike width {self.spike_width}s must stay below {2 * BEAT_MARGIN}s "
                             f"to fit between the edge beats and the record edges")
        if not self.spike_width >= 2 * self.dt:
            raise ValueError(f"Spike width {self.spike_width}s spans less than two samples")
        if not self.amplitude > 0:
            raise ValueError(f"Beat amplitude must be positive, got {self.amplitude}")
        if self.mod_depth < 0 or self.noise_sd < 0 or self.drift_amplitude < 0:
            raise ValueError("Modulation depth, drift amplitude and noise must be non-negative")
        if self.pac_fraction < 0 or self.pvc_fraction < 0 or self.pac_fraction + self.pvc_fraction > 1:
            raise ValueError(f"Invalid ectopic fractions: PAC {self.pac_fraction}, PVC {self.pvc_fraction}")
        if not self.duration > 2 * max(lo, hi, self.rr_mean):
            raise ValueError(f"Duration {self.duration}s is too short for the RR model")


def _next_rr(spec, t, rng):
    if spec.rr_model == "metronomic":
        return spec.rr_mean
    lo, hi = spec.rr_range
    if spec.rr_model == "af":
        return rng.uniform(lo, hi)
    return lo + (hi - lo) * min(t / spec.duration, 1.0)


def _beat_schedule(spec, rng):
    """Beat times and labels from the RR model, first beat half a second in."""
    times, labels = [], []
    t, label = BEAT_MARGIN, "N"
    while t <= spec.duration - BEAT_MARGIN:
        times.append(t)
        labels.append(label)
        rr = _next_rr(spec, t, rng)
        u = rng.random()
        if u < spec.pvc_fraction:
            label = "PVC"
        elif u < spec.pvc_fraction + spec.pac_fraction:
            label = "PAC"
        else:
            label = "N"
        if label != "N":
            rr *= PREMATURITY
        t += rr
    return np.asarray(times), tuple(labels)


def gen_ecg(spec, seed):
    """Generate a synthetic single-lead ECG.

    Raised-cosine spikes are placed at the beat times, snapped to the sample grid.
    Every normal or PAC beat is scaled by 1 + m * resp(t_i), PVC beats get a random
    amplitude. Baseline wander and white noise are added last.

    Args:
        spec (EcgSpec): The model.
        seed (int): Seed for the RR intervals, ectopic beats and noise.

    Returns:
        sample (core.Sample): The ECG, the ideal instantaneous frequency of the
            modulating respiration at every ECG sample, and the true beats.
    """
    rng = make_rng(seed)
    t = _record_times(spec.duration, spec.dt)
    beat_times, labels = _beat_schedule(spec, rng)
    idx = np.floor(beat_times / spec.dt + 0.5).astype(np.int64)
    beat_times = spec.dt * idx

    modulation = 1 + spec.mod_depth * spec.respiration.clean(beat_times)
    if np.any(modulation <= 0):
        raise ValueError(f"Modulation depth {spec.mod_depth} makes beat amplitudes non-positive")
    amplitudes = spec.amplitude * modulation
    pvc = np.array([label == "PVC" for label in labels], dtype=bool)
    random_amplitudes = spec.amplitude * rng.uniform(0.5, 2.0, size=len(idx))
    amplitudes[pvc] = random_amplitudes[pvc]

    half = int(np.floor(0.5 * spec.spike_width / spec.dt))
    offsets = np.arange(-half, half + 1)
    template = 0.5 * (1 + np.cos(2 * np.pi * offsets * spec.dt / spec.spike_width))
    ecg = np.zeros(len(t))
    np.add.at(ecg, idx[:, None] + offsets[None, :], amplitudes[:, None] * template[None, :])

    ecg += spec.drift_amplitude * np.sin(2 * np.pi * spec.drift_freq * t)
    if spec.noise_sd > 0:
        ecg += spec.noise_sd * rng.standard_normal(len(t))

    true_iif = np.asarray(spec.respiration.phase_derivative(t), dtype=np.float64)
    return Sample(UniformSignal(ecg, spec.dt), true_iif, BeatSeries(beat_times, labels, "R"))


#--------------------------------------- Generators ---------------------------------------#
class RespirationGenerator(core.Generator):
    """Generator of respiration samples for a fixed `RespirationSpec`."""

    def __init__(self, spec):
        self.spec = spec

    def generate(self, seed):
        return gen_respiration(self.spec, seed)


class EcgGenerator(core.Generator):
    """Generator of ECG samples for a fixed `EcgSpec`."""

    def __init__(self, spec):
        self.spec = spec

    def generate(self, seed):
        return gen_ecg(self.spec, seed)


#------------------------------------- Command surface -------------------------------------#
KINDS = ("respiration", "ecg")


@dataclass(frozen=True)
class SynthConfig:
    """Flat parameters of the `synth` command, addressable as `key=value`.
    The instantaneous frequency is constant at `iif` unless `iif_end` is given, in
    which case it moves linearly to `iif_end`. A `dt` of None selects 0.25 s for
    respiration and 0.002 s for ECG.
    """
    kind: str = "respiration"
    iif: float = 0.3
    iif_end: float = None
    rr: str = "metronomic"
    rr_mean: float = 0.8
    rr_low: float = 0.4
    rr_high: float = 1.2
    duration: float = 300.0
    dt: float = None
    mod_depth: float = 0.1
    noise: float = 0.0
    drift: float = 0.0
    pac_fraction: float = 0.0
    pvc_fraction: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"Unknown signal kind {self.kind!r}, expected one of {KINDS}")
        if self.rr not in RR_MODELS:
            raise ValueError(f"Unknown RR model {self.rr!r}, expected one of {RR_MODELS}")


def _respiration_spec(cfg, dt, noise_sd):
    kwargs = dict(duration=cfg.duration, dt=dt, noise_sd=noise_sd)
    if cfg.iif_end is None:
        return RespirationSpec.tone(cfg.iif, **kwargs)
    return RespirationSpec.chirp(cfg.iif, cfg.iif_end, **kwargs)


def build_generator(cfg):
    """Return the generator described by a `SynthConfig`."""
    if cfg.kind == "respiration":
        dt = 0.25 if cfg.dt is None else cfg.dt
        return RespirationGenerator(_respiration_spec(cfg, dt, cfg.noise))
    spec = EcgSpec(
        rr_model=cfg.rr,
        rr_mean=cfg.rr_mean,
        rr_range=(cfg.rr_low, cfg.rr_high),
        respiration=_respiration_spec(cfg, 0.25, 0.0),
        mod_depth=cfg.mod_depth,
        drift_amplitude=cfg.drift,
        noise_sd=cfg.noise,
        pac_fraction=cfg.pac_fraction,
        pvc_fraction=cfg.pvc_fraction,
        duration=cfg.duration,
        dt=0.002 if cfg.dt is None else cfg.dt,
    )
    return EcgGenerator(spec)
