import io

import numpy as np
import pytest

from src.core import BeatSeries, DegenerateInputError, InsufficientBeatsError, UniformSignal
from src.edr.beats import detect_peaks
from src.edr.pipeline import (EdrConfig, EdrEstimator, SstConfig, SstEstimator, build_edr_t,
                              run_edr, run_sst, spline_beats)
from src.evaluation.metrics import (detect_breath_marks, interior, irr_from_breath_marks,
                                    score_against_truth)
from src.evaluation_loop import EvaluationLoop
from src.infrastructure.logging import BANNER
from src.signals.uniform import median_detrend
from src.synthesis.generators import (EcgGenerator, EcgSpec, RespirationGenerator, RespirationSpec,
                                      gen_ecg, gen_respiration)
from src.transforms.sst import make_freq_grid


EDR_N = 1024


def _on_bin(freq, n, n_xi, dt=0.25):
    """The frequency of the grid bin nearest to `freq`."""
    xi = make_freq_grid(n, n_xi, dt).xi
    return float(xi[np.argmin(np.abs(np.log2(xi / freq)))])


def _relative_errors(if_est, truth_fn):
    inner = interior(len(if_est), 0.1)
    est = if_est.samples[inner]
    ref = truth_fn(if_est.times[inner])
    return np.abs(est - ref) / ref


def _ecg(rr_model, freq, seed, **kwargs):
    spec = EcgSpec(rr_model=rr_model, mod_depth=0.1, respiration=RespirationSpec.tone(freq), **kwargs)
    return gen_ecg(spec, seed)


def _detected_edr(sample, cfg=EdrConfig()):
    beats = detect_peaks(median_detrend(sample.signal, cfg.detrend_window))
    return run_edr(sample.signal, beats, cfg)


class TestRespirationIf:

    def test_tone(self):
        sample = gen_respiration(RespirationSpec.tone(0.3, duration=1024.0, dt=0.25), seed=0)
        run = run_sst(sample.signal)
        assert len(run.if_est) == 4096
        step = 0.3 * (2 ** run.sst.grid.delta_xi - 1)
        inner = run.if_est.samples[interior(4096, 0.1)]
        assert np.mean(np.abs(inner - 0.3) <= step) >= 0.99
        assert np.isfinite(run.score)

    def test_chirp(self):
        spec = RespirationSpec.chirp(0.2, 0.3, duration=1024.0, dt=0.25)
        run = run_sst(gen_respiration(spec, seed=0).signal)
        assert np.median(_relative_errors(run.if_est, spec.phase_derivative)) < 0.03

    def test_noise_robustness(self):
        noise_sd = np.sqrt(0.5 / 10)
        generator = RespirationGenerator(RespirationSpec.tone(0.3, noise_sd=noise_sd, duration=256.0))
        loop = EvaluationLoop(generator, SstEstimator(SstConfig(n_xi=256)), stdout=io.StringIO())
        # One segment per sample makes E_K the median relative error in percent.
        errors = loop.run(range(20), K=10 ** 6, log_every=5)
        assert np.median(errors) < 5.0
        assert loop.run_history["seeds"] == list(range(20))
        assert "Seed (20/20)" in loop.stdout.getvalue()

    def test_matches_intuitive_rate(self):
        spec = RespirationSpec.modulated(0.25, 0.03, 1 / 256, duration=512.0, dt=0.05)
        sample = gen_respiration(spec, seed=0)
        run = run_sst(sample.signal, SstConfig(resample_dt=0.25))
        assert run.if_est.dt == 0.25 and len(run.if_est) == 2048

        irr = irr_from_breath_marks(detect_breath_marks(sample.signal), run.if_est.times)
        inner = interior(len(irr), 0.1)
        sst_if = run.if_est.samples[inner]
        assert np.median(np.abs(irr[inner] - sst_if) / sst_if) < 0.03

    def test_central_stencil_underestimates(self):
        sig = gen_respiration(RespirationSpec.tone(0.3, duration=256.0), seed=0).signal
        spectral = run_sst(sig, SstConfig(n_xi=256)).if_est.samples
        central = run_sst(sig, SstConfig(n_xi=256, derivative="central")).if_est.samples
        assert np.median(central) < np.median(spectral)

    def test_zero_signal_is_degenerate(self):
        with pytest.raises(DegenerateInputError):
            run_sst(UniformSignal(np.zeros(256), 0.25))

    def test_logs_parameters(self):
        stdout = io.StringIO()
        sig = gen_respiration(RespirationSpec.tone(0.3, duration=64.0), seed=0).signal
        run_sst(sig, SstConfig(n_xi=64), stdout=stdout)
        text = stdout.getvalue()
        assert text.startswith(BANNER)
        assert "lambda=5.0" in text.replace(" ", "")
        assert "Ridge score" in text


class TestEdr:

    def test_sinus_rhythm(self):
        freq = _on_bin(0.25, EDR_N, 512)
        sample = _ecg("metronomic", freq, seed=0)
        result = _detected_edr(sample)
        assert len(result.if_e) == EDR_N
        assert result.n_dropped > 0
        inner = result.if_e.samples[interior(EDR_N, 0.1)]
        assert abs(np.median(inner) - 0.25) / 0.25 < 0.02
        assert score_against_truth(sample, result.if_e, K=20).e_k < 2.0

    def test_af_like_rhythm(self):
        # A slowly varying rate moves the ridge across bins, so the segment error
        # sees distortions smaller than one grid step.
        respiration = RespirationSpec.modulated(0.25, 0.03, 1 / 128)

        def edr_error(rr_model, seed):
            sample = gen_ecg(EcgSpec(rr_model=rr_model, mod_depth=0.1, respiration=respiration), seed)
            return score_against_truth(sample, _detected_edr(sample).if_e, K=20).e_k

        # Without noise the metronomic record does not depend on the seed.
        sinus_error = edr_error("metronomic", 0)
        af_errors = np.array([edr_error("af", seed) for seed in range(5)])
        assert sinus_error < 2.0
        assert np.all(af_errors < 5.0)
        assert np.mean(af_errors) > sinus_error
        assert np.sum(af_errors > sinus_error) >= 4

    def test_af_like_spline_distortion(self):
        freq = _on_bin(0.25, EDR_N, 512)

        def spline_distortion(result):
            t = result.edr_t.times
            inner = interior(len(t), 0.05)
            truth = 1 + 0.1 * np.cos(2 * np.pi * freq * t)
            return np.max(np.abs(result.edr_t.samples - truth)[inner])

        sinus = spline_distortion(_detected_edr(_ecg("metronomic", freq, seed=0)))
        for seed in range(5):
            af = _ecg("af", freq, seed=seed, rr_range=(0.4, 1.2))
            assert spline_distortion(_detected_edr(af)) > sinus

    def test_ramping_rate(self):
        spec = EcgSpec(rr_model="af", mod_depth=0.1,
                       respiration=RespirationSpec.chirp(0.2, 0.3, duration=300.0))
        sample = gen_ecg(spec, seed=1)
        result = _detected_edr(sample)
        errors = _relative_errors(result.if_e, spec.respiration.phase_derivative)
        assert np.median(errors) < 0.05

    def test_pac_retention(self):
        respiration = RespirationSpec.modulated(0.25, 0.03, 1 / 128)
        generator = EcgGenerator(EcgSpec(rr_model="metronomic", mod_depth=0.1, pac_fraction=0.15,
                                         respiration=respiration))
        kept = EvaluationLoop(generator, EdrEstimator(EdrConfig(n_xi=256)),
                              stdout=io.StringIO()).run(range(10), K=20)
        dropped = EvaluationLoop(generator, EdrEstimator(EdrConfig(n_xi=256, keep_pac=False)),
                                 stdout=io.StringIO()).run(range(10), K=20)
        assert not np.array_equal(kept, dropped)
        assert np.sum(kept <= dropped) >= 8

    def test_polarity_invariance(self):
        sample = _ecg("af", 0.25, seed=2)
        cfg = EdrConfig(n_xi=128)
        inverted = UniformSignal(-sample.signal.samples, sample.signal.dt)
        beats = detect_peaks(median_detrend(sample.signal, 0.1))
        inverted_beats = detect_peaks(median_detrend(inverted, 0.1))
        assert (beats.polarity, inverted_beats.polarity) == ("R", "S")
        np.testing.assert_array_equal(beats.times, inverted_beats.times)
        upright = run_edr(sample.signal, beats, cfg)
        flipped = run_edr(inverted, inverted_beats, cfg)
        np.testing.assert_array_equal(np.abs(flipped.if_e.samples), np.abs(upright.if_e.samples))

    def test_pvc_amplitudes_do_not_matter(self):
        spec = EcgSpec(rr_model="af", mod_depth=0.1, pvc_fraction=0.05)
        sample = gen_ecg(spec, seed=3)
        pvc = np.array([label == "PVC" for label in sample.beats.labels])
        assert pvc.any()
        perturbed = sample.signal.samples.copy()
        for t in sample.beats.times[pvc]:
            idx = int(round(t / spec.dt))
            perturbed[idx - 10: idx + 11] *= 2.5
        cfg = EdrConfig(n_xi=128)
        a = run_edr(sample.signal, sample.beats, cfg)
        b = run_edr(UniformSignal(perturbed, spec.dt), sample.beats, cfg)
        np.testing.assert_array_equal(a.if_e.samples, b.if_e.samples)
        np.testing.assert_array_equal(a.edr.samples, b.edr.samples)
        assert a.n_excluded == int(pvc.sum())

    def test_insufficient_beats(self):
        ecg = UniformSignal(np.zeros(5000), 0.002)
        with pytest.raises(InsufficientBeatsError):
            run_edr(ecg, BeatSeries([1.0, 2.0, 3.0]))
        with pytest.raises(InsufficientBeatsError):
            run_edr(ecg, BeatSeries([1.0, 2.0, 3.0, 4.0, 5.0], ["N", "PVC", "N", "PVC", "N"]))

    def test_logs_pvc_burden(self):
        sample = gen_ecg(EcgSpec(rr_model="metronomic", mod_depth=0.1, pvc_fraction=0.2,
                                 duration=120.0), seed=0)
        stdout = io.StringIO()
        run_edr(sample.signal, sample.beats, EdrConfig(n_xi=64), stdout=stdout)
        text = stdout.getvalue()
        assert "WARNING: PVC burden" in text
        assert "Excluded beats" in text


class TestBeatAmplitudeSpline:

    def test_constant_amplitudes(self):
        ecg = UniformSignal(np.ones(1000), 0.01)
        edr_t = build_edr_t(ecg, BeatSeries([1.0, 2.5, 3.1, 4.0, 6.0, 7.2]), 0.25)
        np.testing.assert_allclose(edr_t.samples, 1.0)
        assert edr_t.t0 == 1.0 and edr_t.dt == 0.25
        assert edr_t.times[-1] == pytest.approx(7.0)

    def test_error_bound_at_unit_rr(self):
        t = 0.01 * np.arange(6001)
        ecg = UniformSignal(np.cos(2 * np.pi * 0.25 * t), 0.01)
        beats = BeatSeries(np.arange(1.0, 59.0))
        edr_t = build_edr_t(ecg, beats, 0.05)
        inner = (edr_t.times >= 4.0) & (edr_t.times <= 55.0)
        error = np.max(np.abs(edr_t.samples - np.cos(2 * np.pi * 0.25 * edr_t.times))[inner])
        assert error <= 5 / 384 * 1.0 ** 4 * (2 * np.pi * 0.25) ** 4

    @pytest.mark.parametrize("seed", range(20))
    def test_error_bound_with_af_intervals(self, seed):
        spec = EcgSpec(rr_model="af", mod_depth=0.1, duration=120.0)
        sample = gen_ecg(spec, seed)
        beats = sample.beats
        edr_t = build_edr_t(median_detrend(sample.signal, 0.1), beats, 0.05)
        D = np.max(np.diff(beats.times))
        inner = (edr_t.times >= beats.times[3]) & (edr_t.times <= beats.times[-4])
        truth = 1 + 0.1 * np.cos(2 * np.pi * 0.25 * edr_t.times)
        bound = 5 / 384 * D ** 4 * 0.1 * (2 * np.pi * 0.25) ** 4
        assert np.max(np.abs(edr_t.samples - truth)[inner]) <= bound

    def test_pvc_amplitude_excluded(self):
        x = np.ones(1000)
        beats = BeatSeries([1.0, 2.0, 3.0, 4.0, 5.0, 6.0], ["N", "N", "PVC", "N", "N", "N"])
        base = build_edr_t(UniformSignal(x, 0.01), beats, 0.25)
        x[300] = 17.0
        perturbed = build_edr_t(UniformSignal(x, 0.01), beats, 0.25)
        np.testing.assert_array_equal(perturbed.samples, base.samples)

    def test_pac_kept_unless_dropped(self):
        beats = BeatSeries([1.0, 2.0, 3.0, 4.0, 5.0], ["N", "PAC", "PVC", "N", "N"])
        np.testing.assert_array_equal(spline_beats(beats), [True, True, False, True, True])
        np.testing.assert_array_equal(spline_beats(beats, keep_pac=False), [True, False, False, True, True])


class TestConfig:

    def test_defaults(self):
        cfg = EdrConfig()
        assert (cfg.sigma, cfg.n_v, cfg.gamma, cfg.lmbda, cfg.n_w, cfg.n_xi) == (0.125, 32, 1e-8, 10.0, 80, 512)
        assert (cfg.detrend_window, cfg.edr_dt) == (0.1, 0.25)
        sst = SstConfig()
        assert (sst.sigma, sst.lmbda) == (0.15, 5.0)

    @pytest.mark.parametrize("kwargs", [
        dict(sigma=1.5), dict(n_v=0), dict(n_xi=1), dict(n_w=-1), dict(gamma=0.0),
        dict(lmbda=-1.0), dict(derivative="forward"), dict(edr_dt=0.0), dict(detrend_window=-0.1),
    ])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ValueError):
            EdrConfig(**kwargs)

    def test_rejects_bad_resample_interval(self):
        with pytest.raises(ValueError):
            SstConfig(resample_dt=0.0)
