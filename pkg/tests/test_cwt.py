import numpy as np
import pytest

from src.core import DyadicSignal, UniformSignal
from src.transforms.cwt import (EDR_WAVELET, RESPIRATION_WAVELET, WaveletSpec, cwt,
                                cwt_time_derivative, make_scale_grid, wavelet_hat)


def _dyadic(samples, dt):
    samples = np.asarray(samples, dtype=np.float64)
    return DyadicSignal(UniformSignal(samples, dt), int(np.log2(len(samples))) - 1)


def _periodic_tone(n, dt, cycles):
    """A cosine completing exactly `cycles` periods over the record, and its frequency."""
    f0 = cycles / (n * dt)
    return _dyadic(np.cos(2 * np.pi * f0 * dt * np.arange(n)), dt), f0


class TestWaveletHat:

    @pytest.mark.parametrize("sigma", [0.125, 0.15, 0.5])
    def test_peak(self, sigma):
        assert wavelet_hat(1.0, WaveletSpec(sigma)) == 1.0

    def test_half_power_point(self):
        assert wavelet_hat(1.15, RESPIRATION_WAVELET) == pytest.approx(0.5)

    def test_truncated_at_non_positive(self):
        assert wavelet_hat(-0.5, RESPIRATION_WAVELET) == 0.0
        assert wavelet_hat(0.0, EDR_WAVELET) == 0.0

    def test_array(self):
        xi = np.array([-1.0, 0.0, 1.0])
        np.testing.assert_array_equal(wavelet_hat(xi, EDR_WAVELET), [0.0, 0.0, 1.0])

    @pytest.mark.parametrize("sigma", [0.0, 1.0, -0.1])
    def test_rejects_bad_sigma(self, sigma):
        with pytest.raises(ValueError):
            WaveletSpec(sigma)


def test_scale_grid_spans_octaves():
    grid = make_scale_grid(L=5, n_v=8, dt=0.25)
    assert len(grid.scales) == 40
    assert grid.scales[0] == pytest.approx(0.25 * 2 ** (1 / 8))
    assert grid.scales[-1] == pytest.approx(0.25 * 2 ** 5)
    assert np.all(np.diff(grid.scales) > 0)


class TestCwt:

    def test_shape(self):
        W = cwt(_dyadic(np.zeros(256), 0.1), RESPIRATION_WAVELET, 16)
        assert W.values.shape == (7 * 16, 256)
        assert W.dt == 0.1

    def test_zero_signal(self):
        W = cwt(_dyadic(np.zeros(128), 1.0), RESPIRATION_WAVELET, 32)
        assert not np.any(W.values)

    def test_tone_closed_form(self):
        sig, f0 = _periodic_tone(1024, 0.25, 77)
        W = cwt(sig, RESPIRATION_WAVELET, 32)
        a = W.grid.scales
        expected = 0.5 * np.sqrt(a) * wavelet_hat(a * f0, RESPIRATION_WAVELET)
        np.testing.assert_allclose(np.abs(W.values), np.broadcast_to(expected[:, None], W.values.shape),
                                   rtol=1e-2, atol=1e-9)

    def test_tone_maximum_near_unit_frequency(self):
        sig, f0 = _periodic_tone(1024, 0.25, 77)
        W = cwt(sig, RESPIRATION_WAVELET, 32)
        a = W.grid.scales
        best = np.argmax(np.abs(W.values[:, 512]))
        closest = np.argmin(np.abs(np.log2(a * f0)))
        assert abs(best - closest) <= 1

    def test_tone_magnitude_constant_in_time(self):
        t = 0.1 * np.arange(2048)
        W = cwt(_dyadic(np.cos(2 * np.pi * 0.4 * t), 0.1), RESPIRATION_WAVELET, 32)
        row = np.argmin(np.abs(np.log2(W.grid.scales * 0.4)))
        magnitude = np.abs(W.values[row, 512:1536])
        assert np.ptp(magnitude) / np.mean(magnitude) < 1e-2

    def test_linearity(self):
        rng = np.random.default_rng(1)
        x, y = rng.standard_normal((2, 512))
        W_x = cwt(_dyadic(x, 0.05), EDR_WAVELET, 16).values
        W_y = cwt(_dyadic(y, 0.05), EDR_WAVELET, 16).values
        W_sum = cwt(_dyadic(2.0 * x - 3.0 * y, 0.05), EDR_WAVELET, 16).values
        np.testing.assert_allclose(W_sum, 2.0 * W_x - 3.0 * W_y, rtol=0, atol=1e-10 * np.abs(W_sum).max())

    def test_energy_scales_with_input(self):
        x = np.random.default_rng(2).standard_normal(256)
        e1 = np.sum(np.abs(cwt(_dyadic(x, 1.0), RESPIRATION_WAVELET, 32).values) ** 2)
        e2 = np.sum(np.abs(cwt(_dyadic(2 * x, 1.0), RESPIRATION_WAVELET, 32).values) ** 2)
        assert np.isfinite(e1)
        assert e2 == pytest.approx(4 * e1, rel=1e-10)

    def test_circular_shift_covariance(self):
        x = np.random.default_rng(3).standard_normal(256)
        W = cwt(_dyadic(x, 1.0), RESPIRATION_WAVELET, 8).values
        W_shifted = cwt(_dyadic(np.roll(x, 17), 1.0), RESPIRATION_WAVELET, 8).values
        np.testing.assert_allclose(W_shifted, np.roll(W, 17, axis=1), atol=1e-10)

    def test_constant_signal(self):
        W = cwt(_dyadic(np.full(512, 5.0), 0.25), RESPIRATION_WAVELET, 32)
        assert np.abs(W.values).max() < 1e-6 * 5.0


class TestTimeDerivative:

    @pytest.mark.parametrize("stencil", ["central", "spectral"])
    def test_zero_signal(self, stencil):
        dW = cwt_time_derivative(_dyadic(np.zeros(64), 1.0), EDR_WAVELET, 8, stencil=stencil)
        assert not np.any(dW.values)

    @pytest.mark.parametrize("stencil", ["central", "spectral"])
    def test_constant_signal(self, stencil):
        dW = cwt_time_derivative(_dyadic(np.full(512, 2.0), 0.01), EDR_WAVELET, 16, stencil=stencil)
        assert np.abs(dW.values).max() < 1e-6 * 2.0

    def test_central_tone_ratio(self):
        sig, f0 = _periodic_tone(1024, 0.01, 3)
        assert 2 * np.pi * f0 * 0.01 < 0.1
        W = cwt(sig, RESPIRATION_WAVELET, 32)
        dW = cwt_time_derivative(sig, RESPIRATION_WAVELET, 32, stencil="central")
        rows = np.abs(np.log2(W.grid.scales * f0)) < 0.25
        ratio = dW.values[rows, 1:-1] / W.values[rows, 1:-1]
        np.testing.assert_allclose(ratio, 2j * np.pi * f0, rtol=1e-2)

    def test_spectral_tone_ratio_is_exact(self):
        sig, f0 = _periodic_tone(1024, 0.25, 77)
        W = cwt(sig, RESPIRATION_WAVELET, 32)
        dW = cwt_time_derivative(sig, RESPIRATION_WAVELET, 32, stencil="spectral")
        rows = np.abs(np.log2(W.grid.scales * f0)) < 0.25
        ratio = dW.values[rows] / W.values[rows]
        np.testing.assert_allclose(ratio, 2j * np.pi * f0, rtol=1e-8)

    def test_central_differences(self):
        x = np.random.default_rng(4).standard_normal(128)
        sig = _dyadic(x, 0.5)
        W = cwt(sig, EDR_WAVELET, 4).values
        dW = cwt_time_derivative(sig, EDR_WAVELET, 4).values
        np.testing.assert_allclose(dW[:, 5], (W[:, 6] - W[:, 4]) / 1.0)
        np.testing.assert_allclose(dW[:, 0], (W[:, 1] - W[:, 0]) / 0.5)
        np.testing.assert_allclose(dW[:, -1], (W[:, -1] - W[:, -2]) / 0.5)

    def test_unknown_stencil(self):
        with pytest.raises(ValueError):
            cwt_time_derivative(_dyadic(np.zeros(8), 1.0), EDR_WAVELET, 4, stencil="forward")
