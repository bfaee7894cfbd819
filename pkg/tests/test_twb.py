import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twbstats.correlation import arm_stats, noise_reduction_factor, nrf_model
from twbstats.detector import DetectorConfig, detector_output_distribution, g2_multimode_model, k_moments_closed_form
from twbstats.dist import multimode_thermal
from twbstats.errors import AmbiguousBinError, ValidationError
from twbstats.twb import (
    BLOCK_SIZE,
    ShotSeries,
    TwbParams,
    bin_k,
    marginal_distribution,
    sample_twb,
    scale_x_out,
    series_from_analog,
)

ETA, EPS, DC, MU = 0.12, 0.008, 0.001, 1000
MEAN_N = 2.0 / ETA
N = 10**5


def lab_params(eta=ETA, eps=EPS, dc=DC, mean_n=MEAN_N, modes=MU):
    det = DetectorConfig(eta=eta, epsilon=eps, dark_mean=dc)
    return TwbParams(modes=modes, mean_n=mean_n, det1=det, det2=det)


@pytest.fixture(scope="module")
def lab_series():
    return sample_twb(lab_params(), N, seed=11)


def corrected_R(eta, eps, dc, m):
    """Noise reduction factor in avalanche counts, including dark counts and cross-talk."""
    R_l = ((1 - eta) * m + dc) / (m + dc)
    return (1 + eps) * R_l + eps * (1 - eps) / (1 + eps)


class TestParams:
    def test_validation(self):
        with pytest.raises(ValidationError):
            TwbParams(modes=0, mean_n=1.0)
        with pytest.raises(ValidationError):
            TwbParams(modes=2, mean_n=-1.0)
        with pytest.raises(ValidationError):
            sample_twb(lab_params(), 0, seed=1)
        with pytest.raises(ValidationError):
            sample_twb(lab_params(), 10, seed=1, method="exact")

    def test_round_trip(self):
        p = lab_params()
        assert TwbParams.from_dict(p.to_dict()) == p


class TestSampling:
    def test_all_zero(self):
        det = DetectorConfig(eta=0.0)
        s = sample_twb(TwbParams(modes=3, mean_n=5.0, det1=det, det2=det), 1000, seed=2)
        assert not s.k1.any() and not s.k2.any()

    def test_perfect_correlation(self):
        s = sample_twb(TwbParams(modes=4, mean_n=3.0), 5000, seed=3)
        np.testing.assert_array_equal(s.k1, s.k2)
        R, _ = noise_reduction_factor(s, n_resamples=50, seed=0)
        assert R == 0.0

    def test_meta(self, lab_series):
        assert lab_series.meta["seed"] == 11
        assert lab_series.meta["n_shots"] == N
        assert lab_series.meta["params"] == lab_params().to_dict()
        assert len(lab_series) == N

    def test_thread_independence(self):
        p = lab_params()
        n = 3 * BLOCK_SIZE + 17
        a = sample_twb(p, n, seed=5, workers=1)
        b = sample_twb(p, n, seed=5, workers=4)
        assert a == b
        assert a != sample_twb(p, n, seed=6)

    def test_prefix_stable(self):
        # block streams make the first blocks independent of the total length
        p = lab_params()
        short = sample_twb(p, BLOCK_SIZE, seed=9)
        long = sample_twb(p, 2 * BLOCK_SIZE, seed=9)
        np.testing.assert_array_equal(short.k1, long.k1[:BLOCK_SIZE])

    def test_sequence_seed(self):
        p = lab_params()
        assert sample_twb(p, 100, seed=[1, 2]) == sample_twb(p, 100, seed=[1, 2])
        with pytest.raises(ValidationError):
            sample_twb(p, 100, seed=-1)

    @pytest.mark.parametrize("arm", [1, 2])
    def test_marginal_mean(self, lab_series, arm):
        m = k_moments_closed_form(ETA * MEAN_N, ETA * MEAN_N * (1 + ETA * MEAN_N / MU), DC, EPS)
        assert m.mean == pytest.approx(1.008 * 2.001, rel=1e-12)
        k = lab_series.arm(arm)
        assert abs(k.mean() - m.mean) < 4 * np.sqrt(m.variance / N)

    @pytest.mark.parametrize("arm", [1, 2])
    def test_total_variation(self, lab_series, arm):
        pred = detector_output_distribution(multimode_thermal(MEAN_N, MU), lab_params().detector(arm)).probs
        emp = marginal_distribution(lab_series, arm).probs
        n = max(pred.size, emp.size)
        tv = 0.5 * np.abs(np.pad(pred, (0, n - pred.size)) - np.pad(emp, (0, n - emp.size))).sum()
        assert tv < 0.01

    @pytest.mark.parametrize("arm", [1, 2])
    def test_g2_against_model(self, lab_series, arm):
        st_ = arm_stats(lab_series, arm, n_resamples=300, seed=1)
        model = g2_multimode_model(st_.k_mean, MU, EPS, DC)
        assert abs(st_.g2_k - model) < 3 * st_.g2_k_stderr
        assert st_.g2_k_stderr <= 0.005

    def test_R_ideal_detectors(self):
        eta = 0.3
        s = sample_twb(lab_params(eta=eta, eps=0.0, dc=0.0, mean_n=10.0), N, seed=4)
        R, err = noise_reduction_factor(s, n_resamples=300, seed=2)
        assert abs(R - (1 - eta)) < 3 * err

    def test_R_with_crosstalk(self, lab_series):
        R, err = noise_reduction_factor(lab_series, n_resamples=300, seed=3)
        m = ETA * MEAN_N
        assert abs(R - corrected_R(ETA, EPS, DC, m)) < 3 * err
        # cross-talk adds about eps(1 - eps)/(1 + eps) + eps R on top of the photon-level value
        eq13 = nrf_model(lab_series.k1.mean(), lab_series.k2.mean(), ETA, ETA, MU)
        assert R - eq13 == pytest.approx(corrected_R(ETA, EPS, DC, m) - (1 - ETA), abs=3 * err)

    def test_per_mode_same_law(self):
        p = lab_params(modes=5, mean_n=4.0, eta=0.5, eps=0.05, dc=0.01)
        a = sample_twb(p, 60000, seed=8)
        b = sample_twb(p, 60000, seed=8, method="per_mode")
        assert a != b
        for arm in (1, 2):
            x, y = a.arm(arm), b.arm(arm)
            se = np.sqrt(x.var() / x.size + y.var() / y.size)
            assert abs(x.mean() - y.mean()) < 4 * se
        pred = detector_output_distribution(multimode_thermal(4.0, 5), p.det1).probs
        emp = marginal_distribution(b, 1).probs
        n = max(pred.size, emp.size)
        tv = 0.5 * np.abs(np.pad(pred, (0, n - pred.size)) - np.pad(emp, (0, n - emp.size))).sum()
        assert tv < 0.01


class TestMarginal:
    def test_zero(self):
        d = marginal_distribution(ShotSeries.from_pairs([(0, 0)] * 4), 1)
        assert d.probs.tolist() == [1.0]

    def test_counting(self):
        d = marginal_distribution(ShotSeries.from_pairs([(1, 0), (1, 0), (3, 0)]), 1)
        np.testing.assert_allclose(d.probs, [0, 2 / 3, 0, 1 / 3], rtol=1e-15)
        assert d.probs.sum() == pytest.approx(1.0, abs=1e-15)

    def test_empty(self):
        with pytest.raises(ValidationError):
            marginal_distribution(ShotSeries([], []), 1)


class TestAnalog:
    def test_examples(self):
        assert bin_k(7.5, 2.5) == 3
        assert bin_k(0.0, 1.7) == 0
        assert bin_k(7.4, 2.5) == 3

    def test_ambiguous(self):
        with pytest.raises(AmbiguousBinError):
            bin_k(6.25, 2.5)
        with pytest.raises(AmbiguousBinError):
            bin_k(-2.5, 2.5)

    def test_bad_gamma(self):
        with pytest.raises(ValidationError):
            bin_k(1.0, 0.0)
        with pytest.raises(ValidationError):
            scale_x_out(ShotSeries([1], [1]), -1.0)

    @settings(max_examples=50, deadline=None)
    @given(k=st.lists(st.integers(0, 10**6), min_size=1, max_size=50), gamma=st.floats(1e-3, 1e3))
    def test_round_trip(self, k, gamma):
        s = ShotSeries(k, k[::-1])
        x1, x2 = scale_x_out(s, gamma)
        assert series_from_analog(x1, x2, gamma) == s
