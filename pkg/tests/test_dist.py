import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twbstats.dist import (
    DEFAULT_TOL,
    Moments,
    PhotonDistribution,
    convolve,
    g2_counts,
    g2_photons,
    moments,
    multimode_thermal,
    point_mass,
    poisson,
    thermal,
)
from twbstats.errors import UndefinedG2Error, ValidationError

from oracles import convolve_bruteforce, explicit_multimode, geometric_pmf, pmf_moments


def assert_normalized(d):
    assert d.tail_mass <= DEFAULT_TOL
    assert abs(math.fsum(d.probs) + d.tail_mass - 1.0) <= 1e-12
    assert np.all(d.probs >= 0)


class TestPhotonDistribution:
    def test_rejects_negative_entries(self):
        with pytest.raises(ValidationError):
            PhotonDistribution([1.1, -0.1])

    def test_rejects_unnormalized(self):
        with pytest.raises(ValidationError):
            PhotonDistribution([0.5, 0.4])

    def test_immutable(self):
        d = point_mass(2)
        with pytest.raises(ValueError):
            d.probs[0] = 1.0

    def test_pmf_outside_range(self):
        d = point_mass(2)
        assert d.pmf(2) == 1.0
        assert d.pmf(7) == 0.0


class TestMultimodeThermal:
    def test_zero_mean_is_point_mass(self):
        d = multimode_thermal(0.0, 5)
        assert d.probs.tolist() == [1.0]

    def test_single_mode_is_geometric(self):
        d = multimode_thermal(1.0, 1)
        n = np.arange(d.probs.size)
        np.testing.assert_allclose(d.probs, 2.0 ** -(n + 1), rtol=1e-12)
        assert g2_photons(moments(d)) == pytest.approx(2.0, abs=1e-9)

    def test_mu_1000_g2(self):
        d = multimode_thermal(2.0, 1000)
        assert g2_photons(moments(d)) == pytest.approx(1.001, abs=1e-9)

    def test_variance_mean2_mu4(self):
        d = multimode_thermal(2.0, 4)
        # oracle: brute-force sum over the constructed PMF
        _, var = pmf_moments(d.probs)
        assert var == pytest.approx(3.0, abs=1e-8)
        assert moments(d).variance == pytest.approx(3.0, abs=1e-8)

    @pytest.mark.parametrize("modes", [1, 2, 3, 5, 8])
    @pytest.mark.parametrize("mean", [0.3, 2.0, 7.5])
    def test_matches_explicit_convolution(self, mean, modes):
        d = multimode_thermal(mean, modes)
        ref = explicit_multimode(mean, modes, d.n_max)
        np.testing.assert_allclose(d.probs, ref, rtol=1e-10, atol=1e-15)

    @pytest.mark.parametrize("mean", [0.5, 2.0, 20.0, 50.0])
    def test_mean_within_tol(self, mean):
        d = multimode_thermal(mean, 1)
        assert abs(moments(d).mean - mean) <= 10 * DEFAULT_TOL
        assert_normalized(d)

    @pytest.mark.parametrize("bad", [-1.0, float("nan"), float("inf")])
    def test_bad_mean(self, bad):
        with pytest.raises(ValidationError):
            multimode_thermal(bad, 3)

    def test_bad_modes_and_tol(self):
        with pytest.raises(ValidationError):
            multimode_thermal(1.0, 0)
        with pytest.raises(ValidationError):
            multimode_thermal(1.0, 2, tol=1.5)

    @settings(max_examples=60, deadline=None)
    @given(x=st.floats(0.05, 60.0), modes=st.sampled_from([1, 2, 10, 1000]))
    def test_g2_is_one_plus_inverse_modes(self, x, modes):
        d = multimode_thermal(x, modes)
        assert_normalized(d)
        assert g2_photons(moments(d)) == pytest.approx(1.0 + 1.0 / modes, abs=1e-8)


class TestPoisson:
    def test_zero(self):
        assert poisson(0.0).probs.tolist() == [1.0]

    def test_small_dark_mean(self):
        d = poisson(0.001)
        assert d.probs[0] == pytest.approx(0.9990005, abs=1e-9)
        assert d.probs[1] == pytest.approx(0.000999000500, abs=1e-12)

    def test_fano_is_one(self):
        m = moments(poisson(2.64))
        assert m.variance / m.mean == pytest.approx(1.0, abs=1e-9)
        assert m.variance == pytest.approx(2.64, abs=10 * DEFAULT_TOL)

    def test_negative_mean(self):
        with pytest.raises(ValidationError):
            poisson(-0.1)


class TestMoments:
    def test_point_mass(self):
        m = moments(point_mass(3))
        assert (m.mean, m.variance) == (3.0, 0.0)

    def test_geometric(self):
        m = moments(thermal(1.0))
        assert m.mean == pytest.approx(1.0, abs=1e-9)
        assert m.variance == pytest.approx(2.0, abs=1e-8)

    def test_inconsistent_rejected(self):
        with pytest.raises(ValidationError):
            Moments(1.0, 1.0, 5.0)


class TestG2:
    def test_g2_counts_examples(self):
        assert g2_counts(Moments(1.0, 1.0)) == 2.0
        assert g2_counts(Moments(2.0, 0.0)) == 1.0

    @pytest.mark.parametrize("mean", [0.01, 1.0, 13.0])
    def test_poisson_photon_g2(self, mean):
        assert g2_photons(moments(poisson(mean))) == pytest.approx(1.0, abs=1e-8)

    def test_zero_mean(self):
        with pytest.raises(UndefinedG2Error):
            g2_photons(moments(point_mass(0)))
        with pytest.raises(UndefinedG2Error):
            g2_counts(Moments(0.0, 0.0))

    @pytest.mark.parametrize("gamma", [0.5, 3.7])
    @pytest.mark.parametrize("d", [thermal(2.0), poisson(0.7), multimode_thermal(3.0, 10)])
    def test_g2_counts_scale_free(self, d, gamma):
        m = moments(d)
        assert g2_counts(m.scaled(gamma)) == pytest.approx(g2_counts(m), rel=1e-14)


class TestConvolve:
    def test_identity(self):
        b = thermal(1.3)
        out = convolve(point_mass(0), b)
        np.testing.assert_array_equal(out.probs, b.probs)

    def test_poisson_additivity(self):
        out = convolve(poisson(1.2), poisson(0.5))
        ref = poisson(1.7).probs
        n = min(out.probs.size, ref.size)
        np.testing.assert_allclose(out.probs[:n], ref[:n], atol=1e-12)

    def test_geometric_pair(self):
        a = geometric_pmf(1.0, 80)
        ref = convolve_bruteforce(a, a)
        mean, var = pmf_moments(ref)
        assert (mean, var) == (pytest.approx(2.0, abs=1e-9), pytest.approx(4.0, abs=1e-8))
        m = moments(convolve(thermal(1.0), thermal(1.0)))
        assert m.mean == pytest.approx(2.0, abs=1e-9)
        assert m.variance == pytest.approx(4.0, abs=1e-8)

    def test_mean_adds(self):
        a, b = thermal(2.5), poisson(0.8)
        assert moments(convolve(a, b)).mean == pytest.approx(moments(a).mean + moments(b).mean, abs=1e-10)


dists = st.one_of(
    st.floats(0.0, 5.0).map(poisson),
    st.floats(0.0, 5.0).map(thermal),
    st.tuples(st.floats(0.0, 5.0), st.integers(1, 20)).map(lambda t: multimode_thermal(*t)),
    st.integers(0, 6).map(point_mass),
)


def _pad(p, n):
    return np.pad(p, (0, n - p.size))


@settings(max_examples=50, deadline=None)
@given(a=dists, b=dists, c=dists)
def test_convolve_commutative_associative(a, b, c):
    ab, ba = convolve(a, b), convolve(b, a)
    n = max(ab.probs.size, ba.probs.size)
    np.testing.assert_allclose(_pad(ab.probs, n), _pad(ba.probs, n), atol=1e-12, rtol=0)
    left, right = convolve(ab, c), convolve(a, convolve(b, c))
    n = max(left.probs.size, right.probs.size)
    np.testing.assert_allclose(_pad(left.probs, n), _pad(right.probs, n), atol=1e-12, rtol=0)
    for d in (ab, left, right):
        assert abs(math.fsum(d.probs) + d.tail_mass - 1.0) <= 1e-12
