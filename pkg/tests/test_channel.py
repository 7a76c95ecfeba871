import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cvbeam.array import ArrayGeometry, dft_codebook_upa, steering_vector_upa
from cvbeam.channel import (
    RSRP_FLOOR_DBM,
    LinkBudget,
    los_channel,
    pathloss_inh_los,
    power_control,
    rsrp,
    snr_and_rate,
)
from cvbeam.errors import DimensionMismatchError, DomainError
from cvbeam.geometry import SphericalPoint

BS = ArrayGeometry(8, 8)
UE = ArrayGeometry(2, 2)
LINK = LinkBudget()
RX = np.ones(4)


class TestPathloss:
    def test_values(self):
        assert pathloss_inh_los(1.0, 1e11) == pytest.approx(72.4, abs=1e-12)
        assert pathloss_inh_los(10.0, 1e11) == pytest.approx(89.7, abs=1e-12)

    def test_slope(self):
        diff = pathloss_inh_los(20.0, 1e11) - pathloss_inh_los(10.0, 1e11)
        assert diff == pytest.approx(17.3 * math.log10(2), rel=1e-12)
        assert diff == pytest.approx(5.21, abs=5e-3)

    def test_clamp_and_domain(self):
        assert pathloss_inh_los(0.2, 1e11) == pathloss_inh_los(1.0, 1e11)
        with pytest.raises(DomainError):
            pathloss_inh_los(0.0, 1e11)
        with pytest.raises(DomainError):
            pathloss_inh_los(-1.0, 1e11)

    @given(st.floats(1.0, 1e3), st.floats(1.0, 1e3), st.floats(1e9, 1e12))
    def test_monotone(self, d1, d2, f):
        lo, hi = sorted((d1, d2))
        assert pathloss_inh_los(lo, f) <= pathloss_inh_los(hi, f)
        assert pathloss_inh_los(lo, f) <= pathloss_inh_los(lo, 2 * f)


class TestChannel:
    @given(
        st.floats(0.5, 30.0),
        st.floats(0.0, math.pi / 2, exclude_max=True),
        st.floats(-math.pi, math.pi, exclude_min=True),
    )
    def test_frobenius(self, r, theta, phi):
        ch = los_channel(BS, UE, SphericalPoint(r, theta, phi), LINK)
        expect = 64 * 4 * 10 ** (-ch.pathloss_db / 10)
        assert np.linalg.norm(ch.matrix) ** 2 == pytest.approx(expect, rel=1e-9)
        assert np.linalg.matrix_rank(ch.matrix / np.linalg.norm(ch.matrix)) == 1

    def test_aligned_power(self):
        mobile = SphericalPoint(7.0, 0.4, -1.1)
        ch = los_channel(BS, UE, mobile, LINK)
        w = steering_vector_upa(BS, mobile.theta, mobile.phi)
        p = rsrp(ch.matrix, w, RX, 30.0)
        # rank-1 algebra: Ptx * Nt * Nr * 10^(-PL/10)
        assert p == pytest.approx(30 + 10 * math.log10(256) - ch.pathloss_db, abs=1e-9)

    def test_boresight_rsrp(self):
        ch = los_channel(BS, UE, SphericalPoint(10.0, 0.0, 0.0), LINK)
        p = rsrp(ch.matrix, np.ones(64), RX, 30.0)
        assert p == pytest.approx(-35.6176003468815, abs=1e-9)
        assert p == pytest.approx(-35.62, abs=5e-3)

    def test_null_and_linearity(self):
        geom = ArrayGeometry(4, 1)
        cb = dft_codebook_upa(geom, 1, 1)
        k0 = int(np.flatnonzero(np.isclose(cb.u_h, 0.0))[0])
        ch = los_channel(geom, UE, SphericalPoint(3.0, math.asin(0.5), 0.0), LINK)
        assert rsrp(ch.matrix, cb.codewords[k0], RX, 30.0) == RSRP_FLOOR_DBM
        w = steering_vector_upa(geom, math.asin(0.5), 0.0)
        full = rsrp(ch.matrix, w, RX, 30.0)
        half = rsrp(ch.matrix, w, RX, 30.0 - 10 * math.log10(2))
        assert full - half == pytest.approx(3.0103, abs=1e-4)

    def test_dimension_mismatch(self):
        ch = los_channel(BS, UE, SphericalPoint(3.0, 0.1, 0.1), LINK)
        with pytest.raises(DimensionMismatchError):
            rsrp(ch.matrix, np.ones(16), RX, 30.0)
        with pytest.raises(DimensionMismatchError):
            rsrp(ch.matrix, np.ones(64), np.ones(2), 30.0)

    def test_energy_conservation_orthonormal_codebook(self):
        cb = dft_codebook_upa(BS, 1, 1)
        ch = los_channel(BS, UE, SphericalPoint(4.0, 0.5, 0.3), LINK)
        v = RX / 2
        total = sum(abs(v @ ch.matrix @ (w.weights / 8)) ** 2 for w in cb.codewords)
        assert total == pytest.approx(np.linalg.norm(v @ ch.matrix) ** 2, rel=1e-9)

    @given(st.floats(1.0, 15.0), st.floats(1.0, 15.0))
    def test_rsrp_non_increasing_in_distance(self, d1, d2):
        lo, hi = sorted((d1, d2))
        w = np.ones(64)
        near = rsrp(los_channel(BS, UE, SphericalPoint(lo, 0.2, 0.0), LINK).matrix, w, RX, 30.0)
        far = rsrp(los_channel(BS, UE, SphericalPoint(hi, 0.2, 0.0), LINK).matrix, w, RX, 30.0)
        assert far <= near + 1e-9


class TestRate:
    def test_noise_floor(self):
        assert LINK.noise_dbm == pytest.approx(-77.0, abs=1e-12)

    def test_zero_snr(self):
        snr, rate = snr_and_rate(-77.0, LINK)
        assert snr == pytest.approx(0.0, abs=1e-12)
        assert rate == pytest.approx(1e9, rel=1e-12)

    def test_limit(self):
        assert snr_and_rate(-math.inf, LINK)[1] == 0.0
        assert snr_and_rate(RSRP_FLOOR_DBM, LINK)[1] == pytest.approx(0.0, abs=1e-12)

    @given(st.floats(-300, 100), st.floats(-300, 100))
    def test_monotone(self, a, b):
        lo, hi = sorted((a, b))
        r_lo, r_hi = snr_and_rate(lo, LINK)[1], snr_and_rate(hi, LINK)[1]
        assert 0 <= r_lo <= r_hi


class TestPowerControl:
    def test_cap(self):
        assert power_control(10.0, 0.0, LINK, 256) == 30.0
        exact = 30 + 10 * math.log10(256) - 89.7
        assert power_control(10.0, exact, LINK, 256) == pytest.approx(30.0, abs=1e-12)

    def test_inverse_example(self):
        assert power_control(10.0, -35.6176003468815, LINK, 256) == pytest.approx(30.0, abs=1e-9)

    def test_range_doubling(self):
        p1 = power_control(3.0, -60.0, LINK, 256)
        p2 = power_control(6.0, -60.0, LINK, 256)
        assert p2 - p1 == pytest.approx(17.3 * math.log10(2), rel=1e-9)

    def test_floor(self):
        assert power_control(1.0, -200.0, LINK, 256) == LINK.tx_power_dbm_min

    def test_domain(self):
        with pytest.raises(DomainError):
            power_control(0.0, -60.0, LINK, 256)

    @given(
        st.floats(1.0, 20.0),
        st.floats(0.0, 1.4),
        st.floats(-math.pi, math.pi, exclude_min=True),
        st.floats(-70.0, -50.0),
    )
    def test_inverse_property(self, r, theta, phi, target):
        uncapped = LinkBudget(tx_power_dbm_min=-200.0, tx_power_dbm_max=200.0)
        mobile = SphericalPoint(r, theta, phi)
        p_tx = power_control(r, target, uncapped, 256)
        ch = los_channel(BS, UE, mobile, uncapped)
        w = steering_vector_upa(BS, theta, phi)
        assert rsrp(ch.matrix, w, RX, p_tx) == pytest.approx(target, abs=1e-9)
