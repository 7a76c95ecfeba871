import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cvbeam.array import (
    ArrayGeometry,
    BeamWeights,
    array_gain,
    best_codeword_genie,
    dft_codebook_upa,
    dirichlet_gain_ratio,
    half_power_beamwidth,
    steering_vector_ula,
    steering_vector_upa,
    worst_case_crossover_gain,
)
from cvbeam.errors import DomainError

# frozen from scipy.optimize.brentq on the closed-form |sum_k exp(j pi k sin t)|^2 / n^2 = 1/2
HPBW_DEG = {2: 60.00000000000001, 8: 12.802525796993509, 32: 3.174114052269849}
# (sin(8 psi/2) / (8 sin(psi/2)))^2, psi = 2 pi 0.5 0.0625
DIRICHLET_HALF_STEP_8 = 0.8131786634360738


def brute_gain(w, n_h, n_v, d, theta, phi):
    u_h = math.sin(theta) * math.cos(phi)
    u_v = math.sin(theta) * math.sin(phi)
    acc = 0j
    for p in range(n_v):
        for q in range(n_h):
            acc += w[p * n_h + q].conjugate() * cmath.exp(2j * math.pi * d * (q * u_h + p * u_v))
    return abs(acc) ** 2 / (n_h * n_v)


angles = st.tuples(
    st.floats(0.0, math.pi / 2, exclude_max=True),
    st.floats(-math.pi, math.pi, exclude_min=True),
)


class TestSteering:
    def test_broadside_ones(self):
        assert np.allclose(steering_vector_ula(5, 0.5, 0.0), np.ones(5))

    def test_quarter_phases(self):
        a = steering_vector_ula(4, 0.5, math.sin(math.radians(30)))
        assert np.allclose(a, [1, 1j, -1, -1j], atol=1e-12)

    def test_elementwise_oracle(self):
        a = steering_vector_ula(8, 0.5, 0.25)
        oracle = [cmath.exp(2j * math.pi * 0.5 * k * 0.25) for k in range(8)]
        assert np.max(np.abs(a - oracle)) < 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            steering_vector_ula(4, 0.5, 1.01)
        with pytest.raises(DomainError):
            steering_vector_upa(ArrayGeometry(), math.pi / 2, 0.0)
        with pytest.raises(DomainError):
            steering_vector_upa(ArrayGeometry(), 0.1, -math.pi)

    def test_upa_boresight(self):
        w = steering_vector_upa(ArrayGeometry(8, 8), 0.0, 0.7)
        assert np.allclose(w.weights, np.ones(64))

    def test_upa_2x2_hand_expansion(self):
        w = steering_vector_upa(ArrayGeometry(2, 2), math.radians(30), 0.0)
        assert np.allclose(w.weights, [1, 1j, 1, 1j], atol=1e-12)

    @given(angles)
    def test_kronecker_indexwise(self, ang):
        theta, phi = ang
        geom = ArrayGeometry(8, 8)
        w = steering_vector_upa(geom, theta, phi).weights
        u_h, u_v = math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi)
        a_h = steering_vector_ula(8, 0.5, u_h)
        a_v = steering_vector_ula(8, 0.5, u_v)
        outer = np.outer(a_v, a_h)
        for p in range(8):
            for q in range(8):
                assert w[p * 8 + q] == outer[p, q]
        assert np.all(np.abs(np.abs(w) - 1) < 1e-12)

    def test_beam_weights_unit_modulus(self):
        with pytest.raises(DomainError):
            BeamWeights(np.array([1.0, 0.5]))


class TestGain:
    @given(angles)
    def test_aligned_is_n(self, ang):
        geom = ArrayGeometry(8, 8)
        w = steering_vector_upa(geom, *ang)
        assert array_gain(w, geom, *ang) == pytest.approx(64.0, rel=1e-9)

    @given(angles, angles)
    def test_brute_force_and_bounds(self, a1, a2):
        geom = ArrayGeometry(8, 8)
        w = steering_vector_upa(geom, *a1)
        g = array_gain(w, geom, *a2)
        assert g == pytest.approx(brute_gain(w.weights, 8, 8, 0.5, *a2), rel=1e-9, abs=1e-9)
        assert -1e-12 <= g <= 64 + 1e-9

    def test_aligned_db(self):
        geom = ArrayGeometry(8, 8)
        g = array_gain(steering_vector_upa(geom, 0.3, 0.2), geom, 0.3, 0.2)
        assert 10 * math.log10(g) == pytest.approx(18.06, abs=5e-3)

    def test_orthogonal_codeword(self):
        geom = ArrayGeometry(4, 1)
        cb = dft_codebook_upa(geom, 1, 1)
        k0 = int(np.flatnonzero(np.isclose(cb.u_h, 0.0))[0])
        # u_h = 0.5 is another lattice point
        assert array_gain(cb.codewords[k0], geom, math.asin(0.5), 0.0) == pytest.approx(0.0, abs=1e-9)

    def test_half_step_dirichlet(self):
        geom = ArrayGeometry(8, 1)
        w = BeamWeights(np.ones(8))
        g = array_gain(w, geom, math.asin(0.0625), 0.0) / 8
        assert g == pytest.approx(DIRICHLET_HALF_STEP_8, rel=1e-12)
        assert g == pytest.approx(0.81, abs=5e-3)
        assert dirichlet_gain_ratio(8, 0.5, 0.0625) == pytest.approx(DIRICHLET_HALF_STEP_8, rel=1e-12)


class TestCodebook:
    def test_eight_bit(self):
        cb = dft_codebook_upa(ArrayGeometry(8, 8), 2, 2)
        assert len(cb) == 256
        assert len(cb.codewords) == 256
        assert len({tuple(np.round(w.weights, 9)) for w in cb.codewords}) == 256
        assert cb.lattice_step == (0.125, 0.125)

    def test_single_element(self):
        cb = dft_codebook_upa(ArrayGeometry(1, 1), 1, 1)
        assert len(cb) == 1
        assert np.allclose(cb.codewords[0].weights, [1.0])

    def test_dft_orthogonality(self):
        cb = dft_codebook_upa(ArrayGeometry(4, 1), 1, 1)
        gram = cb.matrix.conj() @ cb.matrix.T
        assert np.allclose(gram - np.diag(np.diag(gram)), 0, atol=1e-9)

    def test_unit_modulus(self):
        cb = dft_codebook_upa(ArrayGeometry(8, 8), 2, 2)
        assert np.max(np.abs(np.abs(cb.matrix) - 1)) < 1e-12

    def test_invalid_oversampling(self):
        with pytest.raises(DomainError):
            dft_codebook_upa(ArrayGeometry(), 0, 1)


class TestGenie:
    geom = ArrayGeometry(8, 8)
    cb = dft_codebook_upa(geom, 2, 2)

    def test_on_lattice(self):
        k = 5 * 16 + 9
        u_h, u_v = self.cb.u_h[k], self.cb.u_v[k]
        theta = math.asin(math.hypot(u_h, u_v))
        phi = math.atan2(u_v, u_h)
        idx, g = best_codeword_genie(self.cb, self.geom, theta, phi)
        assert idx == k
        assert g == pytest.approx(64.0, rel=1e-12)

    def test_midway(self):
        # halfway between u_h = 0.25 and 0.375 on the u_v = 0 row
        theta = math.asin(0.3125)
        idx, g = best_codeword_genie(self.cb, self.geom, theta, 0.0)
        scan = [array_gain(w, self.geom, theta, 0.0) if self.cb.visible[i] else -1 for i, w in enumerate(self.cb.codewords)]
        assert g == pytest.approx(max(scan), rel=1e-12)
        assert self.cb.u_h[idx] in (0.25, 0.375)
        assert g == pytest.approx(64 * DIRICHLET_HALF_STEP_8, rel=1e-9)

    def test_argmax_random(self):
        rng = np.random.default_rng(7)
        for _ in range(10_000):
            theta = rng.uniform(0, math.pi / 2)
            phi = rng.uniform(-math.pi, math.pi)
            idx, g = best_codeword_genie(self.cb, self.geom, theta, phi)
            all_g = self.cb.gains(theta, phi)
            assert g >= all_g.max() - 1e-12
            assert idx == int(np.flatnonzero(all_g == all_g.max())[0])

    def test_quantization_floor_interior(self):
        # targets whose four surrounding lattice points are all visible
        g_min = worst_case_crossover_gain(self.cb)
        assert g_min == pytest.approx(DIRICHLET_HALF_STEP_8 ** 2, rel=1e-12)
        rng = np.random.default_rng(11)
        checked = 0
        while checked < 3000:
            u_h, u_v = rng.uniform(-1, 1, 2)
            lo_h, lo_v = np.floor(u_h / 0.125) * 0.125, np.floor(u_v / 0.125) * 0.125
            corners = [(lo_h + a, lo_v + b) for a in (0, 0.125) for b in (0, 0.125)]
            if any(h * h + v * v > 1 for h, v in corners):
                continue
            theta, phi = math.asin(math.hypot(u_h, u_v)), math.atan2(u_v, u_h)
            _, g = best_codeword_genie(self.cb, self.geom, theta, phi)
            assert g >= 64 * g_min - 1e-9
            checked += 1


class TestHpbw:
    @pytest.mark.parametrize("n", [2, 8, 32])
    def test_matches_closed_form_root(self, n):
        assert half_power_beamwidth(ArrayGeometry(n, 1), "h") == pytest.approx(HPBW_DEG[n], abs=1e-5)

    def test_values(self):
        assert half_power_beamwidth(ArrayGeometry(32, 32), "v") == pytest.approx(3.17, abs=0.01)
        assert half_power_beamwidth(ArrayGeometry(8, 8), "h") == pytest.approx(12.8, abs=0.01)
        assert half_power_beamwidth(ArrayGeometry(1, 2), "v") == pytest.approx(60.0, abs=1e-5)

    def test_too_small(self):
        with pytest.raises(DomainError):
            half_power_beamwidth(ArrayGeometry(1, 8), "h")
        with pytest.raises(DomainError):
            half_power_beamwidth(ArrayGeometry(8, 8), "x")
