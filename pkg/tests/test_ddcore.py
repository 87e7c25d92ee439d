import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from otfs_crt.ddcore import (
    DDGrid,
    SubframeConfig,
    TargetParams,
    add_awgn,
    dd_response,
    decompose_taps,
    effective_gain,
    noise_variance,
    sample_w_nu,
    sample_w_tau,
    snap_ratio,
    taps_from_physical,
)
from otfs_crt.errors import GridMismatch

from oracles import direct_response, geometric_w

DESK = SubframeConfig(M=8, N=8, delta_f=30e3, pilot_k=0, pilot_l=0)


def target_on(cfg, l, k, gain=1.0 + 0j):
    return TargetParams(gain, l, k, cfg.B, cfg.D)


def pilot_grid(cfg):
    g = DDGrid.zeros(cfg)
    g.samples[cfg.pilot_k, cfg.pilot_l] = cfg.pilot_amp
    return g


class TestSamplingFunctions:
    def test_integer_points_exact(self):
        assert sample_w_nu(8, 0) == 1 + 0j
        assert sample_w_nu(8, 4) == 0
        assert sample_w_nu(8, -16) == 1
        assert sample_w_tau(7, 0) == 1
        assert sample_w_tau(7, 3) == 0

    def test_half_bin_against_sum(self):
        assert abs(sample_w_nu(8, 0.5) - geometric_w(8, 0.5, -1)) < 1e-12

    def test_tau_is_conjugate(self):
        assert abs(sample_w_tau(7, 1.3) - sample_w_nu(7, 1.3).conjugate()) < 1e-12
        assert abs(sample_w_tau(7, 1.3) - geometric_w(7, 1.3, +1)) < 1e-12

    def test_array_input(self):
        xs = np.array([0.0, 0.25, 1.0, 7.9, -3.3])
        got = sample_w_nu(8, xs)
        assert got.shape == xs.shape
        for x, g in zip(xs, got):
            assert abs(g - geometric_w(8, x, -1)) < 1e-12

    def test_near_pole(self):
        for x in (1e-12, 8 - 1e-11, 16 + 3e-10, -1e-13):
            assert abs(sample_w_nu(8, x) - geometric_w(8, x, -1)) < 1e-12

    def test_invalid_length(self):
        with pytest.raises(ValueError):
            sample_w_nu(0, 0.5)

    @given(st.integers(1, 64), st.floats(-100, 100, allow_nan=False))
    def test_dirichlet_identity(self, n, x):
        assert abs(sample_w_nu(n, x) - geometric_w(n, x, -1)) < 1e-10
        assert abs(sample_w_tau(n, x) - geometric_w(n, x, +1)) < 1e-10

    def test_periodicity(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            n = int(rng.integers(1, 65))
            x = float(rng.uniform(-50, 50))
            a = int(rng.integers(-5, 6))
            assert abs(sample_w_nu(n, x + a * n) - sample_w_nu(n, x)) < 1e-10
            assert abs(sample_w_tau(n, x + a * n) - sample_w_tau(n, x)) < 1e-10

    @given(st.integers(1, 300), st.integers(-20, 20))
    def test_unit_peak(self, n, a):
        assert abs(sample_w_nu(n, a * n)) == 1.0
        assert abs(sample_w_tau(n, a * n)) == 1.0

    @given(st.integers(2, 64), st.floats(-50, 50, allow_nan=False))
    def test_bounded(self, n, x):
        assert abs(sample_w_nu(n, x)) <= 1 + 1e-12


class TestDecompose:
    def test_fractional_delay(self):
        d = decompose_taps(2.3 * DESK.T, 0.0, DESK)
        assert d.alpha == 2
        assert d.tau_hat == pytest.approx(0.3 * DESK.T, rel=1e-9)
        assert (d.beta, d.nu_hat) == (0, 0.0)

    def test_boundary(self):
        cfg = SubframeConfig(M=8, N=8, delta_f=1 / 33.3e-6)
        d = decompose_taps(cfg.T, 0.0, cfg)
        assert d.alpha == 1 and d.tau_hat == pytest.approx(0.0, abs=1e-18)

    def test_negative_doppler(self):
        d = decompose_taps(0.0, -0.3 * DESK.delta_f, DESK)
        assert d.beta == -1
        assert d.nu_hat == pytest.approx(0.7 * DESK.delta_f, rel=1e-12)

    def test_negative_delay_rejected(self):
        with pytest.raises(ValueError):
            decompose_taps(-1e-6, 0.0, DESK)

    @given(st.floats(0, 1e-2), st.floats(-1e6, 1e6))
    def test_reconstruction(self, tau, nu):
        d = decompose_taps(tau, nu, DESK)
        assert 0 <= d.tau_hat < DESK.T
        assert 0 <= d.nu_hat < DESK.delta_f
        assert d.alpha * DESK.T + d.tau_hat == pytest.approx(tau, rel=1e-12, abs=1e-18)
        assert d.beta * DESK.delta_f + d.nu_hat == pytest.approx(nu, rel=1e-12, abs=1e-6)


class TestEffectiveGain:
    def test_zero_taps(self):
        assert effective_gain(target_on(DESK, 0, 0), DESK) == 1

    def test_coupling_phase(self):
        got = effective_gain(target_on(DESK, 2, 2), DESK)
        assert abs(got - cmath.exp(-1j * math.pi / 8)) < 1e-12
        got = effective_gain(target_on(DESK, 4, 4), DESK)
        assert abs(got - cmath.exp(-1j * math.pi / 2)) < 1e-12

    def test_period_shift(self):
        a = effective_gain(target_on(DESK, 3, 5, 0.5j), DESK)
        b = effective_gain(target_on(DESK, 3 + 8, 5 - 16, 0.5j), DESK)
        assert a == b


class TestDDResponse:
    def test_kronecker(self):
        y = dd_response(pilot_grid(DESK), target_on(DESK, 2, 3)).samples
        expected = np.zeros((8, 8), complex)
        expected[3, 2] = effective_gain(target_on(DESK, 2, 3), DESK)
        assert np.array_equal(y, expected)

    def test_period_shift_bitwise(self):
        base = dd_response(pilot_grid(DESK), target_on(DESK, 2, 3)).samples
        shifted = dd_response(pilot_grid(DESK), target_on(DESK, 2 + 8, 3 + 8)).samples
        assert base.tobytes() == shifted.tobytes()

    def test_fractional_column(self):
        t = target_on(DESK, 0, 2.5)
        y = dd_response(pilot_grid(DESK), t).samples
        h = effective_gain(t, DESK)
        for k in range(8):
            assert abs(y[k, 0] - h * geometric_w(8, k - 2.5, -1)) < 1e-12
        assert np.all(y[:, 1:] == 0)

    def test_grid_mismatch(self):
        bad = DDGrid(DESK, np.zeros((8, 7), complex))
        with pytest.raises(GridMismatch):
            dd_response(bad, target_on(DESK, 0, 0))

    def test_dense_matches_quadruple_loop(self):
        cfg = SubframeConfig(M=4, N=5, delta_f=30e3, pilot_k=0, pilot_l=0)
        rng = np.random.default_rng(5)
        x = rng.standard_normal((5, 4)) + 1j * rng.standard_normal((5, 4))
        t = target_on(cfg, 1.25, -2.75, 0.8 - 0.3j)
        got = dd_response(DDGrid(cfg, x), t).samples
        l_red, k_red = 1.25 % 4, -2.75 % 5
        ref = direct_response(x.tolist(), k_red, l_red, effective_gain(t, cfg))
        assert np.max(np.abs(got - np.array(ref))) < 1e-12

    def test_sparse_matches_quadruple_loop(self):
        cfg = SubframeConfig(M=4, N=5, delta_f=30e3, pilot_k=0, pilot_l=0)
        x = np.zeros((5, 4), complex)
        x[0, 0], x[2, 3], x[4, 1] = 1, -1j, 0.5
        t = target_on(cfg, 0.5, 1.5)
        got = dd_response(DDGrid(cfg, x), t).samples
        ref = direct_response(x.tolist(), 1.5, 0.5, effective_gain(t, cfg))
        assert np.max(np.abs(got - np.array(ref))) < 1e-12

    @settings(max_examples=60)
    @given(
        st.integers(0, 63), st.integers(0, 63), st.integers(-3, 3), st.integers(-3, 3),
        st.integers(0, 4), st.booleans(),
    )
    def test_shift_invariance_property(self, l8, k8, a, b, seed, dense):
        # dyadic fractions keep period shifts exact in binary floating point
        l, k = l8 / 8, k8 / 8 - 4
        tx = pilot_grid(DESK)
        if dense:
            rng = np.random.default_rng(seed)
            tx = DDGrid(DESK, rng.standard_normal((8, 8)) + 0j)
        y0 = dd_response(tx, target_on(DESK, l, k)).samples
        y1 = dd_response(tx, target_on(DESK, l + 8 * abs(b), k + 8 * a)).samples
        assert y0.tobytes() == y1.tobytes()

    @given(st.integers(0, 200), st.integers(-200, 200), st.floats(0.01, 10))
    def test_energy_conservation(self, l, k, mag):
        y = dd_response(pilot_grid(DESK), target_on(DESK, l, k, mag)).samples
        assert np.count_nonzero(y) == 1
        assert np.sum(np.abs(y) ** 2) == pytest.approx(mag**2, rel=1e-12)


class TestTargetRescaling:
    def test_taps_for_other_grid(self):
        f2 = SubframeConfig(M=7, N=9, delta_f=240e3 / 7)
        t = target_on(DESK, 10, 16)
        l, k = t.taps_for(f2)
        assert l == 10
        assert k == pytest.approx(16 * f2.D / DESK.D, rel=1e-12)

    def test_snap(self):
        assert snap_ratio(1.0 + 1e-12) == 1.0
        assert snap_ratio(0.875) == 0.875


class TestPhysicalTaps:
    # tabulated figures assume c = 3e8, so they agree to about 0.07%
    def test_table_system(self):
        l, _ = taps_from_physical(5000.0, 0.0, 24e9, 7.68e6, 32 / 30e3)
        assert l == pytest.approx(256, rel=1e-3)
        assert l == pytest.approx(2 * 5000.0 * 7.68e6 / 299_792_458.0, rel=1e-15)

    def test_velocity_tap(self):
        _, k = taps_from_physical(0.0, 93.75, 24e9, 7.68e6, 96 / 30e3)
        assert k == pytest.approx(48, rel=1e-3)

    def test_negative_range(self):
        with pytest.raises(ValueError):
            taps_from_physical(-1.0, 0.0, 24e9, 1e6, 1e-3)


class TestNoise:
    def test_inf_unchanged(self):
        g = pilot_grid(DESK)
        assert np.array_equal(add_awgn(g, math.inf, seed=1).samples, g.samples)

    def test_deterministic(self):
        g = pilot_grid(DESK)
        a = add_awgn(g, 10.0, seed=42).samples
        b = add_awgn(g, 10.0, seed=42).samples
        assert a.tobytes() == b.tobytes()

    def test_variance(self):
        cfg = SubframeConfig(M=256, N=32, delta_f=30e3)
        g = DDGrid.zeros(cfg)
        y = add_awgn(g, 0.0, seed=3).samples
        assert np.mean(np.abs(y) ** 2) == pytest.approx(1.0, rel=0.05)
        assert noise_variance(2.0, 10.0) == pytest.approx(0.4)

    def test_zero_pilot(self):
        cfg = SubframeConfig(M=8, N=8, delta_f=30e3, pilot_amp=0j)
        with pytest.raises(ValueError):
            add_awgn(DDGrid.zeros(cfg), 10.0, seed=0)
