"""Acceptance criteria, one marker per criterion; the summary prints PASS/FAIL per number."""
import math
import time

import numpy as np
import pytest

from otfs_crt.cli import main
from otfs_crt.crt import ResidueSystem, crt_solve
from otfs_crt.ddcore import SPEED_OF_LIGHT, DDGrid, TargetParams, dd_response, sample_w_nu, sample_w_tau
from otfs_crt.estimator import SubframeEstimate, combine_doppler
from otfs_crt.frames import Cell, assemble_tx
from otfs_crt.harness import Case, analytic_report, draw_scenario, run_trial, sweep_snr
from otfs_crt.presets import TABLE3_REFERENCE, preset_layout

SEED = 2024
TRIALS = 1000


def db(x):
    return 10 * math.log10(x) if x > 0 else -math.inf


@pytest.fixture(scope="module")
def desk1():
    return preset_layout("desk", 1)


@pytest.fixture(scope="module")
def baseline_sweep(desk1):
    return sweep_snr(desk1, 1, Case.INTEGER, [0.0, 10.0, 20.0], TRIALS, SEED)


@pytest.mark.acceptance(1, "integer taps recovered exactly at 10 dB (desk, type 1)")
def test_c1_integer_exactness(desk1, detail):
    start = time.perf_counter()
    row = sweep_snr(desk1, 1, Case.INTEGER, [10.0], TRIALS, SEED).rows[0]
    elapsed = time.perf_counter() - start
    detail(
        f"recovery {row.recovery_rate:.4f} (need >= 0.999), nmse delay {row.nmse_delay:.3e}, "
        f"doppler {row.nmse_doppler:.3e} (need < 1e-4), {elapsed:.2f} s (need < 30 s)"
    )
    assert elapsed < 30
    assert row.recovery_rate >= 0.999
    assert row.nmse_delay < 1e-4 and row.nmse_doppler < 1e-4


@pytest.mark.acceptance(2, "whole-frame baseline errs by whole periods, independent of SNR")
def test_c2_noiseless_errors_are_periods(desk1, detail):
    whole = desk1.whole_frame_config()
    rng = np.random.default_rng(SEED)
    wrong = 0
    for t in range(TRIALS):
        sc = draw_scenario(1, desk1, Case.INTEGER, rng)
        out = run_trial(desk1, sc, math.inf, t)
        l0, k0 = out.baseline_taps
        k_true = sc.doppler_tap * whole.D / desk1.reference_D
        dl, dk = sc.delay_tap - l0, k_true - k0
        assert dk == round(dk)
        assert dl % whole.M == 0 and round(dk) % whole.N == 0
        wrong += (dl, dk) != (0, 0)
    detail(f"{TRIALS} noiseless draws: all errors are (a*{whole.N}, b*{whole.M}); {wrong} non-zero")


@pytest.mark.acceptance(2, "whole-frame baseline errs by whole periods, independent of SNR")
def test_c2_baseline_plateau(baseline_sweep, detail):
    b0, b20 = baseline_sweep.rows[0].baseline_nmse_mean, baseline_sweep.rows[2].baseline_nmse_mean
    detail(f"baseline nmse 0 dB {b0:.3e}, 20 dB {b20:.3e}, change {db(b20 / b0):+.2f} dB (need within 3 dB)")
    assert abs(db(b20 / b0)) <= 3.0


@pytest.mark.acceptance(2, "whole-frame baseline errs by whole periods, independent of SNR")
def test_c2_baseline_gap_at_10db(baseline_sweep, detail):
    row = baseline_sweep.rows[1]
    gap = db(row.baseline_nmse_mean) - db(row.nmse_mean)
    detail(
        f"10 dB: baseline nmse {row.baseline_nmse_mean:.3e}, proposed {row.nmse_mean:.3e}, "
        f"gap {gap:.2f} dB (need >= 20 dB)"
    )
    assert gap >= 20.0


@pytest.mark.acceptance(3, "sampling functions and responses are periodic")
def test_c3_w_periodicity(detail):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 257))
        x = float(rng.uniform(-2 * n, 2 * n))
        a = int(rng.integers(-8, 9))
        for w in (sample_w_nu, sample_w_tau):
            worst = max(worst, abs(w(n, x + a * n) - w(n, x)))
    detail(f"max |w(x + aN) - w(x)| over 1000 shifts: {worst:.2e} (need < 1e-10)")
    assert worst < 1e-10


@pytest.mark.acceptance(3, "sampling functions and responses are periodic")
def test_c3_response_bitwise(detail):
    rng = np.random.default_rng(SEED + 1)
    layout = preset_layout("table3", 1)
    checked = 0
    for cfg in preset_layout("desk", 1).subframes + layout.subframes[:1]:
        for _ in range(50):
            dense = DDGrid(cfg, rng.standard_normal(cfg.shape) + 1j * rng.standard_normal(cfg.shape))
            pilot = DDGrid.zeros(cfg)
            pilot.samples[cfg.pilot_k, cfg.pilot_l] = 1
            # multiples of 1/16 keep the shifted taps exact
            l, k = rng.integers(0, 16 * cfg.M) / 16, rng.integers(-8 * cfg.N, 8 * cfg.N) / 16
            a, b = int(rng.integers(-4, 5)), int(rng.integers(0, 5))
            t0 = TargetParams(0.7 - 0.2j, l, k, cfg.B, cfg.D)
            t1 = TargetParams(0.7 - 0.2j, l + b * cfg.M, k + a * cfg.N, cfg.B, cfg.D)
            for tx in (pilot, dense):
                assert dd_response(tx, t0).samples.tobytes() == dd_response(tx, t1).samples.tobytes()
                checked += 1
    detail(f"{checked} shifted responses bitwise identical")


def _coprime_system(rng):
    while True:
        count = int(rng.integers(2, 5))
        moduli = []
        for _ in range(200):
            m = int(rng.integers(2, 1000))
            if all(math.gcd(m, o) == 1 for o in moduli) and math.prod(moduli) * m <= 10**6:
                moduli.append(m)
            if len(moduli) == count:
                break
        if len(moduli) >= 2:
            return [(int(rng.integers(0, m)), m) for m in moduli]


@pytest.mark.acceptance(4, "CRT agrees with exhaustive search")
def test_c4_crt_vs_scan(detail):
    rng = np.random.default_rng(SEED)
    for _ in range(1000):
        entries = _coprime_system(rng)
        L = math.prod(m for _, m in entries)
        x = np.arange(L)
        ok = np.ones(L, dtype=bool)
        for r, m in entries:
            ok &= x % m == r
        hits = np.flatnonzero(ok)
        assert hits.size == 1
        assert crt_solve(ResidueSystem(tuple(entries))) == hits[0]
    detail("1000 systems, 1000 matches")


@pytest.mark.acceptance(4, "CRT agrees with exhaustive search")
def test_c4_signed_round_trip(detail):
    moduli = (32, 31)
    values = range(-(992 // 2), (992 + 1) // 2)
    for k in values:
        ests = [SubframeEstimate(k_hat=k % m, l_hat=0, peak_mag=1.0) for m in moduli]
        assert combine_doppler(ests, moduli) == k
    detail(f"{len(values)} signed Doppler taps on (32, 31) recovered")


@pytest.mark.acceptance(5, "table3 resolution and range figures")
def test_c5_table3(detail):
    ref = TABLE3_REFERENCE[1]
    rep = analytic_report(preset_layout("table3", 1), 24e9, ref)
    checks = {
        "whole.range_resolution_m": 19.5,
        "whole.velocity_resolution_mps": 1.95,
        "whole.max_range_m": 5000.0,
        "whole.max_velocity_mps": 93.75,
        "proposed.max_velocity_mps": 2903.0,
    }
    for key, want in checks.items():
        got = rep.value(key)
        detail(f"{key}: {got:.6g} vs {want:g} ({100 * (got / want - 1):+.3f}%)")
        assert got == pytest.approx(want, rel=5e-3)
    formula = SPEED_OF_LIGHT * math.lcm(256, 255) / (2 * 7.68e6)
    assert rep.proposed.max_range_m == pytest.approx(formula, rel=1e-12)
    flagged = {k: (got, want) for k, got, want in rep.discrepancies()}
    assert "proposed.max_range_m" in flagged
    assert flagged["proposed.max_range_m"][1] == 127.5e3
    detail(f"proposed.max_range_m: {rep.proposed.max_range_m / 1e3:.2f} km by formula; 127.5 km flagged")


@pytest.mark.acceptance(6, "guard bands stay clean for in-range targets")
@pytest.mark.parametrize("type_tag", [2, 3])
def test_c6_guard_integrity(type_tag, detail):
    layout = preset_layout("desk", type_tag)
    rng = np.random.default_rng(SEED + type_tag)
    worst = 0.0
    for _ in range(1000):
        sc = draw_scenario(type_tag, layout, Case.INTEGER, rng)
        for g, mask in zip(assemble_tx(layout, np.zeros(10**4)), layout.masks):
            y = dd_response(g, sc.target(layout)).samples
            worst = max(worst, float(np.max(np.abs(y[mask == Cell.DATA]))))
    detail(f"type {type_tag}: max data-cell magnitude {worst:.2e} over 1000 draws (need < 1e-10)")
    assert worst < 1e-10


@pytest.mark.acceptance(7, "fractional taps leave a positive NMSE floor")
@pytest.mark.parametrize("type_tag", [1, 2, 3])
@pytest.mark.parametrize("case", [Case.FRACTIONAL_DOPPLER, Case.FRACTIONAL_BOTH])
def test_c7_fractional_floor(type_tag, case, detail):
    layout = preset_layout("desk", type_tag)
    low, high = sweep_snr(layout, type_tag, case, [0.0, 30.0], TRIALS, SEED).rows
    detail(f"type {type_tag} {case.value}: nmse 0 dB {low.nmse_mean:.3e}, 30 dB {high.nmse_mean:.3e}")
    assert high.nmse_mean <= low.nmse_mean
    assert high.nmse_mean > 0


@pytest.mark.acceptance(8, "simulate output is reproducible")
def test_c8_determinism(tmp_path, capsys, detail):
    outs = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for out in outs:
        assert main(["simulate", "--preset", "desk", "--seed", "42", "--out", str(out)]) == 0
    capsys.readouterr()
    a, b = (o.read_bytes() for o in outs)
    assert a == b
    detail(f"two runs, {len(a)} bytes each, identical")
