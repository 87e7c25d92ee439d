"""Command-line front end: ``simulate``, ``report`` and ``demo``."""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from .config import RunConfig, load_config, parse_snr_list, with_overrides
from .crt import lcm_all
from .errors import ConfigError, LayoutError, OtfsCrtError
from .estimator import to_physical
from .frames import DetectionType, FrameLayout
from .harness import Case, Scenario, analytic_report, draw_scenario, format_report, run_trial, sweep_snr
from .presets import PRESET_NAMES

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_LAYOUT = 3

_TYPE_NAMES = {
    DetectionType.BOTH_OUT_OF_RANGE: "delay and Doppler out of range",
    DetectionType.DELAY_OUT_OF_RANGE: "delay out of range",
    DetectionType.DOPPLER_OUT_OF_RANGE: "Doppler out of range",
}


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _snr(text: str) -> tuple[float, ...]:
    try:
        return parse_snr_list(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _type(text: str) -> DetectionType:
    try:
        return DetectionType.parse(text)
    except (KeyError, ValueError):
        raise argparse.ArgumentTypeError(f"unknown detection type {text!r}") from None


def _case(text: str) -> Case:
    try:
        return Case.parse(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown case {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="otfs-crt",
        description="Cross-subframe OTFS delay/Doppler estimation with co-prime grids.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        src = p.add_mutually_exclusive_group()
        src.add_argument("--config", type=Path, help="run configuration file")
        src.add_argument("--preset", choices=PRESET_NAMES, help="built-in subframe set")
        p.add_argument("--type", type=_type, help="detection type 1, 2 or 3")
        p.add_argument("--carrier", type=float, help="carrier frequency in Hz")

    sim = sub.add_parser("simulate", help="Monte-Carlo NMSE sweep, written as CSV")
    common(sim)
    sim.add_argument("--case", type=_case, help="integer | fractional-doppler | fractional-both")
    sim.add_argument("--trials", type=int, help="trials per SNR point")
    sim.add_argument("--seed", type=_seed, help="unsigned 64-bit seed")
    sim.add_argument("--snr", type=_snr, help='comma-separated SNRs in dB, e.g. "0,10,20"')
    sim.add_argument("--out", help="CSV output path (default: sweep.csv)")

    rep = sub.add_parser("report", help="resolution and unambiguous limits")
    common(rep)

    demo = sub.add_parser("demo", help="one noiseless out-of-range trial, step by step")
    common(demo)
    demo.add_argument("--seed", type=_seed, default=0)
    demo.add_argument("--delay", type=float, help="delay tap (reference units)")
    demo.add_argument("--doppler", type=float, help="Doppler tap (reference units)")
    return parser


def _load(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    return with_overrides(
        cfg,
        preset=args.preset,
        type_tag=args.type,
        carrier_hz=args.carrier,
        case=getattr(args, "case", None),
        trials=getattr(args, "trials", None),
        seed=getattr(args, "seed", None) if args.command == "simulate" else None,
        snr_db=getattr(args, "snr", None),
        out=getattr(args, "out", None),
    )


def cmd_simulate(cfg: RunConfig, stdout: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    layout = cfg.layout()
    if cfg.trials < 1:
        raise ConfigError("trials must be >= 1")
    result = sweep_snr(layout, cfg.type_tag, cfg.case, cfg.snr_db, cfg.trials, cfg.seed, cfg.carrier_hz)
    out = Path(cfg.out or "sweep.csv")
    with out.open("w", newline="") as fh:
        result.write_csv(fh)
    for row in result.rows:
        print(
            f"snr {row.snr_db:6.1f} dB  nmse delay {row.nmse_delay:.3e}  doppler {row.nmse_doppler:.3e}  "
            f"mean {row.nmse_mean:.3e}  recovery {row.recovery_rate:.4f}  "
            f"baseline {row.baseline_nmse_mean:.3e}  ({row.trials} trials)",
            file=stdout,
        )
    print(f"wrote {out}", file=stdout)
    return EXIT_OK


def cmd_report(cfg: RunConfig, stdout: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    layout = cfg.layout()
    report = analytic_report(layout, cfg.carrier_hz, cfg.reference())
    label = cfg.preset if cfg.subframes is None else "custom"
    print(f"type {int(cfg.type_tag)} ({_TYPE_NAMES[cfg.type_tag]}), {label}, F = {layout.F}", file=stdout)
    print(format_report(report), file=stdout)
    return EXIT_OK


def _out_of_range(layout: FrameLayout, sc: Scenario) -> bool:
    max_m = max(s.M for s in layout.subframes)
    max_n = max(s.N for s in layout.subframes)
    far = sc.delay_tap > max_m
    fast = abs(sc.doppler_tap) > max_n / 2
    if layout.type_tag == DetectionType.BOTH_OUT_OF_RANGE:
        return far and fast
    if layout.type_tag == DetectionType.DELAY_OUT_OF_RANGE:
        return far
    return fast


def _demo_scenario(layout: FrameLayout, seed: int, delay, doppler) -> Scenario:
    rng = np.random.default_rng(seed)
    sc = draw_scenario(layout.type_tag, layout, Case.INTEGER, rng)
    for _ in range(10_000):
        if _out_of_range(layout, sc):
            break
        sc = draw_scenario(layout.type_tag, layout, Case.INTEGER, rng)
    return Scenario(
        sc.type_tag,
        sc.case,
        sc.delay_tap if delay is None else float(delay),
        sc.doppler_tap if doppler is None else float(doppler),
        sc.gain,
        sc.delay_range,
        sc.doppler_range,
    )


def _congruences(var: str, residues, moduli) -> str:
    return ", ".join(f"{var} = {r} (mod {m})" for r, m in zip(residues, moduli))


def cmd_demo(cfg: RunConfig, seed: int, delay=None, doppler=None, stdout: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    layout = cfg.layout()
    sc = _demo_scenario(layout, seed, delay, doppler)
    out = run_trial(layout, sc, math.inf, np.random.default_rng(seed), cfg.carrier_hz)
    f_c = cfg.carrier_hz

    def say(text: str = "") -> None:
        print(text, file=stdout)

    label = cfg.preset if cfg.subframes is None else "custom"
    say(f"type {int(layout.type_tag)} ({_TYPE_NAMES[layout.type_tag]}), {label}, noiseless")
    r, v = to_physical(sc.delay_tap, sc.doppler_tap, layout.reference_B, layout.reference_D, f_c)
    say(f"target: delay tap {sc.delay_tap:g}, Doppler tap {sc.doppler_tap:g} (range {r:.1f} m, velocity {v:.2f} m/s)")
    say()
    say(f"{'subframe':>8s} {'M':>5s} {'N':>5s} {'delta_f (kHz)':>14s} {'l_hat':>6s} {'k_hat':>6s}")
    for i, (cfg_i, est) in enumerate(zip(layout.subframes, out.subframe_estimates), start=1):
        say(f"{i:8d} {cfg_i.M:5d} {cfg_i.N:5d} {cfg_i.delta_f / 1e3:14.6g} {est.l_hat:6d} {est.k_hat:6d}")
    say()
    est = out.subframe_estimates
    l_res = [est[i].l_hat for i in layout.delay_pair]
    k_res = [est[i].k_hat for i in layout.doppler_pair]
    l_span, k_span = lcm_all(layout.delay_moduli), lcm_all(layout.doppler_moduli)
    say(f"delay:   {_congruences('l', l_res, layout.delay_moduli)}  ->  l = {out.combined.l_tilde} (mod {l_span})")
    k_raw = out.combined.k_tilde % k_span
    say(
        f"Doppler: {_congruences('k', k_res, layout.doppler_moduli)}  ->  k = {k_raw} (mod {k_span})"
        f"  ->  centred {out.combined.k_tilde}"
    )
    say(
        f"cross-subframe estimate: delay {out.combined.l_tilde}, Doppler {out.combined.k_tilde} "
        f"(range {out.combined.range_m:.1f} m, velocity {out.combined.velocity_mps:.2f} m/s)"
    )
    whole = layout.whole_frame_config()
    l0, k0 = out.baseline_taps
    rb, vb = to_physical(out.baseline_delay, out.baseline_doppler, layout.reference_B, layout.reference_D, f_c)
    say(
        f"whole frame (M={whole.M}, N={whole.N}): delay {l0} (mod {whole.M}), Doppler {k0} (mod {whole.N}) "
        f"-> delay {out.baseline_delay:g}, Doppler {out.baseline_doppler:g} in reference taps "
        f"(range {rb:.1f} m, velocity {vb:.2f} m/s)"
    )
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load(args)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "report":
            return cmd_report(cfg)
        return cmd_demo(cfg, args.seed, args.delay, args.doppler)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LayoutError as exc:
        print(f"layout error: {exc}", file=sys.stderr)
        return EXIT_LAYOUT
    except OtfsCrtError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        # unknown preset names and similar bad inputs from the config layer
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
