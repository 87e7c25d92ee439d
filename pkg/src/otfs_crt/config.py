"""Run configuration files.

INI-style text with a ``[run]`` section and one ``[subframe <label>]``
section per subframe (in file order). Physical quantities need a unit::

    [run]
    type = 1
    case = integer
    snr_db = 0, 10, 20, 30
    trials = 1000
    seed = 42
    carrier = 24 ghz
    out = sweep.csv

    [subframe 1]
    M = 256
    N = 32
    delta_f = 30 khz

    [subframe 2]
    M = 255
    N = 32
    delta_f = 7.68 mhz / 255

``preset = desk`` (or ``table3``) in ``[run]`` replaces the subframe sections.
"""
from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, replace
from pathlib import Path

from .ddcore import SubframeConfig
from .errors import ConfigError
from .frames import DetectionType, FrameLayout, build_layout
from .harness import Case
from .presets import CARRIER_HZ, PRESET_NAMES, preset_subframes, reference_values

DEFAULT_SNR_DB = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)

_FREQ_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
_TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6}
_QUANTITY = re.compile(r"^\s*([-+]?[0-9.]+(?:[eE][-+]?[0-9]+)?)\s*([a-zA-Z]+)\s*(?:/\s*([0-9.]+(?:[eE][-+]?[0-9]+)?)\s*)?$")


@dataclass(frozen=True)
class RunConfig:
    type_tag: DetectionType = DetectionType.BOTH_OUT_OF_RANGE
    case: Case = Case.INTEGER
    preset: str | None = "desk"
    subframes: tuple[SubframeConfig, ...] | None = None
    k_m: int | None = None
    l_m: int | None = None
    snr_db: tuple[float, ...] = DEFAULT_SNR_DB
    trials: int = 1000
    seed: int = 0
    out: str | None = None
    carrier_hz: float = CARRIER_HZ

    def resolved(self) -> tuple[tuple[SubframeConfig, ...], int, int]:
        if self.subframes is not None:
            subs, k_m, l_m = self.subframes, 0, 0
        else:
            subs, k_m, l_m = preset_subframes(self.preset, self.type_tag)
        return (
            tuple(subs),
            k_m if self.k_m is None else self.k_m,
            l_m if self.l_m is None else self.l_m,
        )

    def layout(self) -> FrameLayout:
        subs, k_m, l_m = self.resolved()
        return build_layout(self.type_tag, subs, k_m=k_m, l_m=l_m)

    def reference(self) -> dict[str, float] | None:
        return reference_values(self.preset if self.subframes is None else None, self.type_tag)


def parse_quantity(text: str, units: dict[str, float]) -> float:
    """``'30 khz'`` -> 30000.0; ``'7.68 mhz / 255'`` divides by the integer after the slash."""
    m = _QUANTITY.match(text)
    if not m:
        raise ValueError(f"expected '<number> <unit>', got {text!r}")
    value, unit, divisor = m.groups()
    unit = unit.lower()
    if unit not in units:
        raise ValueError(f"unknown unit {unit!r}; expected one of {', '.join(units)}")
    out = float(value) * units[unit]
    if divisor is not None:
        out /= float(divisor)
    return out


def _line_of(text: str, section: str, key: str | None) -> int | None:
    current = None
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if key is None and current == section:
                return n
            continue
        if current == section and key is not None:
            name = re.split(r"[=:]", line, maxsplit=1)[0].strip().lower()
            if name == key.lower():
                return n
    return None


class _Reader:
    def __init__(self, text: str, source: str):
        self.text = text
        self.source = source

    def fail(self, section: str, key: str | None, msg: str) -> ConfigError:
        line = _line_of(self.text, section, key)
        where = f"{self.source}:{line}" if line else self.source
        field = f"[{section}] {key}" if key else f"[{section}]"
        return ConfigError(f"{where}: {field}: {msg}")

    def get(self, sect: configparser.SectionProxy, key: str, conv, default=None):
        if key not in sect:
            return default
        raw = sect[key]
        try:
            return conv(raw)
        except (ValueError, KeyError) as exc:
            raise self.fail(sect.name, key, str(exc) or f"invalid value {raw!r}") from None


def _parse_int(raw: str) -> int:
    return int(raw.strip())


def _parse_seed(raw: str) -> int:
    seed = int(raw.strip())
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def parse_snr_list(raw: str) -> tuple[float, ...]:
    items = [s.strip() for s in str(raw).split(",") if s.strip()]
    if not items:
        raise ValueError("SNR list is empty")
    values = []
    for item in items:
        text = item.lower().removesuffix("db").strip()
        values.append(float(text))
    return tuple(values)


def _parse_preset(raw: str) -> str:
    name = raw.strip().lower()
    if name not in PRESET_NAMES:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    return name


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    parser = configparser.ConfigParser(
        inline_comment_prefixes=("#", ";"), interpolation=None, strict=True
    )
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}".replace("\n", " ")) from None
    reader = _Reader(text, source)

    if "run" in parser:
        run = parser["run"]
    else:
        parser.add_section("run")
        run = parser["run"]
    known_run = {"type", "case", "preset", "snr_db", "trials", "seed", "carrier", "out", "k_m", "l_m"}
    for key in run:
        if key not in known_run:
            raise reader.fail("run", key, f"unknown key; expected one of {', '.join(sorted(known_run))}")

    type_tag = reader.get(run, "type", DetectionType.parse, DetectionType.BOTH_OUT_OF_RANGE)
    case = reader.get(run, "case", Case.parse, Case.INTEGER)
    preset = reader.get(run, "preset", _parse_preset)
    trials = reader.get(run, "trials", _parse_int, 1000)
    if trials < 1:
        raise reader.fail("run", "trials", "must be >= 1")

    subframes = []
    for name in parser.sections():
        if name == "run":
            continue
        if not name.lower().startswith("subframe"):
            raise reader.fail(name, None, "unknown section; expected [run] or [subframe <label>]")
        subframes.append(_parse_subframe(parser[name], reader))

    if subframes and preset:
        raise reader.fail("run", "preset", "give either a preset or [subframe] sections, not both")
    if not subframes and not preset:
        preset = "desk"

    return RunConfig(
        type_tag=type_tag,
        case=case,
        preset=preset if not subframes else None,
        subframes=tuple(subframes) if subframes else None,
        k_m=reader.get(run, "k_m", _parse_int),
        l_m=reader.get(run, "l_m", _parse_int),
        snr_db=reader.get(run, "snr_db", parse_snr_list, DEFAULT_SNR_DB),
        trials=trials,
        seed=reader.get(run, "seed", _parse_seed, 0),
        out=run.get("out"),
        carrier_hz=reader.get(run, "carrier", lambda s: parse_quantity(s, _FREQ_UNITS), CARRIER_HZ),
    )


def _parse_subframe(sect: configparser.SectionProxy, reader: _Reader) -> SubframeConfig:
    known = {"M", "N", "delta_f", "slot", "pilot_k", "pilot_l", "pilot_amp"}
    for key in sect:
        if key not in known:
            raise reader.fail(sect.name, key, f"unknown key; expected one of {', '.join(sorted(known))}")
    for key in ("M", "N"):
        if key not in sect:
            raise reader.fail(sect.name, None, f"missing required key {key!r}")
    if ("delta_f" in sect) == ("slot" in sect):
        raise reader.fail(sect.name, None, "give exactly one of 'delta_f' or 'slot'")
    M = reader.get(sect, "M", _parse_int)
    N = reader.get(sect, "N", _parse_int)
    if "delta_f" in sect:
        delta_f = reader.get(sect, "delta_f", lambda s: parse_quantity(s, _FREQ_UNITS))
    else:
        delta_f = 1.0 / reader.get(sect, "slot", lambda s: parse_quantity(s, _TIME_UNITS))
    kwargs = dict(
        M=M,
        N=N,
        delta_f=delta_f,
        pilot_k=reader.get(sect, "pilot_k", _parse_int),
        pilot_l=reader.get(sect, "pilot_l", _parse_int),
        pilot_amp=reader.get(sect, "pilot_amp", lambda s: complex(s.replace(" ", "")), 1.0 + 0.0j),
    )
    try:
        return SubframeConfig(**kwargs)
    except ValueError as exc:
        raise reader.fail(sect.name, None, str(exc)) from None


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    return parse_config(text, source=str(path))


def _fmt_float(x: float) -> str:
    return repr(float(x))


def dump_config(cfg: RunConfig) -> str:
    """Serialise a config; :func:`parse_config` reproduces the same layout."""
    lines = [
        "[run]",
        f"type = {int(cfg.type_tag)}",
        f"case = {cfg.case.value}",
        "snr_db = " + ", ".join(_fmt_float(s) for s in cfg.snr_db),
        f"trials = {cfg.trials}",
        f"seed = {cfg.seed}",
        f"carrier = {_fmt_float(cfg.carrier_hz)} hz",
    ]
    if cfg.out:
        lines.append(f"out = {cfg.out}")
    if cfg.k_m is not None:
        lines.append(f"k_m = {cfg.k_m}")
    if cfg.l_m is not None:
        lines.append(f"l_m = {cfg.l_m}")
    if cfg.subframes is None:
        lines.append(f"preset = {cfg.preset}")
    else:
        for i, sf in enumerate(cfg.subframes, start=1):
            lines += [
                "",
                f"[subframe {i}]",
                f"M = {sf.M}",
                f"N = {sf.N}",
                f"delta_f = {_fmt_float(sf.delta_f)} hz",
                f"pilot_k = {sf.pilot_k}",
                f"pilot_l = {sf.pilot_l}",
                f"pilot_amp = {sf.pilot_amp!r}",
            ]
    return "\n".join(lines) + "\n"


def with_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    """Copy of ``cfg`` with every non-None override applied."""
    changes = {k: v for k, v in overrides.items() if v is not None}
    if changes.get("preset") is not None:
        changes["subframes"] = None
    return replace(cfg, **changes)
