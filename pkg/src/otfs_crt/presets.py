"""Built-in subframe sets.

``table3`` is the 7.68 MHz / 24 GHz system: a 256-subcarrier, 30 kHz
subframe paired with a 255-subcarrier subframe of identical bandwidth and
a 31-slot subframe of identical duration. ``desk`` is the 8/7/9 toy set.

For the delay-only and Doppler-only types the desk preset uses the 7x9 and
9x7 subframes, which share both bandwidth and duration, so in-range taps
stay integer in every subframe and the guard bands are exactly clean.
"""
from __future__ import annotations

from .ddcore import SubframeConfig
from .frames import DetectionType, FrameLayout, build_layout

CARRIER_HZ = 24e9

_TABLE3_B = 7.68e6
_TABLE3_DF = 30e3
_DESK_DF = 30e3

PRESET_NAMES = ("table3", "desk")

def _table3(type_tag: DetectionType):
    f1 = SubframeConfig(M=256, N=32, delta_f=_TABLE3_DF)
    f2 = SubframeConfig(M=255, N=32, delta_f=_TABLE3_B / 255)
    f3 = SubframeConfig(M=264, N=31, delta_f=_TABLE3_DF * 31 / 32)
    if type_tag == DetectionType.BOTH_OUT_OF_RANGE:
        return [f1, f2, f3], 0, 0
    if type_tag == DetectionType.DELAY_OUT_OF_RANGE:
        return [f1, f2], 4, 0
    return [f1, f3], 0, 16


def _desk(type_tag: DetectionType):
    b = 8 * _DESK_DF
    f1 = SubframeConfig(M=8, N=8, delta_f=_DESK_DF)
    f2 = SubframeConfig(M=7, N=9, delta_f=b / 7)
    f3 = SubframeConfig(M=9, N=7, delta_f=_DESK_DF * 7 / 8)
    if type_tag == DetectionType.BOTH_OUT_OF_RANGE:
        return [f1, f2, f3], 0, 0
    g3 = SubframeConfig(M=9, N=7, delta_f=b / 9)
    if type_tag == DetectionType.DELAY_OUT_OF_RANGE:
        return [f2, g3], 1, 0
    return [f2, g3], 0, 2


_BUILDERS = {"table3": _table3, "desk": _desk}


def preset_subframes(name: str, type_tag=DetectionType.BOTH_OUT_OF_RANGE):
    """``(subframes, default k_m, default l_m)`` for a named preset."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}") from None
    return builder(DetectionType.parse(type_tag))


def preset_layout(name: str, type_tag=DetectionType.BOTH_OUT_OF_RANGE, k_m=None, l_m=None) -> FrameLayout:
    subframes, k_default, l_default = preset_subframes(name, type_tag)
    return build_layout(
        type_tag,
        subframes,
        k_m=k_default if k_m is None else k_m,
        l_m=l_default if l_m is None else l_m,
    )


# Tabulated system figures for the table3 preset, used to annotate reports.
TABLE3_REFERENCE = {
    DetectionType.BOTH_OUT_OF_RANGE: {
        "whole.range_resolution_m": 19.5,
        "whole.velocity_resolution_mps": 1.95,
        "whole.max_range_m": 5000.0,
        "whole.max_velocity_mps": 93.75,
        "proposed.range_resolution_m": 19.5,
        "proposed.velocity_resolution_mps": 5.86,
        "proposed.max_range_m": 127.5e3,
        "proposed.max_velocity_mps": 2903.0,
    },
    DetectionType.DELAY_OUT_OF_RANGE: {
        "whole.range_resolution_m": 19.5,
        "whole.velocity_resolution_mps": 2.92,
        "whole.max_range_m": 5000.0,
    },
    DetectionType.DOPPLER_OUT_OF_RANGE: {
        "whole.range_resolution_m": 19.5,
        "whole.velocity_resolution_mps": 2.92,
        "whole.max_range_m": 5000.0,
    },
}


def reference_values(name: str | None, type_tag) -> dict[str, float] | None:
    if name != "table3":
        return None
    return TABLE3_REFERENCE[DetectionType.parse(type_tag)]
