"""Co-prime multi-subframe layouts and their pilot/guard/data masks."""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .crt import lcm_all
from .ddcore import SPEED_OF_LIGHT, DDGrid, SubframeConfig, snap_ratio
from .errors import (
    BandwidthMismatch,
    CoprimeViolation,
    DurationMismatch,
    GuardTooWide,
    InsufficientData,
    LayoutError,
)


class DetectionType(enum.IntEnum):
    BOTH_OUT_OF_RANGE = 1
    DELAY_OUT_OF_RANGE = 2
    DOPPLER_OUT_OF_RANGE = 3

    @classmethod
    def parse(cls, value) -> "DetectionType":
        if isinstance(value, cls):
            return value
        try:
            return cls(int(value))
        except (TypeError, ValueError):
            pass
        key = str(value).strip().upper().replace("-", "_")
        aliases = {"BOTH": 1, "DELAY": 2, "DOPPLER": 3}
        if key in aliases:
            return cls(aliases[key])
        return cls[key]


class Cell(enum.IntEnum):
    DATA = 0
    GUARD = 1
    PILOT = 2


@dataclass(frozen=True)
class GuardSpec:
    """Largest in-range Doppler tap ``k_m`` and delay tap ``l_m``."""

    k_m: int = 0
    l_m: int = 0

    def __post_init__(self):
        if self.k_m < 0 or self.l_m < 0:
            raise ValueError("guard widths must be non-negative")


@dataclass(frozen=True)
class FrameLayout:
    subframes: tuple[SubframeConfig, ...]
    type_tag: DetectionType
    delay_pair: tuple[int, ...]
    doppler_pair: tuple[int, ...]
    guard: GuardSpec
    masks: tuple[np.ndarray, ...] = field(repr=False, compare=False)

    @property
    def F(self) -> int:
        return len(self.subframes)

    @property
    def delay_moduli(self) -> tuple[int, ...]:
        return tuple(self.subframes[i].M for i in self.delay_pair)

    @property
    def doppler_moduli(self) -> tuple[int, ...]:
        return tuple(self.subframes[i].N for i in self.doppler_pair)

    @property
    def reference_B(self) -> float:
        """Bandwidth that combined delay taps are expressed in."""
        return self.subframes[self.delay_pair[0]].B

    @property
    def reference_D(self) -> float:
        """Duration that combined Doppler taps are expressed in."""
        return self.subframes[self.doppler_pair[0]].D

    def data_cells(self, index: int) -> int:
        return int(np.count_nonzero(self.masks[index] == Cell.DATA))

    def search_mask(self, index: int) -> np.ndarray:
        """Cells where the pilot echo can land for an in-range target.

        Narrower than the guard band: data echoes may spill into the outer
        part of the guard, but never into this window.
        """
        cfg = self.subframes[index]
        out = np.zeros(cfg.shape, dtype=bool)
        if self.type_tag == DetectionType.BOTH_OUT_OF_RANGE:
            out[:] = True
        elif self.type_tag == DetectionType.DELAY_OUT_OF_RANGE:
            k_m = self.guard.k_m
            out[_cyclic(cfg.pilot_k, -k_m, k_m, cfg.N), :] = True
        else:
            out[:, _cyclic(cfg.pilot_l, 0, self.guard.l_m, cfg.M)] = True
        return out

    def whole_frame_config(self) -> SubframeConfig:
        """One frame with the first subframe's spacing spanning all ``F`` slots' time."""
        first = self.subframes[0]
        return SubframeConfig(
            M=first.M, N=first.N * self.F, delta_f=first.delta_f, pilot_amp=first.pilot_amp
        )

    def whole_frame_layout(self) -> "FrameLayout":
        """The classic single-frame counterpart using the same resources."""
        whole = self.whole_frame_config()
        if self.type_tag == DetectionType.BOTH_OUT_OF_RANGE:
            return build_type1([whole])
        if self.type_tag == DetectionType.DELAY_OUT_OF_RANGE:
            k_m = math.ceil(self.guard.k_m * snap_ratio(whole.D / self.reference_D))
            return build_type2([whole], k_m)
        l_m = math.ceil(self.guard.l_m * snap_ratio(whole.B / self.reference_B))
        return build_type3([whole], l_m)


def _cyclic(center: int, lo: int, hi: int, n: int) -> np.ndarray:
    return np.unique((center + np.arange(lo, hi + 1)) % n)


def _as_configs(subframes: Iterable[SubframeConfig]) -> tuple[SubframeConfig, ...]:
    subs = tuple(subframes)
    if not subs:
        raise LayoutError("a layout needs at least one subframe")
    return subs


def _pilot_only_mask(cfg: SubframeConfig) -> np.ndarray:
    mask = np.full(cfg.shape, Cell.GUARD, dtype=np.int8)
    mask[cfg.pilot_k, cfg.pilot_l] = Cell.PILOT
    return mask


def _find_group(
    subs: Sequence[SubframeConfig],
    modulus: Callable[[SubframeConfig], int],
    same: Callable[[SubframeConfig, SubframeConfig], bool],
    axis: str,
    mismatch: type[LayoutError],
) -> tuple[int, ...]:
    # first subframe group (in index order) with co-prime moduli and matched extent
    if len(subs) == 1:
        return (0,)
    for i in range(len(subs)):
        group = [i]
        for j in range(i + 1, len(subs)):
            if not same(subs[i], subs[j]):
                continue
            if all(math.gcd(modulus(subs[g]), modulus(subs[j])) == 1 for g in group):
                group.append(j)
        if len(group) >= 2:
            return tuple(group)
    coprime = [
        (i, j)
        for i, j in itertools.combinations(range(len(subs)), 2)
        if math.gcd(modulus(subs[i]), modulus(subs[j])) == 1
    ]
    values = ", ".join(str(modulus(s)) for s in subs)
    if not coprime:
        a, b = modulus(subs[0]), modulus(subs[1])
        raise CoprimeViolation(
            f"no two subframes have co-prime {axis} counts ({values}); "
            f"e.g. gcd({a}, {b}) = {math.gcd(a, b)}"
        )
    raise mismatch(f"subframes with co-prime {axis} counts ({values}) do not share the same extent")


def _require_pairwise(
    subs: Sequence[SubframeConfig],
    modulus: Callable[[SubframeConfig], int],
    same: Callable[[SubframeConfig, SubframeConfig], bool],
    axis: str,
    mismatch: type[LayoutError],
) -> None:
    for a, b in itertools.combinations(subs, 2):
        g = math.gcd(modulus(a), modulus(b))
        if g != 1:
            raise CoprimeViolation(
                f"{axis} counts {modulus(a)} and {modulus(b)} are not co-prime (gcd {g})"
            )
    for a, b in itertools.combinations(subs, 2):
        if not same(a, b):
            raise mismatch(f"subframes ({a.M}x{a.N}) and ({b.M}x{b.N}) differ in extent")


def build_type1(subframes: Iterable[SubframeConfig]) -> FrameLayout:
    """Pilot-only subframes resolving both delay and Doppler ambiguity."""
    subs = _as_configs(subframes)
    delay = _find_group(
        subs, lambda s: s.M, SubframeConfig.same_bandwidth, "subcarrier", BandwidthMismatch
    )
    doppler = _find_group(
        subs, lambda s: s.N, SubframeConfig.same_duration, "time-slot", DurationMismatch
    )
    masks = tuple(_pilot_only_mask(cfg) for cfg in subs)
    return FrameLayout(subs, DetectionType.BOTH_OUT_OF_RANGE, delay, doppler, GuardSpec(), masks)


def build_type2(subframes: Iterable[SubframeConfig], k_m: int) -> FrameLayout:
    """Delay-extending layout: a zero band of ``2 k_m`` rows either side of the pilot."""
    subs = _as_configs(subframes)
    k_m = int(k_m)
    _require_pairwise(subs, lambda s: s.M, SubframeConfig.same_bandwidth, "subcarrier", BandwidthMismatch)
    n_min = min(s.N for s in subs)
    if not 0 <= k_m < n_min / 4:
        raise GuardTooWide(f"k_m={k_m} must satisfy 0 <= k_m < min(N)/4 = {n_min / 4:g}")
    masks = []
    for cfg in subs:
        mask = np.full(cfg.shape, Cell.DATA, dtype=np.int8)
        mask[_cyclic(cfg.pilot_k, -2 * k_m, 2 * k_m, cfg.N), :] = Cell.GUARD
        mask[cfg.pilot_k, cfg.pilot_l] = Cell.PILOT
        masks.append(mask)
    return FrameLayout(
        subs,
        DetectionType.DELAY_OUT_OF_RANGE,
        tuple(range(len(subs))),
        (0,),
        GuardSpec(k_m=k_m),
        tuple(masks),
    )


def build_type3(subframes: Iterable[SubframeConfig], l_m: int) -> FrameLayout:
    """Doppler-extending layout: a zero band of ``l_m`` columns either side of the pilot."""
    subs = _as_configs(subframes)
    l_m = int(l_m)
    _require_pairwise(subs, lambda s: s.N, SubframeConfig.same_duration, "time-slot", DurationMismatch)
    m_min = min(s.M for s in subs)
    if not 0 <= l_m < m_min / 2:
        raise GuardTooWide(f"l_m={l_m} must satisfy 0 <= l_m < min(M)/2 = {m_min / 2:g}")
    masks = []
    for cfg in subs:
        mask = np.full(cfg.shape, Cell.DATA, dtype=np.int8)
        mask[:, _cyclic(cfg.pilot_l, -l_m, l_m, cfg.M)] = Cell.GUARD
        mask[cfg.pilot_k, cfg.pilot_l] = Cell.PILOT
        masks.append(mask)
    return FrameLayout(
        subs,
        DetectionType.DOPPLER_OUT_OF_RANGE,
        (0,),
        tuple(range(len(subs))),
        GuardSpec(l_m=l_m),
        tuple(masks),
    )


def build_layout(type_tag, subframes: Iterable[SubframeConfig], k_m: int = 0, l_m: int = 0) -> FrameLayout:
    type_tag = DetectionType.parse(type_tag)
    if type_tag == DetectionType.BOTH_OUT_OF_RANGE:
        return build_type1(subframes)
    if type_tag == DetectionType.DELAY_OUT_OF_RANGE:
        return build_type2(subframes, k_m)
    return build_type3(subframes, l_m)


def assemble_tx(layout: FrameLayout, data_symbols: Iterable[complex] | None = None) -> list[DDGrid]:
    """Per-subframe transmit grids: pilot, zero guards, and data in row-major order."""
    stream = iter(() if data_symbols is None else data_symbols)
    grids = []
    for cfg, mask in zip(layout.subframes, layout.masks):
        x = np.zeros(cfg.shape, dtype=complex)
        x[cfg.pilot_k, cfg.pilot_l] = cfg.pilot_amp
        cells = np.flatnonzero(mask == Cell.DATA)
        if cells.size:
            chunk = np.fromiter(itertools.islice(stream, cells.size), dtype=complex)
            if chunk.size < cells.size:
                total = sum(layout.data_cells(i) for i in range(layout.F))
                raise InsufficientData(f"layout has {total} data cells, stream ran out early")
            x.flat[cells] = chunk
        grids.append(DDGrid(cfg, x))
    return grids


@dataclass(frozen=True)
class UnambiguousLimits:
    delay_taps: int
    doppler_taps: int
    range_m: float
    velocity_mps: float
    f_c: float


def unambiguous_limits(layout: FrameLayout, f_c: float) -> UnambiguousLimits:
    """Largest unambiguous delay/Doppler span after combining residues.

    ``velocity_mps`` is the one-sided limit (the Doppler span is symmetric).
    """
    delay_taps = lcm_all(layout.delay_moduli)
    doppler_taps = lcm_all(layout.doppler_moduli)
    range_m = SPEED_OF_LIGHT * delay_taps / (2.0 * layout.reference_B)
    velocity = SPEED_OF_LIGHT * doppler_taps / (4.0 * f_c * layout.reference_D)
    return UnambiguousLimits(delay_taps, doppler_taps, range_m, velocity, f_c)
