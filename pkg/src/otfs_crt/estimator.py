"""Per-subframe peak search and cross-subframe residue combination."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .crt import ResidueSystem, crt_solve, lcm_all, to_centered
from .ddcore import SPEED_OF_LIGHT, DDGrid
from .errors import EmptyGrid
from .frames import FrameLayout


@dataclass(frozen=True)
class SubframeEstimate:
    k_hat: int
    l_hat: int
    peak_mag: float
    detected: bool = True


@dataclass(frozen=True)
class CombinedEstimate:
    l_tilde: int
    k_tilde: int
    range_m: float
    velocity_mps: float


def estimate_subframe(
    rx: DDGrid, search: np.ndarray | None = None, noise_var: float | None = None
) -> SubframeEstimate:
    """Locate the strongest cell and express it relative to the pilot.

    ``search`` restricts the argmax to a boolean window (default: whole
    grid). Ties go to the smallest ``k`` then the smallest ``l``. When
    ``noise_var`` is given, a peak below three noise standard deviations
    is reported with ``detected=False``.
    """
    rx.check()
    cfg = rx.config
    mag = np.abs(np.asarray(rx.samples))
    if mag.size == 0:
        raise EmptyGrid("received grid has no cells")
    if search is not None:
        search = np.asarray(search, dtype=bool)
        if not search.any():
            raise EmptyGrid("search window is empty")
        mag = np.where(search, mag, -1.0)
    flat = int(np.argmax(mag))
    k_star, l_star = divmod(flat, cfg.M)
    peak = float(mag[k_star, l_star])
    detected = True
    if noise_var is not None:
        detected = peak > 3.0 * math.sqrt(noise_var)
    return SubframeEstimate(
        k_hat=(k_star - cfg.pilot_k) % cfg.N,
        l_hat=(l_star - cfg.pilot_l) % cfg.M,
        peak_mag=peak,
        detected=detected,
    )


def whole_frame_estimate(
    rx: DDGrid, search: np.ndarray | None = None, noise_var: float | None = None
) -> SubframeEstimate:
    """Classic single-frame estimate; residues are only known modulo ``(N, M)``."""
    return estimate_subframe(rx, search, noise_var)


def combine_delay(estimates: Sequence[SubframeEstimate], moduli: Sequence[int]) -> int:
    if len(moduli) == 1:
        return int(estimates[0].l_hat)
    return crt_solve(ResidueSystem.from_pairs((e.l_hat for e in estimates), moduli))


def combine_doppler(estimates: Sequence[SubframeEstimate], moduli: Sequence[int]) -> int:
    """Signed Doppler tap: CRT solution mapped onto the symmetric range."""
    if len(moduli) == 1:
        value = int(estimates[0].k_hat)
    else:
        value = crt_solve(ResidueSystem.from_pairs((e.k_hat for e in estimates), moduli))
    return to_centered(value, lcm_all(moduli))


def to_physical(l_tilde: float, k_tilde: float, B: float, D: float, f_c: float) -> tuple[float, float]:
    """(range in m, radial velocity in m/s) for mono-static round-trip taps."""
    range_m = SPEED_OF_LIGHT * l_tilde / (2.0 * B)
    velocity = SPEED_OF_LIGHT * k_tilde / (2.0 * f_c * D)
    return range_m, velocity


def estimate_layout(
    layout: FrameLayout, rx_grids: Sequence[DDGrid], f_c: float
) -> tuple[CombinedEstimate, list[SubframeEstimate]]:
    """Run the peak search on every subframe and combine the paired residues."""
    if len(rx_grids) != layout.F:
        raise ValueError(f"expected {layout.F} received grids, got {len(rx_grids)}")
    per_frame = [
        estimate_subframe(rx, layout.search_mask(i)) for i, rx in enumerate(rx_grids)
    ]
    l_tilde = combine_delay([per_frame[i] for i in layout.delay_pair], layout.delay_moduli)
    k_tilde = combine_doppler([per_frame[i] for i in layout.doppler_pair], layout.doppler_moduli)
    range_m, velocity = to_physical(l_tilde, k_tilde, layout.reference_B, layout.reference_D, f_c)
    return CombinedEstimate(l_tilde, k_tilde, range_m, velocity), per_frame
