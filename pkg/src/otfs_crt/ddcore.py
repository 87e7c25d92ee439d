"""Delay-Doppler domain signal model for an ideal-pulse OTFS link.

Grids are indexed ``[k, l]`` with the Doppler index ``k`` in ``[0, N)`` on
axis 0 and the delay index ``l`` in ``[0, M)`` on axis 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch

SPEED_OF_LIGHT = 299_792_458.0

# below this |sin(pi x / N)| the closed form is replaced by the direct sum
_NEAR_POLE = 1e-9
# two bandwidths/durations closer than this (relative) are treated as equal
REL_TOL = 1e-9


def snap_ratio(ratio: float) -> float:
    """Return the nearest integer when ``ratio`` is one up to rounding noise."""
    nearest = round(ratio)
    if nearest != 0 and math.isclose(ratio, nearest, rel_tol=REL_TOL, abs_tol=0.0):
        return float(nearest)
    return ratio


@dataclass(frozen=True)
class SubframeConfig:
    """Geometry of one critically sampled OTFS (sub)frame.

    ``M`` subcarriers spaced ``delta_f`` apart and ``N`` slots of length
    ``T = 1 / delta_f``. The pilot defaults to the grid centre.
    """

    M: int
    N: int
    delta_f: float
    pilot_k: int | None = None
    pilot_l: int | None = None
    pilot_amp: complex = 1.0 + 0.0j

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 2:
            raise ValueError(f"M must be an integer >= 2, got {self.M}")
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N}")
        if not self.delta_f > 0 or not math.isfinite(self.delta_f):
            raise ValueError(f"delta_f must be positive, got {self.delta_f}")
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "delta_f", float(self.delta_f))
        if self.pilot_k is None:
            object.__setattr__(self, "pilot_k", self.N // 2)
        if self.pilot_l is None:
            object.__setattr__(self, "pilot_l", self.M // 2)
        if not 0 <= self.pilot_k < self.N:
            raise ValueError(f"pilot_k={self.pilot_k} outside [0, {self.N})")
        if not 0 <= self.pilot_l < self.M:
            raise ValueError(f"pilot_l={self.pilot_l} outside [0, {self.M})")
        object.__setattr__(self, "pilot_amp", complex(self.pilot_amp))

    @property
    def T(self) -> float:
        return 1.0 / self.delta_f

    @property
    def B(self) -> float:
        """Occupied bandwidth ``M * delta_f`` in Hz."""
        return self.M * self.delta_f

    @property
    def D(self) -> float:
        """Frame duration ``N * T`` in seconds."""
        return self.N / self.delta_f

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N, self.M)

    def same_bandwidth(self, other: "SubframeConfig") -> bool:
        return math.isclose(self.B, other.B, rel_tol=REL_TOL)

    def same_duration(self, other: "SubframeConfig") -> bool:
        return math.isclose(self.D, other.D, rel_tol=REL_TOL)


@dataclass(frozen=True)
class TargetParams:
    """A single point scatterer.

    ``delay_tap`` and ``doppler_tap`` are normalised to ``reference_B`` and
    ``reference_D``; use :meth:`taps_for` to re-express them on another grid.
    """

    gain: complex
    delay_tap: float
    doppler_tap: float
    reference_B: float
    reference_D: float

    @property
    def tau(self) -> float:
        return self.delay_tap / self.reference_B

    @property
    def nu(self) -> float:
        return self.doppler_tap / self.reference_D

    def taps_for(self, cfg: SubframeConfig) -> tuple[float, float]:
        """(delay tap, Doppler tap) on the grid of ``cfg``."""
        delay = self.delay_tap * snap_ratio(cfg.B / self.reference_B)
        doppler = self.doppler_tap * snap_ratio(cfg.D / self.reference_D)
        return delay, doppler


@dataclass(frozen=True)
class DDGrid:
    config: SubframeConfig
    samples: np.ndarray = field(repr=False)

    @classmethod
    def zeros(cls, config: SubframeConfig) -> "DDGrid":
        return cls(config, np.zeros(config.shape, dtype=complex))

    def check(self) -> None:
        if np.shape(self.samples) != self.config.shape:
            raise GridMismatch(
                f"samples have shape {np.shape(self.samples)}, config expects {self.config.shape}"
            )


@dataclass(frozen=True)
class TapDecomposition:
    alpha: int
    tau_hat: float
    beta: int
    nu_hat: float


def _sampling(n: int, x, sign: float):
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    # reduce into one period first; both forms are N-periodic
    xr = x - n * np.floor(x / n)
    out = np.empty(x.shape, dtype=complex)

    integer = xr == np.rint(xr)
    out[integer] = np.where(np.rint(xr[integer]) % n == 0, 1.0, 0.0)

    rest = ~integer
    s = np.sin(np.pi * xr / n)
    near = rest & (np.abs(s) < _NEAR_POLE)
    if near.any():
        # centre on the nearest multiple of n so the direct sum stays accurate
        xc = xr[near] - n * np.rint(xr[near] / n)
        idx = np.arange(n)
        out[near] = np.exp(sign * 2j * np.pi * np.outer(xc, idx) / n).sum(axis=1) / n
    far = rest & ~near
    if far.any():
        xf = xr[far]
        out[far] = (
            np.exp(sign * 1j * np.pi * xf * (n - 1) / n)
            * np.sin(np.pi * xf)
            / (n * s[far])
        )
    return out[0] if scalar else out


def sample_w_nu(N: int, x):
    """Doppler sampling function ``(1/N) sum_n exp(-j 2 pi n x / N)``.

    Accepts scalars or arrays. Integer arguments are exact: 1 at multiples
    of ``N`` and 0 elsewhere.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    return _sampling(int(N), x, -1.0)


def sample_w_tau(M: int, x):
    """Delay sampling function, the conjugate-phase twin of :func:`sample_w_nu`."""
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    return _sampling(int(M), x, +1.0)


def decompose_taps(tau: float, nu: float, cfg: SubframeConfig) -> TapDecomposition:
    """Split delay/Doppler into whole grid periods plus an in-range remainder.

    Floor convention: the remainders are non-negative even for negative Doppler.
    """
    if tau < 0:
        raise ValueError(f"delay must be non-negative, got {tau}")
    T, df = cfg.T, cfg.delta_f
    alpha = math.floor(tau / T)
    beta = math.floor(nu / df)
    tau_hat = tau - alpha * T
    nu_hat = nu - beta * df
    # floor of a ratio that rounds up by one ulp leaves a tiny negative remainder
    if tau_hat < 0:
        alpha -= 1
        tau_hat += T
    if nu_hat < 0:
        beta -= 1
        nu_hat += df
    # ... and a remainder smaller than one ulp of the period rounds up to it
    if tau_hat >= T:
        alpha, tau_hat = alpha + 1, 0.0
    if nu_hat >= df:
        beta, nu_hat = beta + 1, 0.0
    return TapDecomposition(alpha, tau_hat, beta, nu_hat)


def _reduced_taps(target: TargetParams, cfg: SubframeConfig) -> tuple[float, float]:
    delay, doppler = target.taps_for(cfg)
    return delay % cfg.M, doppler % cfg.N


def effective_gain(target: TargetParams, cfg: SubframeConfig) -> complex:
    """Channel gain including the delay-Doppler coupling phase on this grid.

    ``h * exp(-j 2 pi k l / (N M))`` with ``k``, ``l`` the taps reduced into
    ``[0, N)`` and ``[0, M)``; using reduced taps keeps the result identical
    for targets that differ by whole grid periods.
    """
    l_hat, k_hat = _reduced_taps(target, cfg)
    return complex(target.gain) * np.exp(-2j * np.pi * k_hat * l_hat / (cfg.N * cfg.M))


def dd_response(tx: DDGrid, target: TargetParams) -> DDGrid:
    """Noiseless received DD grid for a single scatterer.

    ``y[k, l] = h~ * sum x[k', l'] w_nu(N, k-k'-k_nu) w_tau(M, l-l'-l_tau)``.
    Sparse inputs are summed over their non-zero cells, dense ones via the
    circulant kernel matrices.
    """
    tx.check()
    cfg = tx.config
    N, M = cfg.N, cfg.M
    l_tap, k_tap = _reduced_taps(target, cfg)
    h_eff = effective_gain(target, cfg)
    x = np.asarray(tx.samples, dtype=complex)

    kk = np.arange(N)
    ll = np.arange(M)
    nz_k, nz_l = np.nonzero(x)
    if len(nz_k) <= 4:
        y = np.zeros((N, M), dtype=complex)
        for k0, l0 in zip(nz_k, nz_l):
            wk = sample_w_nu(N, kk - k0 - k_tap)
            wl = sample_w_tau(M, ll - l0 - l_tap)
            y += x[k0, l0] * np.outer(wk, wl)
    else:
        w_doppler = sample_w_nu(N, kk[:, None] - kk[None, :] - k_tap)
        w_delay = sample_w_tau(M, ll[:, None] - ll[None, :] - l_tap)
        y = w_doppler @ x @ w_delay.T
    return DDGrid(cfg, h_eff * y)


def taps_from_physical(range_m: float, speed_mps: float, f_c: float, B: float, D: float):
    """Mono-static round-trip taps ``(l_tau, k_nu)`` for a target at ``range_m``."""
    if range_m < 0:
        raise ValueError(f"range must be non-negative, got {range_m}")
    tau = 2.0 * range_m / SPEED_OF_LIGHT
    nu = 2.0 * speed_mps * f_c / SPEED_OF_LIGHT
    return tau * B, nu * D


def noise_variance(pilot_amp: complex, snr_db: float) -> float:
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    return abs(pilot_amp) ** 2 / 10.0 ** (snr_db / 10.0)


def add_awgn(grid: DDGrid, snr_db: float, seed=None) -> DDGrid:
    """Add circular complex Gaussian noise at ``|x_p|^2 / sigma^2 = snr``.

    ``snr_db = inf`` returns the grid unchanged. ``seed`` is anything
    :func:`numpy.random.default_rng` accepts, including a Generator.
    """
    if math.isinf(snr_db) and snr_db > 0:
        return grid
    if grid.config.pilot_amp == 0:
        raise ValueError("SNR is defined relative to the pilot; pilot amplitude is zero")
    var = noise_variance(grid.config.pilot_amp, snr_db)
    rng = np.random.default_rng(seed)
    shape = np.shape(grid.samples)
    noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return DDGrid(grid.config, grid.samples + math.sqrt(var / 2.0) * noise)
