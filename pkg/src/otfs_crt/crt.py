"""Exact integer arithmetic for residue systems.

Everything here works on Python ints, so there is no overflow regardless
of how large the modulus product grows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .errors import NotCoprime

__all__ = [
    "ResidueSystem",
    "ext_gcd",
    "mod_inverse",
    "crt_solve",
    "to_centered",
    "lcm_all",
]


def ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Extended Euclid: return ``(g, x, y)`` with ``a*x + b*y == g == gcd(a, b) > 0``."""
    a, b = int(a), int(b)
    if a == 0 and b == 0:
        raise ValueError("ext_gcd(0, 0) is undefined")
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    if old_r < 0:
        old_r, old_x, old_y = -old_r, -old_x, -old_y
    return old_r, old_x, old_y


def mod_inverse(a: int, m: int) -> int:
    """Multiplicative inverse of ``a`` modulo ``m``, in ``[1, m)``."""
    if m < 2:
        raise ValueError(f"modulus must be >= 2, got {m}")
    g, x, _ = ext_gcd(a % m, m)
    if g != 1:
        raise NotCoprime(f"{a} has no inverse modulo {m} (gcd {g})")
    return x % m


@dataclass(frozen=True)
class ResidueSystem:
    """A set of congruences ``value ≡ residue (mod modulus)``."""

    entries: tuple[tuple[int, int], ...]

    def __post_init__(self):
        entries = tuple((int(r), int(m)) for r, m in self.entries)
        if not entries:
            raise ValueError("residue system is empty")
        for r, m in entries:
            if m < 2:
                raise ValueError(f"modulus must be >= 2, got {m}")
            if not 0 <= r < m:
                raise ValueError(f"residue {r} outside [0, {m})")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_pairs(cls, residues: Iterable[int], moduli: Iterable[int]) -> "ResidueSystem":
        residues, moduli = list(residues), list(moduli)
        if len(residues) != len(moduli):
            raise ValueError("residues and moduli differ in length")
        return cls(tuple(zip(residues, moduli)))

    @property
    def moduli(self) -> tuple[int, ...]:
        return tuple(m for _, m in self.entries)

    @property
    def residues(self) -> tuple[int, ...]:
        return tuple(r for r, _ in self.entries)

    def check_coprime(self) -> None:
        for m1, m2 in combinations(self.moduli, 2):
            g = math.gcd(m1, m2)
            if g != 1:
                raise NotCoprime(f"moduli {m1} and {m2} are not co-prime (gcd {g})")


def crt_solve(system: ResidueSystem) -> int:
    """Unique ``x`` in ``[0, prod(moduli))`` satisfying every congruence.

    Uses the direct reconstruction ``x = sum r_i * n_i * inv(n_i mod m_i)``
    where ``n_i`` is the product of all other moduli.
    """
    system.check_coprime()
    total = math.prod(system.moduli)
    x = 0
    for r, m in system.entries:
        n_i = total // m
        x += r * n_i * mod_inverse(n_i, m)
    return x % total


def to_centered(value: int, L: int) -> int:
    """Map ``value`` in ``[0, L)`` to the congruent integer of least magnitude.

    Output lies in ``[-(L // 2), ceil(L / 2) - 1]``; for even ``L`` the tie at
    ``L / 2`` resolves to ``-L / 2``.
    """
    value, L = int(value), int(L)
    if L < 1:
        raise ValueError(f"L must be positive, got {L}")
    if not 0 <= value < L:
        raise ValueError(f"value {value} outside [0, {L})")
    upper = (L + 1) // 2 - 1
    return value - L if value > upper else value


def lcm_all(moduli: Sequence[int]) -> int:
    if len(moduli) == 0:
        raise ValueError("lcm_all needs at least one modulus")
    return math.lcm(*(int(m) for m in moduli))
