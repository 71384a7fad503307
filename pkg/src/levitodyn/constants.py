"""Physical constants (SI), overridable for nondimensional runs."""

from __future__ import annotations

from dataclasses import dataclass

from scipy import constants as _sc


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = _sc.hbar
    k_b: float = _sc.k
    c: float = _sc.c
    epsilon_0: float = _sc.epsilon_0
    g: float = _sc.g


SI = PhysicalConstants()
