"""Angular-momentum algebra for fine-structure levels.

Half-integers are handled internally as doubled integers so the Racah sum
for the 3j symbol runs in exact integer/rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from dqlab.errors import ValidationError
from dqlab.matcore import ComplexMatrix


def _twice(x: float, name: str) -> int:
    d = round(2 * x)
    if abs(2 * x - d) > 1e-9:
        raise ValidationError(f"{name}={x!r} is not an integer or half-integer")
    return int(d)


@dataclass(frozen=True)
class AngularLevel:
    """Fine-structure level ``2S+1 L_J`` with sublevels ordered by ascending m_J."""

    L: int
    S: float
    J: float

    def __post_init__(self) -> None:
        l2, s2, j2 = _twice(self.L, "L"), _twice(self.S, "S"), _twice(self.J, "J")
        if l2 % 2 or l2 < 0:
            raise ValidationError(f"L must be a non-negative integer, got {self.L!r}")
        if s2 < 0 or j2 < 0:
            raise ValidationError("S and J must be non-negative")
        if not abs(l2 - s2) <= j2 <= l2 + s2 or (l2 + s2 - j2) % 2:
            raise ValidationError(f"J={self.J} is not reachable from L={self.L}, S={self.S}")

    @property
    def m_list(self) -> list[float]:
        j2 = _twice(self.J, "J")
        return [m2 / 2 for m2 in range(-j2, j2 + 1, 2)]

    @property
    def dim(self) -> int:
        return _twice(self.J, "J") + 1

    def __str__(self) -> str:
        letter = "SPDFGHIK"[self.L] if self.L < 8 else f"L{self.L}"
        return f"{int(round(2 * self.S + 1))}{letter}{Fraction(self.J).limit_denominator(2)}"


S_HALF = AngularLevel(L=0, S=0.5, J=0.5)
P_HALF = AngularLevel(L=1, S=0.5, J=0.5)
P_THREE_HALVES = AngularLevel(L=1, S=0.5, J=1.5)


@dataclass(frozen=True)
class DipoleScenario:
    ground: AngularLevel
    excited: AngularLevel
    line_strength_S: float
    E_magnitude: float

    def __post_init__(self) -> None:
        if self.line_strength_S < 0 or self.E_magnitude < 0:
            raise ValidationError("line strength and field magnitude must be non-negative")


def _wigner3j_squared(j1: int, j2: int, j3: int, m1: int, m2: int, m3: int) -> tuple[int, Fraction]:
    # arguments are doubled; returns (sign, value^2)
    if m1 + m2 + m3 != 0:
        return 0, Fraction(0)
    if not abs(j1 - j2) <= j3 <= j1 + j2 or (j1 + j2 + j3) % 2:
        return 0, Fraction(0)
    f = math.factorial
    a, b, c = (j1 + j2 - j3) // 2, (j1 - j2 + j3) // 2, (-j1 + j2 + j3) // 2
    triangle = Fraction(f(a) * f(b) * f(c), f((j1 + j2 + j3) // 2 + 1))
    weights = (
        f((j1 + m1) // 2) * f((j1 - m1) // 2) * f((j2 + m2) // 2)
        * f((j2 - m2) // 2) * f((j3 + m3) // 2) * f((j3 - m3) // 2)
    )
    k_min = max(0, (j2 - j3 - m1) // 2, (j1 - j3 + m2) // 2)
    k_max = min(a, (j1 - m1) // 2, (j2 + m2) // 2)
    total = Fraction(0)
    for k in range(k_min, k_max + 1):
        denom = (
            f(k) * f((j3 - j2 + m1) // 2 + k) * f((j3 - j1 - m2) // 2 + k)
            * f(a - k) * f((j1 - m1) // 2 - k) * f((j2 + m2) // 2 - k)
        )
        total += Fraction((-1) ** k, denom)
    if total == 0:
        return 0, Fraction(0)
    phase = (-1) ** ((j1 - j2 - m3) // 2)
    sign = phase * (1 if total > 0 else -1)
    return sign, triangle * weights * total * total


def wigner3j(j1: float, j2: float, j3: float, m1: float, m2: float, m3: float) -> float:
    """Wigner 3j symbol from the Racah formula.

    Returns 0 when the triangle rule or ``m1 + m2 + m3 = 0`` fails.
    Raises :class:`ValidationError` when an ``m`` is off the ``-j..j`` lattice.
    """
    js = [_twice(j, "j") for j in (j1, j2, j3)]
    ms = [_twice(m, "m") for m in (m1, m2, m3)]
    for j, m in zip(js, ms):
        if j < 0:
            raise ValidationError("j must be non-negative")
        if abs(m) > j or (j - m) % 2:
            raise ValidationError(f"m={m / 2} is not in the lattice of j={j / 2}")
    sign, sq = _wigner3j_squared(*js, *ms)
    if sign == 0:
        return 0.0
    return sign * math.sqrt(sq)


def line_strength(
    A12: float, k12: float, n: int, alpha: float, c: float, charge: float = 1.0
) -> float:
    """Reduced dipole element ``e <0||r C1||1>`` from the Einstein A coefficient.

    ``sqrt(3 A12 n / (4 c alpha k12^2))`` multiplied by ``charge``.
    """
    if k12 <= 0:
        raise ValidationError("wavenumber k12 must be positive")
    if A12 < 0 or n < 1 or alpha <= 0 or c <= 0:
        raise ValidationError("need A12 >= 0, n >= 1, alpha > 0, c > 0")
    return charge * math.sqrt(3.0 * A12 * n / (4.0 * c * alpha * k12**2))


def dipole_coupling_matrix(s: DipoleScenario) -> ComplexMatrix:
    """Coupling block ``Omega_ij`` (ground rows, excited columns) for z-linear light.

    Only the ``q = 0`` channel survives, so entries with ``m_i != m_j`` vanish.
    """
    g, e = s.ground, s.excited
    out = np.zeros((g.dim, e.dim), dtype=np.complex128)
    scale = s.line_strength_S * s.E_magnitude
    for i, mi in enumerate(g.m_list):
        for j, mj in enumerate(e.m_list):
            out[i, j] = scale * wigner3j(g.J, 1, e.J, -mi, 0, mj)
    return out


def lande_factor(level: AngularLevel, g_s: float = 2.0) -> float:
    """Projection-theorem g-factor ``<L.J>/j(j+1) + g_s <S.J>/j(j+1)``."""
    if level.J == 0:
        raise ValidationError("projection theorem is undefined for J = 0")
    jj = level.J * (level.J + 1)
    ll = level.L * (level.L + 1)
    ss = level.S * (level.S + 1)
    l_dot_j = (jj + ll - ss) / 2
    s_dot_j = (jj + ss - ll) / 2
    return (l_dot_j + g_s * s_dot_j) / jj


def spin_matrices(J: float) -> tuple[ComplexMatrix, ComplexMatrix]:
    """``J_z`` and ``J_x`` (units of hbar) in the ascending-m basis."""
    ms = np.arange(-J, J + 1.0)
    jz = np.diag(ms).astype(np.complex128)
    raising = np.sqrt(J * (J + 1) - ms[:-1] * (ms[:-1] + 1))
    jplus = np.diag(raising, k=-1).astype(np.complex128)  # <m+1|J+|m>, rows index m+1
    jx = 0.5 * (jplus + jplus.conj().T)
    return jz, jx


def _level_g(level: AngularLevel, g_s: float, convention: str) -> float:
    if convention == "projection":
        return lande_factor(level, g_s)
    if convention == "gs_over_3":
        # S1/2 carries g_s, P1/2 carries g_s/3 (agrees with the Lande value at g_s = 2)
        if level == S_HALF:
            return g_s
        if level == P_HALF:
            return g_s / 3.0
        raise ValidationError("the 'gs_over_3' convention only covers 2S1/2 and 2P1/2")
    raise ValidationError(f"unknown Zeeman convention {convention!r}")


def zeeman_matrix(
    ground: AngularLevel,
    excited: AngularLevel,
    B0: float,
    theta: float,
    g_s: float = 2.0,
    mu_B: float = 1.0,
    convention: str = "projection",
) -> ComplexMatrix:
    """Zeeman Hamiltonian for a field tilted by ``theta`` from the polarization axis.

    ``B0`` is ``g_s |B|``. Each level contributes ``mu_B g_J |B| (cos(theta) J_z
    + sin(theta) J_x)``; the result is block-diagonal in (ground, excited).
    ``convention="gs_over_3"`` uses ``g_s/3`` for 2P1/2 instead of the Lande value
    (the two agree at ``g_s = 2``).
    """
    if g_s == 0:
        raise ValidationError("g_s must be non-zero (B0 is defined as g_s |B|)")
    b_abs = B0 / g_s
    blocks = []
    for level in (ground, excited):
        g = _level_g(level, g_s, convention)
        jz, jx = spin_matrices(level.J)
        blocks.append(mu_B * g * b_abs * (np.cos(theta) * jz + np.sin(theta) * jx))
    n0, n1 = ground.dim, excited.dim
    out = np.zeros((n0 + n1, n0 + n1), dtype=np.complex128)
    out[:n0, :n0] = blocks[0]
    out[n0:, n0:] = blocks[1]
    return out


def zeeman_convention_discrepancy(B0: float, theta: float, g_s: float, mu_B: float = 1.0) -> float:
    """Max entry difference between the projection and ``gs_over_3`` S1/2-P1/2 Zeeman matrices."""
    a = zeeman_matrix(S_HALF, P_HALF, B0, theta, g_s, mu_B, "projection")
    b = zeeman_matrix(S_HALF, P_HALF, B0, theta, g_s, mu_B, "gs_over_3")
    return float(np.max(np.abs(a - b)))
