"""Two identical degenerate atoms: exchange interaction and controlled-Z synthesis.

Each atom has four states: ground sublevels 0, 1 and excited sublevels 2, 3.
Product states are indexed ``m = 4 i + j`` (atom A state ``i``, atom B state ``j``).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import brentq

from dqlab.errors import ValidationError
from dqlab.matcore import ComplexMatrix, as_matrix, tensor

# (ground-excited, excited-ground) pairs linked by the exchange coupling h
COUPLED_PAIRS = ((2, 8), (3, 9), (6, 12), (7, 13))
COUPLED_INDICES = tuple(sorted(i for pair in COUPLED_PAIRS for i in pair))

# for each degenerate label pair (p, q): indices of |gg>, |ge>, |eg>, |ee>
LOGICAL_BLOCKS = tuple(
    tuple(4 * (p + 2 * a) + (q + 2 * b) for a in (0, 1) for b in (0, 1))
    for p in (0, 1)
    for q in (0, 1)
)


class ProductBasisIndex(NamedTuple):
    i: int
    j: int

    @property
    def m(self) -> int:
        return 4 * self.i + self.j

    @classmethod
    def from_flat(cls, m: int) -> "ProductBasisIndex":
        if not 0 <= m < 16:
            raise ValidationError(f"flat index {m} outside 0..15")
        return cls(*divmod(m, 4))


def is_excited(state: int) -> bool:
    return state >= 2


@dataclass(frozen=True)
class TwoAtomModel:
    omega: float = 96.0
    h: complex = 1.0
    hbar: float = 1.0

    def __post_init__(self) -> None:
        if self.hbar <= 0:
            raise ValidationError("hbar must be positive")

    @property
    def omega_prime(self) -> float:
        return abs(self.h) / self.hbar


def build_vab_interaction(model: TwoAtomModel) -> ComplexMatrix:
    """Rotating-frame exchange interaction: ``h`` at the four pair slots, Hermitian."""
    v = np.zeros((16, 16), dtype=np.complex128)
    for a, b in COUPLED_PAIRS:
        v[a, b] = model.h
        v[b, a] = np.conj(model.h)
    return v


def coupled_projector() -> ComplexMatrix:
    d = np.zeros((16, 16), dtype=np.complex128)
    d[COUPLED_INDICES, COUPLED_INDICES] = 1.0
    return d


def single_atom_hamiltonian(model: TwoAtomModel) -> ComplexMatrix:
    """Per-atom share ``+-hbar w/4`` of the pair energies, so the sum reproduces ``h_g, h_0, h_e``."""
    return 0.25 * model.hbar * model.omega * np.diag([1.0, 1.0, -1.0, -1.0]).astype(np.complex128)


def two_atom_hamiltonian(model: TwoAtomModel) -> ComplexMatrix:
    """Diagonal energies ``h_g = hbar w/2``, ``h_e = -hbar w/2``, ``h_0 = 0`` plus the exchange term."""
    diag = np.empty(16)
    for m in range(16):
        idx = ProductBasisIndex.from_flat(m)
        n_exc = is_excited(idx.i) + is_excited(idx.j)
        diag[m] = 0.5 * model.hbar * model.omega * (1 - n_exc)
    return np.diag(diag).astype(np.complex128) + build_vab_interaction(model)


def interaction_part(model: TwoAtomModel) -> ComplexMatrix:
    """``H_AB - H_A (x) I - I (x) H_B``."""
    ha = single_atom_hamiltonian(model)
    eye = np.eye(4)
    return two_atom_hamiltonian(model) - tensor(ha, eye) - tensor(eye, ha)


def u_ab_closed(t: float, model: TwoAtomModel) -> ComplexMatrix:
    """``I - D + cos(W' t) D - i sin(W' t) V / (hbar W')`` with ``W' = |h| / hbar``."""
    wp = model.omega_prime
    if wp == 0:
        return np.eye(16, dtype=np.complex128)
    d = coupled_projector()
    v = build_vab_interaction(model)
    return np.eye(16) - d + math.cos(wp * t) * d - 1j * math.sin(wp * t) / (model.hbar * wp) * v


def extract_cd(u: ArrayLike) -> tuple[complex, complex]:
    """Read ``c`` and ``d`` off an evolution of the form ``[[c*, d], [-d*, c]]`` on each pair."""
    m = as_matrix(u)
    return complex(m[8, 8]), complex(m[2, 8])


@dataclass(frozen=True)
class LocalGates:
    P1: ComplexMatrix
    P2: ComplexMatrix
    P3: ComplexMatrix
    P4: ComplexMatrix
    P5: ComplexMatrix
    P6: ComplexMatrix
    S: ComplexMatrix
    H: ComplexMatrix
    Z: ComplexMatrix
    theta: float

    def as_dict(self) -> dict[str, ComplexMatrix]:
        return {k: getattr(self, k) for k in ("P1", "P2", "P3", "P4", "P5", "P6", "S", "H", "Z")}


def _level_phase(x: complex) -> ComplexMatrix:
    return np.diag([1.0, 1.0, x, x]).astype(np.complex128)


def local_gate_library(c: complex, d: complex, tol: float = 1e-10) -> LocalGates:
    """Single-atom gates acting identically on both degenerate sublevel pairs.

    ``theta`` is defined by ``e^{i theta} = |c| + i |d|``. Phases that involve
    ``d / |d|`` fall back to 1 when ``d = 0``.
    """
    if abs(abs(c) ** 2 + abs(d) ** 2 - 1.0) > tol:
        raise ValidationError(f"|c|^2 + |d|^2 = {abs(c) ** 2 + abs(d) ** 2:.12f}, expected 1")
    theta = math.atan2(abs(d), abs(c))
    if abs(d) > 0:
        # unit phase of d without dividing by a possibly subnormal |d|
        u_d = cmath.exp(1j * cmath.phase(d))
        p1 = -1j * u_d
        p2 = 1j * np.conj(u_d)
    else:
        p1 = p2 = 1.0
    if abs(d) > 0 and abs(c) > 0:
        # e^{i pi/4} sqrt(c* d*) / sqrt(|c||d|) with one branch shared by P3 and P4
        p3 = cmath.exp(1j * (math.pi / 4 - (cmath.phase(c) + cmath.phase(d)) / 2))
    else:
        p3 = 1.0
    p4 = np.conj(p3)
    s2 = 1 / math.sqrt(2)
    return LocalGates(
        P1=_level_phase(p1),
        P2=_level_phase(p2),
        P3=_level_phase(p3),
        P4=_level_phase(p4),
        P5=np.diag([cmath.exp(-1j * theta)] * 2 + [cmath.exp(1j * theta)] * 2),
        P6=_level_phase(cmath.exp(2j * theta)),
        S=_level_phase(1j),
        H=s2 * np.array([[1, 0, 1, 0], [0, 1, 0, 1], [1, 0, -1, 0], [0, 1, 0, -1]], dtype=np.complex128),
        Z=_level_phase(-1.0),
        theta=theta,
    )


@dataclass(frozen=True)
class CZDiagnostics:
    c: complex
    d: complex
    theta: float
    offdiag_max: float
    phase: complex


def cz_sequence(
    u: ArrayLike, c: complex | None = None, d: complex | None = None
) -> tuple[ComplexMatrix, CZDiagnostics]:
    """Dress an exchange evolution with local gates into a diagonal phase gate.

    ``U2 = (P3 x P4)(P1 x P2) U (P3 x P4)``, ``U3 = (S^dag H x S^dag H) U2 (H S x H S)``,
    ``U4 = (I x Z) U3 (I x Z) U3``, ``U5 = (P6 x P5) U4``. ``U5`` is the identity
    except for ``e^{4 i theta}`` on states with both atoms excited.
    """
    m = as_matrix(u)
    if m.shape != (16, 16):
        raise ValidationError(f"expected a 16x16 evolution, got {m.shape}")
    if c is None or d is None:
        c_read, d_read = extract_cd(m)
        c = c_read if c is None else c
        d = d_read if d is None else d
    g = local_gate_library(c, d)
    k = tensor
    u2 = k(g.P3, g.P4) @ k(g.P1, g.P2) @ m @ k(g.P3, g.P4)
    sd = g.S.conj().T
    u3 = k(sd, sd) @ k(g.H, g.H) @ u2 @ k(g.H, g.H) @ k(g.S, g.S)
    zb = k(np.eye(4), g.Z)
    u4 = zb @ u3 @ zb @ u3
    u5 = k(g.P6, g.P5) @ u4
    offdiag = float(np.max(np.abs(u5 - np.diag(np.diag(u5)))))
    return u5, CZDiagnostics(c=complex(c), d=complex(d), theta=g.theta, offdiag_max=offdiag, phase=complex(u5[10, 10]))


def expected_u5(theta: float) -> ComplexMatrix:
    diag = np.ones(16, dtype=np.complex128)
    for m in range(16):
        idx = ProductBasisIndex.from_flat(m)
        if is_excited(idx.i) and is_excited(idx.j):
            diag[m] = cmath.exp(4j * theta)
    return np.diag(diag)


@dataclass(frozen=True)
class CZTiming:
    t_equal: float
    t_literal: float
    discrepancy: float


def solve_cz_time(model: TwoAtomModel) -> CZTiming:
    """First time with ``|c| = |d|`` and the time from ``tan^2(W' t) = (W' hbar)^2``.

    The first is read off the actual evolution matrix; the second is the
    condition as it appears when ``|d|`` keeps the ``1 / (hbar W')`` prefactor.
    """
    wp = model.omega_prime
    if wp == 0:
        raise ValidationError("coupling h must be non-zero")
    quarter = math.pi / (2 * wp)

    def gap(t: float) -> float:
        c, d = extract_cd(u_ab_closed(t, model))
        return abs(c) - abs(d)

    t_eq = brentq(gap, 0.0, quarter, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    target = wp * model.hbar
    t_lit = brentq(lambda t: math.tan(wp * t) - target, 0.0, quarter * (1 - 1e-12), xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return CZTiming(t_equal=t_eq, t_literal=t_lit, discrepancy=abs(t_lit - t_eq))
