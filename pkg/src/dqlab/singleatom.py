"""Single-atom dynamics on the 2S1/2 - 2P1/2 pair and the degenerate Hadamard gate.

Basis ordering is ``(alpha_0, alpha_1, beta_0, beta_1)``: the two ground
sublevels (m = -1/2, +1/2) followed by the two excited sublevels.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import ArrayLike

from dqlab.angular import P_HALF, S_HALF, zeeman_matrix
from dqlab.errors import ConfigurationError, NumericalError, ValidationError
from dqlab.matcore import ComplexMatrix, as_matrix, expm_generator

PERTURBATIVE_LIMIT = 0.1

_SWAP = np.array(
    [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]], dtype=np.complex128
)
_LEVEL_SIGN = np.array([1.0, 1.0, -1.0, -1.0])

DEGENERATE_HADAMARD = (
    np.array([[1, 0, 1, 0], [0, 1, 0, 1], [1, 0, -1, 0], [0, 1, 0, -1]], dtype=np.complex128)
    / math.sqrt(2)
)


@dataclass(frozen=True)
class PhysParams:
    """Single-atom scenario.

    Attributes
    ----------
    Omega : float
        Rabi angular frequency.
    omega : float
        Transition angular frequency between the two levels.
    r : float
        Field ratio ``mu_B B0 / (hbar Omega)``.
    theta : float
        Angle between the magnetic field and the optical polarization.
    g_s : float
        Electron spin g-factor.
    hbar : float
        Reduced Planck constant (natural units by default).
    """

    Omega: float = 1.0
    omega: float = 96.0
    r: float = 0.0
    theta: float = 0.0
    g_s: float = 2.0
    hbar: float = 1.0

    def __post_init__(self) -> None:
        if not self.Omega > 0 or not self.omega > 0:
            raise ValidationError("Omega and omega must be positive")
        if self.r < 0:
            raise ValidationError("field ratio r must be non-negative")
        if not 0 <= self.theta <= math.pi:
            raise ValidationError("theta must lie in [0, pi]")
        if self.hbar <= 0:
            raise ValidationError("hbar must be positive")
        if self.r > PERTURBATIVE_LIMIT:
            warnings.warn(
                f"r = {self.r} is outside the perturbative regime (r << 1)", stacklevel=3
            )

    @property
    def zeeman_energy(self) -> float:
        """``mu_B B0`` in energy units."""
        return self.r * self.hbar * self.Omega

    def with_r(self, r: float) -> "PhysParams":
        return replace(self, r=r)


@dataclass(frozen=True)
class RabiAmplitudes:
    alpha: tuple[complex, complex]
    beta: tuple[complex, complex]

    @classmethod
    def from_vector(cls, v: ArrayLike) -> "RabiAmplitudes":
        a = np.asarray(v, dtype=np.complex128).reshape(4)
        return cls(alpha=(complex(a[0]), complex(a[1])), beta=(complex(a[2]), complex(a[3])))

    def as_vector(self) -> np.ndarray:
        return np.array([*self.alpha, *self.beta], dtype=np.complex128)

    def populations(self) -> np.ndarray:
        return np.abs(self.as_vector()) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_vector()))


def h_int(p: PhysParams) -> ComplexMatrix:
    """Interaction-picture dipole Hamiltonian ``(hbar Omega / 2)`` times the level swap."""
    return 0.5 * p.hbar * p.Omega * _SWAP


def h_free(p: PhysParams) -> ComplexMatrix:
    # sign fixed so that exp(-i H0 t / hbar) gives ground levels the phase e^{+i omega t/2}
    return np.diag(-0.5 * p.hbar * p.omega * _LEVEL_SIGN).astype(np.complex128)


def h_zeeman(p: PhysParams) -> ComplexMatrix:
    """Zeeman term for the S1/2 - P1/2 pair, ``mu_B B0 = r hbar Omega``."""
    return zeeman_matrix(S_HALF, P_HALF, B0=p.zeeman_energy, theta=p.theta, g_s=p.g_s, mu_B=1.0)


def u0(t: float, p: PhysParams) -> ComplexMatrix:
    """Free evolution ``diag(e^{i w t/2}, e^{i w t/2}, e^{-i w t/2}, e^{-i w t/2})``."""
    return np.diag(np.exp(0.5j * p.omega * t * _LEVEL_SIGN))


def u_int(t: float, p: PhysParams) -> ComplexMatrix:
    return expm_generator(h_int(p), t, p.hbar)


def u_schrodinger(t: float, p: PhysParams) -> ComplexMatrix:
    """Field-free Schrodinger-picture evolution ``U0(t) U_int(t)`` (ignores ``p.r``)."""
    return u0(t, p) @ u_int(t, p)


def u_schrodinger_closed(t: float, p: PhysParams) -> ComplexMatrix:
    """Closed-form entries of the field-free evolution, used as a cross-check."""
    c, s = math.cos(p.Omega * t / 2), math.sin(p.Omega * t / 2)
    eg, ee = np.exp(0.5j * p.omega * t), np.exp(-0.5j * p.omega * t)
    return np.array(
        [
            [eg * c, 0, -1j * eg * s, 0],
            [0, eg * c, 0, -1j * eg * s],
            [-1j * ee * s, 0, ee * c, 0],
            [0, -1j * ee * s, 0, ee * c],
        ],
        dtype=np.complex128,
    )


def rabi_amplitudes(t: float, initial: RabiAmplitudes, p: PhysParams) -> RabiAmplitudes:
    """Interaction-picture amplitudes at time ``t`` (field-free, resonant drive)."""
    psi0 = initial.as_vector()
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-10:
        raise ValidationError("initial amplitudes must be normalized")
    return RabiAmplitudes.from_vector(u_int(t, p) @ psi0)


def rabi_amplitudes_closed(t: float, initial: RabiAmplitudes, p: PhysParams) -> RabiAmplitudes:
    """Textbook solution: ``alpha cos(Omega t/2) - i beta sin(Omega t/2)`` per pair."""
    c, s = math.cos(p.Omega * t / 2), math.sin(p.Omega * t / 2)
    a, b = np.array(initial.alpha), np.array(initial.beta)
    return RabiAmplitudes.from_vector(np.concatenate([c * a - 1j * s * b, c * b - 1j * s * a]))


def integrate_odes(
    t: float,
    initial: RabiAmplitudes | ArrayLike,
    p: PhysParams,
    delta: float,
    coupling: ArrayLike,
    n_steps: int | None = None,
    steps_per_period: int = 500,
    t0: float = 0.0,
) -> RabiAmplitudes | np.ndarray:
    """Integrate the rotating-wave amplitude equations with fixed-step RK4.

    ``i d(alpha_i)/dt = sum_j Omega_ij e^{i delta t} beta_j / (2 hbar)`` and
    ``i d(beta_j)/dt = sum_i conj(Omega_ij) e^{-i delta t} alpha_i / (2 hbar)``.

    ``coupling`` is the ground x excited block ``Omega_ij`` in energy units.
    A :class:`RabiAmplitudes` input gives a :class:`RabiAmplitudes` output;
    a plain vector (any level dimensions) gives a vector back. Integration
    runs from ``t0`` to ``t0 + t``; ``t0`` only matters when ``delta != 0``.
    """
    omega_c = as_coupling = np.asarray(coupling, dtype=np.complex128)
    if as_coupling.ndim != 2:
        raise ValidationError("coupling must be a 2-D ground x excited block")
    n_g, n_e = as_coupling.shape
    psi = initial.as_vector() if isinstance(initial, RabiAmplitudes) else np.asarray(initial, dtype=np.complex128)
    if psi.shape != (n_g + n_e,):
        raise ValidationError(f"state has {psi.size} amplitudes, coupling expects {n_g + n_e}")

    rate = max(p.Omega, abs(delta), np.max(np.abs(omega_c)) / p.hbar if omega_c.size else 0.0)
    h_max = 2 * math.pi / (200 * rate) if rate > 0 else abs(t) or 1.0
    if n_steps is None:
        h_target = min(h_max, 2 * math.pi / (steps_per_period * rate)) if rate > 0 else h_max
        n_steps = max(1, math.ceil(abs(t) / h_target))
    h = t / n_steps if n_steps else 0.0
    if n_steps < 1 or abs(h) > h_max * (1 + 1e-12):
        raise ConfigurationError(f"RK4 step {abs(h):.3e} exceeds the limit {h_max:.3e}")
    if t != 0 and abs(h) < 1e-15 * abs(t):
        raise ConfigurationError("RK4 step size underflow")

    half_over_hbar = 0.5 / p.hbar
    k_ab = omega_c * half_over_hbar
    k_ba = omega_c.conj().T * half_over_hbar

    def rhs(tau: float, y: np.ndarray) -> np.ndarray:
        a, b = y[:n_g], y[n_g:]
        ph = np.exp(1j * delta * tau)
        return np.concatenate([-1j * ph * (k_ab @ b), -1j * np.conj(ph) * (k_ba @ a)])

    y = psi.copy()
    tau = t0
    for _ in range(n_steps):
        k1 = rhs(tau, y)
        k2 = rhs(tau + h / 2, y + h / 2 * k1)
        k3 = rhs(tau + h / 2, y + h / 2 * k2)
        k4 = rhs(tau + h, y + h * k3)
        y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        tau += h
    if isinstance(initial, RabiAmplitudes):
        return RabiAmplitudes.from_vector(y)
    return y


def u_prime(t: float, p: PhysParams) -> ComplexMatrix:
    """Dipole-free evolution under ``H0 + H_B``."""
    return expm_generator(h_free(p) + h_zeeman(p), t, p.hbar)


def u_tot(t: float, p: PhysParams) -> ComplexMatrix:
    """Driven evolution ``U0(t) exp(-i (H_int + H_B) t / hbar)``."""
    return u0(t, p) @ expm_generator(h_int(p) + h_zeeman(p), t, p.hbar)


def hadamard_durations(p: PhysParams) -> tuple[float, float, float]:
    """Durations ``(7 pi/2w - pi/2W, pi/2W, 3 pi/2w)`` of the three pulse-sequence steps.

    The first is negative whenever ``omega > 7 Omega``; it is then realized as the
    inverse free evolution.
    """
    return (
        7 * math.pi / (2 * p.omega) - math.pi / (2 * p.Omega),
        math.pi / (2 * p.Omega),
        3 * math.pi / (2 * p.omega),
    )


# the pulse sequence equals i times the Hadamard; this factor removes it
HADAMARD_PHASE = -1j


def hadamard_gate(p: PhysParams) -> ComplexMatrix:
    """Degenerate Hadamard ``U'(t1) U_tot(t2) U'(t3)`` with the global ``i`` removed."""
    t1, t2, t3 = hadamard_durations(p)
    return HADAMARD_PHASE * (u_prime(t1, p) @ u_tot(t2, p) @ u_prime(t3, p))


def naive_hadamard_gate(p: PhysParams) -> ComplexMatrix:
    """Field-free sequence ``U0(3pi/2w) U(pi/2W) U0(3pi/2w)``.

    Equals ``-i H`` only when ``omega/Omega`` is a multiple of 8; otherwise the
    ground (excited) block picks up ``e^{+i d}`` (``e^{-i d}``), ``d = omega pi / (4 Omega)``.
    """
    tw = 3 * math.pi / (2 * p.omega)
    return u0(tw, p) @ u_schrodinger(math.pi / (2 * p.Omega), p) @ u0(tw, p)


def naive_deviation_phase(p: PhysParams) -> float:
    return p.omega * math.pi / (4 * p.Omega)


def closed_form_expansion(p: PhysParams) -> list[ComplexMatrix]:
    """Closed-form zeroth, first and second order Hadamard coefficients (per power of r)."""
    pi = math.pi
    a, b = p.hbar * p.Omega / 2, p.hbar * p.omega / 2
    c, s = math.cos(p.theta), math.sin(p.theta)
    k1 = 12 * math.sqrt(2) * b
    A = ((pi - 4) * b - 30 * pi * a) / k1
    B = pi * (b - 24 * a) / k1
    C = pi * (16 * a + b) / k1
    D = (10 * pi * a + (pi - 4) * b) / k1
    first = 1j * np.array(
        [
            [-A * c, A * s, -B * c, B * s],
            [A * s, A * c, B * s, B * c],
            [C * c, -C * s, -D * c, D * s],
            [-C * s, -C * c, D * s, D * c],
        ]
    )
    k2 = 288 * math.sqrt(2) * b * b
    e00 = -pi * (900 * pi * a * a - 60 * (pi - 4) * a * b + (pi - 4) * b * b) / k2
    e02 = -(576 * pi**2 * a * a - 48 * pi**2 * a * b + (16 - 4 * pi + pi**2) * b * b) / k2
    e20 = -(256 * pi**2 * a * a + 32 * pi**2 * a * b + (16 - 4 * pi + pi**2) * b * b) / k2
    e22 = pi * (100 * pi * a * a + 20 * (pi - 4) * a * b + (pi - 4) * b * b) / k2
    second = np.array(
        [[e00, 0, e02, 0], [0, e00, 0, e02], [e20, 0, e22, 0], [0, e20, 0, e22]],
        dtype=np.complex128,
    )
    return [DEGENERATE_HADAMARD.copy(), first.astype(np.complex128), second]


RICHARDSON_STEPS = (1e-3, 5e-4, 2.5e-4)


def _gate_at(p: PhysParams, r: float) -> ComplexMatrix:
    # r may be negative for the symmetric stencil; bypass PhysParams validation
    t1, t2, t3 = hadamard_durations(p)
    h0, hi = h_free(p), h_int(p)
    hb = zeeman_matrix(S_HALF, P_HALF, B0=r * p.hbar * p.Omega, theta=p.theta, g_s=p.g_s)
    up = lambda t: expm_generator(h0 + hb, t, p.hbar)  # noqa: E731
    ut = u0(t2, p) @ expm_generator(hi + hb, t2, p.hbar)
    return HADAMARD_PHASE * (up(t1) @ ut @ up(t3))


def _richardson(estimates: list[ComplexMatrix], ratio: float = 2.0, order: int = 2) -> tuple[ComplexMatrix, float]:
    tableau = [list(estimates)]
    for level in range(1, len(estimates)):
        factor = ratio ** (order * level)
        prev = tableau[-1]
        tableau.append([(factor * prev[i + 1] - prev[i]) / (factor - 1) for i in range(len(prev) - 1)])
    best = tableau[-1][0]
    spread = float(np.max(np.abs(best - tableau[-2][-1]))) if len(tableau) > 1 else 0.0
    return best, spread


def taylor_expand_gate(
    p: PhysParams, order: int = 2, steps: tuple[float, ...] = RICHARDSON_STEPS, tol: float = 1e-6
) -> list[ComplexMatrix]:
    """Coefficients ``U^(k)`` of ``U_Had(r) = sum_k r^k U^(k)`` for ``k <= order``.

    Central differences in ``r`` at ``r = 0`` over a halving step sweep, refined
    by Richardson extrapolation. Raises :class:`NumericalError` when the last two
    tableau entries differ by more than ``tol``.
    """
    if order not in (0, 1, 2):
        raise ValidationError("order must be 0, 1 or 2")
    if len(steps) < 2:
        raise ValidationError("need at least two step sizes")
    ratios = {round(steps[i] / steps[i + 1], 12) for i in range(len(steps) - 1)}
    if len(ratios) != 1:
        raise ValidationError("step sweep must use a constant ratio")
    ratio = ratios.pop()
    f0 = _gate_at(p, 0.0)
    coeffs = [f0]
    if order == 0:
        return coeffs
    plus = [_gate_at(p, h) for h in steps]
    minus = [_gate_at(p, -h) for h in steps]
    d1 = [(fp - fm) / (2 * h) for fp, fm, h in zip(plus, minus, steps)]
    u1, spread1 = _richardson(d1, ratio)
    if spread1 > tol:
        raise NumericalError(f"first-order Richardson tableau did not converge (spread {spread1:.2e}, steps {steps})")
    coeffs.append(u1)
    if order == 2:
        d2 = [(fp - 2 * f0 + fm) / (2 * h * h) for fp, fm, h in zip(plus, minus, steps)]
        u2, spread2 = _richardson(d2, ratio)
        if spread2 > tol:
            raise NumericalError(f"second-order Richardson tableau did not converge (spread {spread2:.2e}, steps {steps})")
        coeffs.append(u2)
    return coeffs


@dataclass(frozen=True)
class EntryComparison:
    order: int
    row: int
    col: int
    numeric: complex
    reference: complex
    abs_error: float
    rel_error: float
    agrees: bool


def compare_to_closed_form(p: PhysParams, rtol: float = 1e-5, atol: float = 1e-12) -> list[EntryComparison]:
    """Entrywise report of the numerical expansion against the closed-form matrices.

    Entries are compared relative to the largest closed-form magnitude of that order,
    so structurally zero entries do not blow up the relative error.
    """
    numeric = taylor_expand_gate(p, order=2)
    reference = closed_form_expansion(p)
    out = []
    for k, (num, ref) in enumerate(zip(numeric, reference)):
        scale = max(float(np.max(np.abs(ref))), atol)
        for i in range(4):
            for j in range(4):
                err = abs(num[i, j] - ref[i, j])
                rel = err / scale
                out.append(
                    EntryComparison(k, i, j, complex(num[i, j]), complex(ref[i, j]), err, rel, rel <= rtol or err <= atol)
                )
    return out


def expansion_residual(p: PhysParams, r: float, coeffs: list[ComplexMatrix] | None = None) -> list[float]:
    """Frobenius norms of ``U_Had(r) - sum_{k<=K} r^k U^(k)`` for ``K = 0, 1, 2``."""
    coeffs = coeffs if coeffs is not None else taylor_expand_gate(p, 2)
    u = _gate_at(p, r)
    partial = np.zeros_like(u)
    out = []
    for k, c in enumerate(coeffs):
        partial = partial + (r**k) * as_matrix(c)
        out.append(float(np.linalg.norm(u - partial)))
    return out
