"""Dephasing of entangled degenerate states by a fluctuating magnetic field.

The field is Gaussian white noise with ``<B(t') B(t'')> = B0^2 delta(t' - t'')``
and is identical at both atoms. A basis state with Zeeman weight ``w``
accumulates the phase ``-w Phi(t)`` with ``Phi(t) = mu * int_0^t B``, so a
coherence between weights ``w_i`` and ``w_j`` decays as
``exp(-(w_i - w_j)^2 mu^2 B0^2 t / 2)``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike

from dqlab._parallel import map_chunks
from dqlab.angular import P_HALF, S_HALF, lande_factor
from dqlab.errors import ConfigurationError, ValidationError
from dqlab.matcore import ComplexMatrix, as_matrix, normalize

MAX_PHASE_STEP = 0.01


@dataclass(frozen=True)
class DephasingParams:
    mu: float
    B0: float
    t_grid: tuple[float, ...]
    n_traj: int = 100_000
    n_steps: int = 100
    seed: int = 0xD5EED

    def __post_init__(self) -> None:
        grid = np.asarray(self.t_grid, dtype=float)
        if grid.ndim != 1 or grid.size == 0 or grid[0] != 0 or np.any(np.diff(grid) <= 0):
            raise ValidationError("t_grid must be strictly increasing and start at 0")
        if self.n_traj < 1:
            raise ValidationError("n_traj must be at least 1")
        if self.n_steps < 10:
            raise ValidationError("n_steps must be at least 10")
        object.__setattr__(self, "t_grid", tuple(float(t) for t in grid))

    @property
    def rate(self) -> float:
        """``mu^2 B0^2`` (inverse time)."""
        return (self.mu * self.B0) ** 2


class BellKind(str, Enum):
    PLUS_00_11 = "plus_00_11"
    PLUS_01_10 = "plus_01_10"


@dataclass(frozen=True)
class DegenerateBellState:
    """Degenerate analogue of ``|00> + |11>`` or ``|01> + |10>``.

    ``a1, a2`` (``b1, b2``) weight the two degenerate sublevels of atom A (B).
    """

    kind: BellKind
    a1: complex
    a2: complex
    b1: complex
    b2: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", BellKind(self.kind))
        for x, y, name in ((self.a1, self.a2, "a"), (self.b1, self.b2, "b")):
            if abs(abs(x) ** 2 + abs(y) ** 2 - 1) > 1e-12:
                raise ValidationError(f"|{name}1|^2 + |{name}2|^2 must equal 1")

    def components(self) -> list[tuple[complex, tuple[tuple[int, int], tuple[int, int]]]]:
        """Coefficient and the two product states ``(i, j)`` of each summand."""
        a, b = (self.a1, self.a2), (self.b1, self.b2)
        out = []
        for p in (0, 1):
            for q in (0, 1):
                coeff = a[p] * b[q]
                if self.kind is BellKind.PLUS_00_11:
                    out.append((coeff, ((p, q), (p + 2, q + 2))))
                else:
                    out.append((coeff, ((p, q + 2), (p + 2, q))))
        return out

    def vector(self) -> np.ndarray:
        psi = np.zeros(16, dtype=np.complex128)
        for coeff, states in self.components():
            for i, j in states:
                psi[4 * i + j] += coeff
        return normalize(psi)


def sublevel_weights(g_s: float = 2.0) -> np.ndarray:
    """Zeeman weights ``g_J m_J`` for (S1/2 m=-1/2, +1/2, P1/2 m=-1/2, +1/2)."""
    gg, ge = lande_factor(S_HALF, g_s), lande_factor(P_HALF, g_s)
    return np.array([-0.5 * gg, 0.5 * gg, -0.5 * ge, 0.5 * ge])


def product_weights(single: ArrayLike) -> np.ndarray:
    w = np.asarray(single, dtype=float)
    return (w[:, None] + w[None, :]).reshape(-1)


QUBIT_WEIGHTS = np.array([0.0, 1.0])


def dephase_offdiagonal(p: DephasingParams, t: float) -> float:
    """Surviving ``|00><11|`` coherence ``exp(-2 mu^2 B0^2 t)``."""
    if t < 0:
        raise ValidationError("t must be non-negative")
    return math.exp(-2.0 * p.rate * t)


def bell_density_matrix(p: DephasingParams, t: float, sign: int = 1) -> ComplexMatrix:
    """Trace-one density matrix of ``(|00> + sign |11>)/sqrt(2)`` after dephasing for ``t``."""
    if sign not in (1, -1):
        raise ValidationError("sign must be +1 or -1")
    coh = sign * dephase_offdiagonal(p, t)
    rho = np.zeros((4, 4), dtype=np.complex128)
    rho[0, 0] = rho[3, 3] = 0.5
    rho[0, 3] = rho[3, 0] = 0.5 * coh
    return rho


def bell_vector(sign: int = 1) -> np.ndarray:
    return normalize([1, 0, 0, sign])


def dephased_density(psi: ArrayLike, weights: ArrayLike, rate: float, t: float) -> ComplexMatrix:
    """Exact Gaussian average: ``rho_ij = psi_i psi_j^* exp(-(w_i - w_j)^2 rate t / 2)``.

    ``t = inf`` keeps only coherences between equal weights.
    """
    v = normalize(psi)
    w = np.asarray(weights, dtype=float)
    diff2 = (w[:, None] - w[None, :]) ** 2
    if math.isinf(t):
        damp = (np.abs(diff2) < 1e-12).astype(float)
    else:
        damp = np.exp(-0.5 * diff2 * rate * t)
    return np.outer(v, v.conj()) * damp


class Regime(str, Enum):
    ANALYTIC_INFINITE_TIME = "analytic_infinite_time"


def _ket(i: int, j: int) -> np.ndarray:
    v = np.zeros(16, dtype=np.complex128)
    v[4 * i + j] = 1.0
    return v


def degenerate_dephased_state(state: DegenerateBellState, regime: Regime | str = Regime.ANALYTIC_INFINITE_TIME) -> ComplexMatrix:
    """Long-time mixture left after dephasing, as a trace-one 16x16 density matrix.

    Reference mixtures: same-sublevel pairs of the ``|00>+|11>`` analogue
    become incoherent; for the ``|01>+|10>`` analogue each
    ``(|a_i b_j> + |a_j' b_i'>)`` pairing with equal Zeeman shift stays coherent.
    The ``|00>+|11>`` mixture also drops the coherence between the two
    zero-shift pairings, which the exact limit
    ``dephased_density(psi, weights, rate, inf)`` keeps.
    """
    if Regime(regime) is not Regime.ANALYTIC_INFINITE_TIME:
        raise ValidationError(f"unsupported regime {regime!r}")
    a1, a2, b1, b2 = state.a1, state.a2, state.b1, state.b2
    terms: list[np.ndarray] = []
    if state.kind is BellKind.PLUS_00_11:
        terms += [a1 * b1 * _ket(0, 0), a1 * b1 * _ket(2, 2), a2 * b2 * _ket(1, 1), a2 * b2 * _ket(3, 3)]
        terms += [a1 * b2 * _ket(0, 1) + a2 * b1 * _ket(1, 0), a1 * b2 * _ket(2, 3) + a2 * b1 * _ket(3, 2)]
    else:
        terms += [a1 * b1 * (_ket(0, 2) + _ket(2, 0)), a2 * b2 * (_ket(1, 3) + _ket(3, 1))]
        terms += [a1 * b2 * _ket(0, 3) + a2 * b1 * _ket(3, 0), a1 * b2 * _ket(2, 1) + a2 * b1 * _ket(1, 2)]
    rho = sum(np.outer(v, v.conj()) for v in terms)
    return rho / np.trace(rho).real


@dataclass(frozen=True)
class MCDephasingResult:
    t_grid: tuple[float, ...]
    rho: np.ndarray  # (n_t, dim, dim)
    stderr: np.ndarray  # (n_t, dim, dim) standard error of each entry
    n_traj: int
    seed: int
    weights: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False, default=None)

    def coherence(self, i: int, j: int) -> tuple[np.ndarray, np.ndarray]:
        """Decay factor of ``rho_ij`` relative to the initial state, with its standard error."""
        amp = self.psi[i] * np.conj(self.psi[j])
        if abs(amp) == 0:
            raise ValidationError(f"initial state has no ({i}, {j}) coherence")
        return self.rho[:, i, j] / amp, self.stderr[:, i, j] / abs(amp)


def _substeps(p: DephasingParams) -> list[int]:
    grid = np.asarray(p.t_grid)
    total = grid[-1]
    if total == 0:
        return []
    dt_nominal = total / p.n_steps
    return [max(1, math.ceil(seg / dt_nominal - 1e-9)) for seg in np.diff(grid)]


def mc_dephase(
    state: ArrayLike | DegenerateBellState | BellKind | str,
    p: DephasingParams,
    weights: ArrayLike | None = None,
    workers: int = 1,
) -> MCDephasingResult:
    """Average the phase-kicked projector over white-noise field trajectories.

    ``state`` is a :class:`DegenerateBellState` (16-dim, Lande weights), the
    string ``"bell_plus"``/``"bell_minus"`` (two-level qubits with weights 0, 1), or an
    explicit vector together with ``weights``.
    """
    if isinstance(state, DegenerateBellState):
        psi = state.vector()
        w = product_weights(sublevel_weights()) if weights is None else np.asarray(weights, float)
    elif isinstance(state, str) and state in ("bell_plus", "bell_minus"):
        psi = bell_vector(1 if state == "bell_plus" else -1)
        w = product_weights(QUBIT_WEIGHTS) if weights is None else np.asarray(weights, float)
    else:
        if weights is None:
            raise ValidationError("explicit state vectors need explicit weights")
        psi = normalize(state)
        w = np.asarray(weights, dtype=float)
    if w.shape != psi.shape:
        raise ValidationError("weights must match the state dimension")

    subs = _substeps(p)
    grid = np.asarray(p.t_grid)
    dts = [seg / n for seg, n in zip(np.diff(grid), subs)]
    if dts and max(dts) * p.rate > MAX_PHASE_STEP:
        raise ConfigurationError(
            f"time step too coarse: dt * mu^2 B0^2 = {max(dts) * p.rate:.3g} > {MAX_PHASE_STEP}"
        )
    diffs, inverse = np.unique(np.round(w[:, None] - w[None, :], 12), return_inverse=True)
    inverse = inverse.reshape(psi.size, psi.size)
    sigma = p.mu * p.B0

    def chunk(rng: np.random.Generator, size: int) -> np.ndarray:
        phi = np.zeros(size)
        s1 = np.zeros((grid.size, diffs.size), dtype=np.complex128)
        s1[0] = size
        for k, (n_sub, dt) in enumerate(zip(subs, dts), start=1):
            phi += sigma * math.sqrt(dt) * rng.standard_normal((n_sub, size)).sum(axis=0)
            s1[k] = np.exp(-1j * np.outer(phi, diffs)).sum(axis=0)
        return s1

    parts = map_chunks(chunk, p.n_traj, p.seed, workers)
    n = p.n_traj
    mean = np.sum(parts, axis=0) / n
    # each kick has unit modulus, so the per-sample variance is 1 - |mean|^2
    var = np.maximum(1.0 - np.abs(mean) ** 2, 0.0) * (n / (n - 1) if n > 1 else 0.0)
    coh = np.outer(psi, psi.conj())
    rho = coh[None] * mean[:, inverse]
    stderr = np.abs(coh)[None] * np.sqrt(var / n)[:, inverse]
    return MCDephasingResult(tuple(p.t_grid), rho, stderr, n, p.seed, w, psi)


LEVEL_OUTCOMES = ("gg", "ge", "eg", "ee")


def level_measurement_stats(rho: ArrayLike) -> dict[str, float]:
    """Joint ground/excited outcome probabilities, summing over degenerate sublevels."""
    m = as_matrix(rho)
    tr = np.trace(m)
    if abs(tr - 1) > 1e-10:
        raise ValidationError(f"density matrix trace {tr:.12g} differs from 1")
    dim = m.shape[0]
    if dim == 16:
        per_atom = 4
    elif dim == 4:
        per_atom = 2
    else:
        raise ValidationError("expected a 4x4 (qubit pair) or 16x16 (degenerate pair) density matrix")
    half = per_atom // 2
    probs = dict.fromkeys(LEVEL_OUTCOMES, 0.0)
    pops = np.real(np.diag(m))
    for idx, pop in enumerate(pops):
        i, j = divmod(idx, per_atom)
        key = ("e" if i >= half else "g") + ("e" if j >= half else "g")
        probs[key] += float(pop)
    return probs
