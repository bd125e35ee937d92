"""Average gate fidelity between unitaries.

The closed form ``(n + |Tr(target^dag actual)|^2) / (n (n + 1))`` is checked
against a Haar-random pure-state Monte Carlo estimate that shares no code with it.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from dqlab._parallel import map_chunks
from dqlab.errors import ValidationError
from dqlab.matcore import require_unitary
from dqlab.singleatom import DEGENERATE_HADAMARD, PhysParams, hadamard_gate

DEFAULT_SEED = 0xD5EED
MIN_MC_SAMPLES = 1000
MAX_FIT_R = 0.03


@dataclass(frozen=True)
class FidelityReport:
    closed_form: float
    mc_estimate: float
    mc_stderr: float
    n_samples: int
    seed: int


def _overlap_operator(target: ArrayLike, actual: ArrayLike, n: int | None) -> np.ndarray:
    t = require_unitary(target, name="target")
    a = require_unitary(actual, name="actual")
    if t.shape != a.shape:
        raise ValidationError(f"shape mismatch: {t.shape} vs {a.shape}")
    if n is not None and t.shape[0] != n:
        raise ValidationError(f"declared dimension {n} does not match matrices of size {t.shape[0]}")
    return t.conj().T @ a


def avg_fidelity_closed(target: ArrayLike, actual: ArrayLike, n: int | None = None) -> float:
    """Average fidelity of ``actual`` against the ideal ``target`` over pure states."""
    m = _overlap_operator(target, actual, n)
    dim = m.shape[0]
    return float((dim + abs(np.trace(m)) ** 2) / (dim * (dim + 1)))


def haar_states(rng: np.random.Generator, size: int, n: int) -> np.ndarray:
    """``size`` Haar-random pure states of dimension ``n``, one per row."""
    z = rng.standard_normal((size, n)) + 1j * rng.standard_normal((size, n))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def avg_fidelity_mc(
    target: ArrayLike,
    actual: ArrayLike,
    n_samples: int,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> tuple[float, float]:
    """Monte Carlo estimate of the average fidelity and its standard error.

    Averages ``|<psi| target^dag actual |psi>|^2`` over Haar-random states.
    Deterministic for a fixed seed regardless of ``workers``.
    """
    if n_samples < MIN_MC_SAMPLES:
        raise ValidationError(f"n_samples must be at least {MIN_MC_SAMPLES}, got {n_samples}")
    m = _overlap_operator(target, actual, None)
    dim = m.shape[0]

    def chunk(rng: np.random.Generator, size: int) -> tuple[float, float]:
        psi = haar_states(rng, size, dim)
        vals = np.abs(np.einsum("si,ij,sj->s", psi.conj(), m, psi)) ** 2
        return float(vals.sum()), float((vals * vals).sum())

    parts = np.array(map_chunks(chunk, n_samples, seed, workers))
    s1, s2 = parts.sum(axis=0)
    mean = s1 / n_samples
    var = max(s2 / n_samples - mean * mean, 0.0) * n_samples / (n_samples - 1)
    return float(mean), float(math.sqrt(var / n_samples))


def fidelity_report(
    target: ArrayLike, actual: ArrayLike, n_samples: int = 200_000, seed: int = DEFAULT_SEED, workers: int = 1
) -> FidelityReport:
    est, err = avg_fidelity_mc(target, actual, n_samples, seed, workers)
    return FidelityReport(avg_fidelity_closed(target, actual), est, err, n_samples, seed)


def fidelity_series_coefficient(omega: float, Omega: float, hbar: float = 1.0) -> float:
    """Coefficient ``c2`` of the quadratic loss ``F = 1 - c2 r^2`` of the Hadamard gate."""
    if omega <= 0 or Omega <= 0:
        raise ValidationError("omega and Omega must be positive")
    a, b = hbar * Omega / 2, hbar * omega / 2
    pi = math.pi
    num = 458 * pi**2 * a * a + 2 * (20 - 7 * pi) * pi * a * b + (8 - 4 * pi + pi**2) * b * b
    return num / (180 * b * b)


def hadamard_fidelity(p: PhysParams) -> float:
    return avg_fidelity_closed(DEGENERATE_HADAMARD, hadamard_gate(p))


def fit_quadratic_loss(
    p_base: PhysParams, r_values: Sequence[float], theta: float | None = None
) -> tuple[float, float]:
    """Least-squares fit of ``1 - F(r) = c r^2`` through the origin.

    Returns the fitted ``c`` and the largest relative residual over the points.
    """
    rs = np.asarray(r_values, dtype=float)
    if rs.ndim != 1 or np.unique(rs[rs > 0]).size < 3:
        raise ValidationError("need at least three distinct positive r values")
    if np.any(rs < 0) or np.any(rs > MAX_FIT_R):
        raise ValidationError(f"r values must lie in [0, {MAX_FIT_R}]")
    base = p_base if theta is None else PhysParams(
        Omega=p_base.Omega, omega=p_base.omega, r=p_base.r, theta=theta, g_s=p_base.g_s, hbar=p_base.hbar
    )
    loss = np.array([1.0 - hadamard_fidelity(base.with_r(float(r))) for r in rs])
    x = rs**2
    c = float(x @ loss / (x @ x))
    mask = loss > 0
    resid = np.abs(loss[mask] - c * x[mask]) / loss[mask]
    return c, float(resid.max()) if resid.size else 0.0
