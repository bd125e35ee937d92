import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_hermitian, random_unitary, taylor_expm
from dqlab.errors import ValidationError
from dqlab.matcore import (
    as_hermitian,
    expm_generator,
    normalize,
    phase_distance,
    require_unitary,
    tensor,
    unitarity_error,
)


def test_expm_matches_taylor_oracle(rng):
    for n in (2, 4, 16):
        h = random_hermitian(n, rng)
        t = rng.uniform(-3, 3)
        np.testing.assert_allclose(expm_generator(h, t), taylor_expm(-1j * h * t), atol=1e-11)


def test_expm_hbar_scaling(rng):
    h = random_hermitian(4, rng)
    np.testing.assert_allclose(expm_generator(h, 2.0, hbar=2.0), expm_generator(h, 1.0), atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-10, 10))
def test_expm_is_unitary(seed, t):
    h = random_hermitian(4, np.random.default_rng(seed))
    assert unitarity_error(expm_generator(h, t)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-5, 5), st.floats(-5, 5))
def test_expm_group_law(seed, s, t):
    h = random_hermitian(3, np.random.default_rng(seed))
    np.testing.assert_allclose(expm_generator(h, s) @ expm_generator(h, t), expm_generator(h, s + t), atol=1e-10)


def test_non_hermitian_rejected():
    with pytest.raises(ValidationError):
        as_hermitian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValidationError):
        expm_generator(np.ones((2, 3)), 1.0)


def test_phase_distance_ignores_global_phase(rng):
    u = random_unitary(4, rng)
    assert phase_distance(u, np.exp(0.7j) * u) < 1e-14
    assert phase_distance(u, random_unitary(4, rng)) > 0.1


def test_tensor_mixed_product(rng):
    a, b, c, d = (random_unitary(2, rng) for _ in range(4))
    np.testing.assert_allclose(tensor(a, b) @ tensor(c, d), tensor(a @ c, b @ d), atol=1e-13)


def test_normalize_and_zero_vector():
    np.testing.assert_allclose(np.linalg.norm(normalize([3, 4j])), 1.0)
    with pytest.raises(ValidationError):
        normalize([0, 0])


def test_require_unitary():
    require_unitary(np.eye(3))
    with pytest.raises(ValidationError):
        require_unitary(np.diag([1.0, 1.1]))


def test_phase_distance_examples(rng):
    x = np.array([[0, 1], [1, 0]])
    assert phase_distance(np.eye(2), x) == pytest.approx(2.0, abs=1e-14)
    for _ in range(100):
        u = random_unitary(4, rng)
        assert phase_distance(u, np.exp(1j * rng.uniform(0, 2 * np.pi)) * u) <= 1e-12
