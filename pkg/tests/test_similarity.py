import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agecontrast.errors import DegenerateInputError, InvalidArgumentError
from agecontrast.similarity import (
    SimilarityConfig,
    normalize_rows,
    normalize_rows_backward,
    similarity_matrix,
    validate_embeddings,
)


def test_three_four_five():
    np.testing.assert_allclose(normalize_rows(np.array([[3.0, 4.0]])), [[0.6, 0.8]])


def test_axis_vectors():
    got = normalize_rows(np.array([[1.0, 0.0], [0.0, 2.0]]))
    np.testing.assert_allclose(got, [[1.0, 0.0], [0.0, 1.0]])


def test_zero_row_error_names_row():
    with pytest.raises(DegenerateInputError, match="row 1"):
        normalize_rows(np.array([[1.0, 1.0], [0.0, 0.0]]))


def test_identical_rows_off_diagonal():
    e = normalize_rows(np.ones((3, 2)))
    s = similarity_matrix(e, SimilarityConfig(temperature=0.1))
    np.testing.assert_allclose(s, 10.0 * np.ones((3, 3)), atol=1e-12)


def test_orthogonal_rows():
    e = np.array([[1.0, 0.0], [0.0, 1.0]])
    s = similarity_matrix(e, SimilarityConfig(temperature=0.37))
    assert s[0, 1] == pytest.approx(0.0, abs=1e-15)


def test_antipodal_rows():
    e = np.array([[1.0, 0.0], [-1.0, 0.0]])
    s = similarity_matrix(e, SimilarityConfig(temperature=0.1))
    assert s[0, 1] == pytest.approx(-10.0, abs=1e-12)


def test_symmetry_and_bound():
    rng = np.random.default_rng(5)
    e = normalize_rows(rng.normal(size=(9, 4)))
    tau = 0.25
    s = similarity_matrix(e, SimilarityConfig(temperature=tau))
    np.testing.assert_allclose(s, s.T, atol=0)
    assert np.max(np.abs(s)) <= 1.0 / tau + 1e-9


def test_rotation_invariance():
    rng = np.random.default_rng(11)
    e = normalize_rows(rng.normal(size=(6, 5)))
    q, _ = np.linalg.qr(rng.normal(size=(5, 5)))
    cfg = SimilarityConfig(temperature=0.1)
    np.testing.assert_allclose(
        similarity_matrix(e, cfg), similarity_matrix(e @ q, cfg), atol=1e-9
    )


def test_validate_embeddings_rejects_bad_shapes():
    with pytest.raises(InvalidArgumentError):
        validate_embeddings(np.ones((1, 4)))
    with pytest.raises(InvalidArgumentError):
        validate_embeddings(np.ones((4, 1)))
    with pytest.raises(InvalidArgumentError):
        validate_embeddings(np.ones((4,)))


def test_validate_embeddings_rejects_non_unit_rows():
    e = np.ones((3, 3))
    with pytest.raises(InvalidArgumentError):
        validate_embeddings(e)


def test_invalid_temperature():
    with pytest.raises(InvalidArgumentError):
        SimilarityConfig(temperature=0.0)
    with pytest.raises(InvalidArgumentError):
        SimilarityConfig(temperature=-0.1)


def test_normalization_jacobian_against_finite_differences():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(4, 3))
    upstream = rng.normal(size=(4, 3))
    analytic = normalize_rows_backward(x, upstream)
    h = 1e-6
    numeric = np.zeros_like(x)
    for i in range(x.shape[0]):
        for j in range(x.shape[1]):
            plus = x.copy()
            plus[i, j] += h
            minus = x.copy()
            minus[i, j] -= h
            diff = (normalize_rows(plus) - normalize_rows(minus)) / (2 * h)
            numeric[i, j] = np.sum(upstream * diff)
    np.testing.assert_allclose(analytic, numeric, atol=1e-6)


@given(seed=st.integers(0, 10_000), tau=st.floats(min_value=0.01, max_value=10))
@settings(max_examples=60, deadline=None)
def test_rows_unit_norm_after_normalize(seed, tau):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(5, 4)) + 0.1
    e = normalize_rows(x)
    np.testing.assert_allclose(np.linalg.norm(e, axis=1), 1.0, atol=1e-12)
    s = similarity_matrix(e, SimilarityConfig(temperature=tau))
    assert np.all(np.abs(s) <= 1.0 / tau + 1e-9)
