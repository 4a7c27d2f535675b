"""Shared helpers for the test suite."""

from pathlib import Path

import numpy as np
import pytest

from seqot import CostKind, build_cost_matrix

DATA_DIR = Path(__file__).parent / "data"


def unit_rows(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """Random points on the unit sphere, rows of shape (n, d)."""
    X = rng.normal(size=(n, d))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def random_cosine_cost(rng: np.random.Generator, n: int, m: int, d: int = 4):
    return build_cost_matrix(
        unit_rows(rng, n, d), unit_rows(rng, m, d), CostKind.COSINE
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
