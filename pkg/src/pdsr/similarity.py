"""Cosine similarity helpers used by both fusion and pose-regulated scoring."""

from __future__ import annotations

import numpy as np

from .errors import ZeroVectorError


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two vectors, in [-1, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ZeroVectorError("cosine similarity is undefined for the all-zero vector")
    return float(np.dot(a, b) / (na * nb))


def unit_rows(matrix: np.ndarray) -> np.ndarray:
    """Row-normalize a matrix; all-zero rows are left as zeros."""
    matrix = np.asarray(matrix, dtype=np.float64)
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)
    return matrix / safe


def cosine_matrix(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Pairwise cosine similarities between the rows of two matrices."""
    left = np.asarray(left, dtype=np.float64)
    right = np.asarray(right, dtype=np.float64)
    ln = np.linalg.norm(left, axis=1)
    rn = np.linalg.norm(right, axis=1)
    if (ln == 0.0).any() or (rn == 0.0).any():
        raise ZeroVectorError("cosine similarity is undefined for the all-zero vector")
    return (left / ln[:, None]) @ (right / rn[:, None]).T
