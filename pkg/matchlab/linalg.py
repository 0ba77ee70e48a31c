"""
Linear Algebra over F_p
Thin wrappers around galois GF(p) arrays; inputs and outputs are int64 numpy arrays
"""
from functools import lru_cache

import galois
import numpy as np


@lru_cache(maxsize=None)
def prime_field(p: int):
    return galois.GF(p)


def as_matrix(rows, ncols: int) -> np.ndarray:
    """Stack rows into an int64 (k, ncols) array, empty input allowed"""
    matrix = np.asarray(rows, dtype=np.int64)
    if matrix.size == 0:
        return np.zeros((0, ncols), dtype=np.int64)
    return matrix.reshape(-1, ncols)


def rref(rows, p: int, ncols: int) -> np.ndarray:
    """Reduced row-echelon form with zero rows dropped"""
    matrix = as_matrix(rows, ncols) % p
    if matrix.shape[0] == 0 or ncols == 0:
        return np.zeros((0, ncols), dtype=np.int64)
    reduced = np.array(prime_field(p)(matrix).row_reduce(), dtype=np.int64)
    return reduced[reduced.any(axis=1)]


def rank(rows, p: int, ncols: int) -> int:
    return rref(rows, p, ncols).shape[0]


def pivot_columns(reduced: np.ndarray) -> tuple:
    return tuple(int(np.flatnonzero(row)[0]) for row in reduced)


def null_space(matrix, p: int, ncols: int) -> np.ndarray:
    """Basis (as rows, reduced) of {x : matrix @ x = 0}"""
    matrix = as_matrix(matrix, ncols) % p
    if ncols == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if matrix.shape[0] == 0 or not matrix.any():
        return np.eye(ncols, dtype=np.int64)
    basis = np.array(prime_field(p)(matrix).null_space(), dtype=np.int64)
    return as_matrix(basis, ncols)


def left_kernel(matrix, p: int, nrows: int) -> np.ndarray:
    """Basis of {x : x @ matrix = 0}"""
    matrix = np.asarray(matrix, dtype=np.int64).reshape(nrows, -1)
    return null_space(matrix.T, p, nrows)


def intersect_rows(U: np.ndarray, V: np.ndarray, p: int, ncols: int) -> np.ndarray:
    """Reduced basis of span(U) ∩ span(V): alpha @ U = beta @ V from the kernel of [U; -V]^T"""
    if U.shape[0] == 0 or V.shape[0] == 0:
        return np.zeros((0, ncols), dtype=np.int64)
    stacked = np.vstack([U, (-V) % p])
    kernel = left_kernel(stacked, p, stacked.shape[0])
    if kernel.shape[0] == 0:
        return np.zeros((0, ncols), dtype=np.int64)
    alphas = kernel[:, :U.shape[0]]
    return rref(alphas @ U % p, p, ncols)


def coordinates(rows: np.ndarray, vector, p: int):
    """c with c @ rows = vector for independent rows, or None outside the span"""
    k, ncols = rows.shape
    vector = np.asarray(vector, dtype=np.int64) % p
    if k == 0:
        return np.zeros(0, dtype=np.int64) if not vector.any() else None
    augmented = np.column_stack([rows.T, vector])
    reduced = rref(augmented, p, k + 1)
    if k in pivot_columns(reduced):
        return None
    solution = np.zeros(k, dtype=np.int64)
    for row, col in zip(reduced, pivot_columns(reduced)):
        solution[col] = row[k]
    return solution


def in_span(rows: np.ndarray, vector, p: int) -> bool:
    return coordinates(rows, vector, p) is not None


def inverse(matrix, p: int) -> np.ndarray:
    square = np.asarray(matrix, dtype=np.int64) % p
    return np.array(np.linalg.inv(prime_field(p)(square)), dtype=np.int64)


def matrix_power(matrix: np.ndarray, e: int, p: int) -> np.ndarray:
    result = np.eye(matrix.shape[0], dtype=np.int64)
    base = matrix % p
    while e:
        if e & 1:
            result = result @ base % p
        base = base @ base % p
        e >>= 1
    return result
