"""Symmetric Toeplitz products through circulant embedding."""
from __future__ import annotations

import numpy as np
from scipy.linalg import toeplitz


def circulant_symbol(column: np.ndarray) -> np.ndarray:
    """FFT of the length-2n circulant that embeds the symmetric Toeplitz ``column``."""
    n = column.size
    ext = np.zeros(2 * n)
    ext[:n] = column
    ext[n + 1:] = column[1:][::-1]
    return np.fft.rfft(ext)


def toeplitz_matvec(column: np.ndarray, x: np.ndarray, symbol: np.ndarray | None = None) -> np.ndarray:
    """``T x`` for the symmetric Toeplitz ``T`` with first column ``column``.

    ``x`` may be 2-D with vectors stored along axis 0 (columns).
    """
    n = column.size
    if x.shape[0] != n:
        raise ValueError(f"length mismatch: matrix {n}, vector {x.shape[0]}")
    if symbol is None:
        symbol = circulant_symbol(column)
    sym = symbol if x.ndim == 1 else symbol[:, None]
    y = np.fft.irfft(sym * np.fft.rfft(x, n=2 * n, axis=0), n=2 * n, axis=0)
    return y[:n]


def dense(column: np.ndarray) -> np.ndarray:
    return toeplitz(np.asarray(column, dtype=float))
