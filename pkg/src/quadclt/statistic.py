"""Periodogram and the centred integrated periodogram ``F_n``.

``F_n`` is computed two ways: exactly as the Toeplitz quadratic form
``n^{-1/2} (X' G_n X - tr(G_n Gamma_n))`` (canonical), and in the frequency
domain by integrating ``g * I_n`` with the dyadic quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .quadrature import DEFAULT_QUAD, QuadratureSpec, gauss_legendre, graded_breaks, integrate
from .simulate import Path
from .spectra import CovSequence, WeightFourier, singular_points
from .toeplitz import toeplitz_matvec

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class StatisticResult:
    f_n: float
    quad_form: float
    centering: float
    route: str


def _values(x) -> np.ndarray:
    return np.asarray(x.x if isinstance(x, Path) else x, dtype=float)


def dft_ordinate(x, lam):
    """``d_n(lam) = (2 pi n)^{-1/2} sum_t x_t e^{i t lam}``, vectorised in ``lam``."""
    x = _values(x)
    n = x.size
    lam = np.asarray(lam, dtype=float)
    flat = lam.ravel()
    t = np.arange(1, n + 1, dtype=float)
    out = np.empty(flat.size, dtype=complex)
    step = max(1, 2_000_000 // max(n, 1))
    for i in range(0, flat.size, step):
        out[i:i + step] = np.exp(1j * np.outer(flat[i:i + step], t)) @ x
    out /= math.sqrt(TWO_PI * n)
    return out.reshape(lam.shape) if lam.ndim else out[0]


def _is_fourier_grid(grid: np.ndarray, n: int) -> bool:
    if grid.ndim != 1 or grid.size != n:
        return False
    return np.allclose(grid, TWO_PI * np.arange(n) / n, rtol=0.0, atol=1e-12)


def periodogram(x, grid) -> np.ndarray:
    """``I_n = |d_n|^2`` on ``grid``; uses the FFT on the Fourier grid ``2 pi j / n``."""
    x = _values(x)
    n = x.size
    grid = np.asarray(grid, dtype=float)
    if _is_fourier_grid(grid, n):
        # sum_t x_t e^{i t lam_j} = e^{i lam_j} * n * ifft(x)_j
        return np.abs(n * np.fft.ifft(x)) ** 2 / (TWO_PI * n)
    return np.abs(dft_ordinate(x, grid)) ** 2


def periodogram_nodes(x, quad: QuadratureSpec = DEFAULT_QUAD, levels: int = 64):
    """Quadrature nodes on (0, pi) together with ``I_n`` evaluated there.

    Returns ``(lam, w, I)`` such that ``int_{-pi}^{pi} h I_n ~ 2 sum w h(lam) I``
    for even ``h``. Regular panels have width ``pi / n`` so the trigonometric
    polynomial ``I_n`` is resolved; their nodes share a common offset per
    Gauss point, which turns the evaluation into one FFT per point. The first
    panel is refined dyadically toward the origin (where weights may be
    singular) and evaluated directly.
    """
    x = _values(x)
    n = x.size
    panels = max(n, 8)
    h = math.pi / panels
    u, v = gauss_legendre(quad.points_per_panel)
    big = 2 * panels
    t = np.arange(1, n + 1)
    j = np.arange(1, panels)
    lam_reg = h * (j[None, :] + u[:, None])  # (points, panels-1)
    pad = np.zeros((u.size, big), dtype=complex)
    pad[:, 1:n + 1] = x[None, :] * np.exp(1j * h * np.outer(u, t))
    sums = big * np.fft.ifft(pad, axis=1)[:, 1:panels]
    i_reg = np.abs(sums) ** 2 / (TWO_PI * n)
    edges = h * np.exp2(-np.arange(levels + 1.0))[::-1]
    lo = edges[:-1, None]
    wd = np.diff(edges)[:, None]
    lam_dy = (lo + wd * u).ravel()
    w_dy = (wd * v).ravel()
    i_dy = np.abs(dft_ordinate(x, lam_dy)) ** 2
    lam = np.concatenate([lam_dy, lam_reg.T.ravel()])
    w = np.concatenate([w_dy, np.tile(h * v, panels - 1)])
    vals = np.concatenate([i_dy, i_reg.T.ravel()])
    return lam, w, vals


def mean_periodogram(model, lam: float, n: int, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``E I_n(lam) = int f(w) Phi_n(lam - w) dw`` by quadrature."""
    from .kernels import fejer

    def integrand(w):
        return model(w) * fejer(n, lam - w)

    sing = singular_points(model)
    breaks = [lam] + (graded_breaks(0.0, abs(lam)) if sing else [])
    return float(integrate(integrand, -math.pi, math.pi, singular=sing, breaks=breaks,
                           max_width=math.pi / max(n, 4), quad=quad))


def centering_term(cov: CovSequence, wf: WeightFourier, n: int) -> float:
    """``tr(G_n Gamma_n) = sum_{|k|<n} (n - |k|) r(k) gamma_g(k)``."""
    k = np.arange(n)
    mult = np.where(k == 0, n, 2 * (n - k))
    return float(np.sum(mult * cov.r[:n] * wf.gamma[:n]))


def quadratic_form(x: np.ndarray, wf: WeightFourier) -> float:
    return float(x @ toeplitz_matvec(wf.gamma[:x.size], x))


def integrated_statistic(x, cov: CovSequence, wf: WeightFourier) -> StatisticResult:
    x = _values(x)
    n = x.size
    if cov.K < n - 1 or wf.K < n - 1:
        raise DomainError(f"sequences too short for n={n}: K_cov={cov.K}, K_weight={wf.K}")
    q = quadratic_form(x, wf)
    c = centering_term(cov, wf, n)
    return StatisticResult((q - c) / math.sqrt(n), q, c, "time-domain")


def integrated_statistic_batch(paths: np.ndarray, cov: CovSequence, wf: WeightFourier) -> np.ndarray:
    """``F_n`` for every row of ``paths`` (vectorised time-domain route)."""
    n = paths.shape[1]
    c = centering_term(cov, wf, n)
    if np.all(wf.gamma[1:n] == 0.0):
        q = wf.gamma[0] * np.einsum("ij,ij->i", paths, paths)
    else:
        q = np.einsum("ij,ji->i", paths, toeplitz_matvec(wf.gamma[:n], paths.T))
    return (q - c) / math.sqrt(n)


def integrated_statistic_freq(x, weight, cov: CovSequence, wf: WeightFourier,
                              quad: QuadratureSpec = DEFAULT_QUAD) -> StatisticResult:
    """Frequency-domain route: ``sqrt(n) [int g I_n - tr(G Gamma)/n]``."""
    x = _values(x)
    n = x.size
    if cov.K < n - 1 or wf.K < n - 1:
        raise DomainError(f"sequences too short for n={n}")
    lam, w, vals = periodogram_nodes(x, quad)
    integral = 2.0 * float(np.sum(w * weight(lam) * vals))
    c = centering_term(cov, wf, n)
    return StatisticResult(math.sqrt(n) * (integral - c / n), n * integral, c, "frequency-domain")
