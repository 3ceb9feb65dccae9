"""Exact finite-n law of ``F_n`` through Toeplitz traces.

``F_n = n^{-1/2}(X'GX - tr(G Gamma))`` with ``X ~ N(0, Gamma)`` is equal in law
to ``sum_i lambda_i (xi_i^2 - 1)`` where ``sqrt(n) lambda_i`` are the
eigenvalues of ``Gamma^{1/2} G Gamma^{1/2}``. Hence

* ``V_n = Var F_n = (2/n) tr((Gamma G)^2)``
* ``kappa_4 = (48/n^2) tr((Gamma G)^4)``.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from pathlib import Path as FsPath

import numpy as np
from scipy import linalg

from .errors import DomainError, SizeError
from .spectra import CovSequence, WeightFourier
from .toeplitz import circulant_symbol, dense, toeplitz_matvec

DEFAULT_DENSE_CAP = 2048
DENSE_CAP_ENV = "QUADCLT_DENSE_CAP"
PSD_TOL = 1e-10


def dense_cap(override: int | None = None) -> int:
    if override is not None:
        return int(override)
    raw = os.environ.get(DENSE_CAP_ENV)
    if raw is None:
        return DEFAULT_DENSE_CAP
    try:
        return int(raw)
    except ValueError:
        raise DomainError(f"{DENSE_CAP_ENV} must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class ToeplitzPair:
    n: int
    gamma_mat: np.ndarray
    weight_mat: np.ndarray

    @classmethod
    def build(cls, cov: CovSequence, wf: WeightFourier, n: int, cap: int | None = None) -> "ToeplitzPair":
        _check_sizes(cov, wf, n)
        if n > dense_cap(cap):
            raise SizeError(f"n={n} exceeds the dense cap {dense_cap(cap)}")
        return cls(n, dense(cov.r[:n]), dense(wf.gamma[:n]))

    @property
    def weight_is_identity_multiple(self) -> bool:
        return self.n == 1 or not np.any(self.weight_mat[0, 1:])


def _check_sizes(cov: CovSequence, wf: WeightFourier, n: int) -> None:
    if n < 1:
        raise DomainError("n must be positive")
    if cov.K < n - 1 or wf.K < n - 1:
        raise DomainError(f"sequences too short for n={n}: K_cov={cov.K}, K_weight={wf.K}")


def _product(pair: ToeplitzPair) -> np.ndarray:
    if pair.weight_is_identity_multiple:
        return pair.gamma_mat * pair.weight_mat[0, 0]
    return pair.gamma_mat @ pair.weight_mat


def _product_fft(cov: CovSequence, wf: WeightFourier, n: int, block: int = 512) -> np.ndarray:
    # Gamma G column block by column block, each product a batch of Toeplitz matvecs
    out = np.empty((n, n))
    sym_g = circulant_symbol(np.asarray(wf.gamma[:n]))
    sym_r = circulant_symbol(np.asarray(cov.r[:n]))
    eye = np.eye(n)
    for j in range(0, n, block):
        cols = toeplitz_matvec(wf.gamma[:n], eye[:, j:j + block], sym_g)
        out[:, j:j + block] = toeplitz_matvec(cov.r[:n], cols, sym_r)
    return out


def variance_exact(cov: CovSequence, wf: WeightFourier, n: int, cap: int | None = None) -> float:
    """``(2/n) tr((Gamma_n G_n)^2)``.

    Dense products up to the cap; above it ``Gamma G`` is assembled column
    block by column block through FFT Toeplitz products, which stays exact.
    """
    _check_sizes(cov, wf, n)
    if n <= dense_cap(cap):
        m = _product(ToeplitzPair.build(cov, wf, n, cap))
    else:
        m = _product_fft(cov, wf, n)
    return 2.0 / n * float(np.sum(m * m.T))


def _sym_factor(gamma_mat: np.ndarray) -> np.ndarray:
    """A matrix ``L`` with ``L L' = Gamma``; eigenvalues of ``L' G L`` equal those of ``Gamma^{1/2} G Gamma^{1/2}``."""
    try:
        return linalg.cholesky(gamma_mat, lower=True, check_finite=False)
    except linalg.LinAlgError:
        w, v = linalg.eigh(gamma_mat, check_finite=False)
        if w.min() < -PSD_TOL * w.max():
            raise DomainError(f"covariance matrix not positive semidefinite (min eig {w.min():.3e})") from None
        return v * np.sqrt(np.clip(w, 0.0, None))


def scaled_eigenvalues(cov: CovSequence, wf: WeightFourier, n: int, cap: int | None = None) -> np.ndarray:
    """Eigenvalues ``mu_i`` of ``Gamma^{1/2} G Gamma^{1/2}``."""
    pair = ToeplitzPair.build(cov, wf, n, cap)
    if pair.weight_is_identity_multiple:
        ev = linalg.eigvalsh(pair.gamma_mat, check_finite=False)
        if ev.min() < -PSD_TOL * ev.max():
            raise DomainError(f"covariance matrix not positive semidefinite (min eig {ev.min():.3e})")
        return ev * pair.weight_mat[0, 0]
    low = _sym_factor(pair.gamma_mat)
    core = low.T @ pair.weight_mat @ low
    return linalg.eigvalsh(0.5 * (core + core.T), check_finite=False)


def kappa4_exact(cov: CovSequence, wf: WeightFourier, n: int, cap: int | None = None) -> float:
    mu = scaled_eigenvalues(cov, wf, n, cap)
    return 48.0 / n ** 2 * float(np.sum(mu ** 4))


@dataclass(frozen=True)
class TraceEstimate:
    value: float
    se: float
    probes: int
    approximate: bool = True


def kappa4_hutchinson(cov: CovSequence, wf: WeightFourier, n: int, probes: int = 256,
                      seed: int = 0) -> TraceEstimate:
    """Stochastic estimate of ``kappa_4`` with Rademacher probes ``z``.

    ``E[z' (Gamma G)^4 z] = tr((Gamma G)^4)``; each probe costs eight FFT
    Toeplitz products, so this scales to ``n`` beyond the dense cap.
    """
    _check_sizes(cov, wf, n)
    if probes < 2:
        raise DomainError("need at least 2 probes")
    rng = np.random.Generator(np.random.PCG64(seed))
    z = rng.choice(np.array([-1.0, 1.0]), size=(n, probes))
    sym_g = circulant_symbol(np.asarray(wf.gamma[:n]))
    sym_r = circulant_symbol(np.asarray(cov.r[:n]))
    y = z
    for _ in range(4):
        y = toeplitz_matvec(cov.r[:n], toeplitz_matvec(wf.gamma[:n], y, sym_g), sym_r)
    samples = 48.0 / n ** 2 * np.einsum("ij,ij->j", z, y)
    return TraceEstimate(float(samples.mean()), float(samples.std(ddof=1) / math.sqrt(probes)), probes)


@dataclass(frozen=True)
class ChiSquareWeights:
    lambda_i: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lambda_i, dtype=float)
        lam = lam[np.argsort(-np.abs(lam), kind="stable")]
        lam.setflags(write=False)
        object.__setattr__(self, "lambda_i", lam)

    @property
    def variance(self) -> float:
        return 2.0 * float(np.sum(self.lambda_i ** 2))

    @property
    def kappa4(self) -> float:
        return 48.0 * float(np.sum(self.lambda_i ** 4))


def chisquare_weights(cov: CovSequence, wf: WeightFourier, n: int, cap: int | None = None) -> ChiSquareWeights:
    return ChiSquareWeights(scaled_eigenvalues(cov, wf, n, cap) / math.sqrt(n))


@dataclass(frozen=True)
class BoundReport:
    n: int
    V_n: float
    sigma0_sq: float
    kappa4: float
    contraction_sq: float
    bound: float
    d: float


def stein_bound(V_n: float, kappa4: float, sigma0_sq: float, n: int = 0, d: float = float("nan")) -> BoundReport:
    """``sqrt((sigma0^2 - V_n)^2 + kappa4/48)``, reported with unit constant."""
    if kappa4 < 0:
        raise DomainError("kappa4 must be nonnegative")
    contraction = kappa4 / 48.0
    bound = math.sqrt((sigma0_sq - V_n) ** 2 + contraction)
    return BoundReport(n, V_n, sigma0_sq, kappa4, contraction, bound, d)


BOUND_HEADER = ["n", "V_n", "sigma0_sq", "kappa4", "contraction_sq", "bound"]


def write_bound_csv(reports, dest, extra: dict | None = None) -> None:
    extra = extra or {}
    with open(FsPath(dest), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BOUND_HEADER + list(extra))
        for r in reports:
            w.writerow([r.n] + [f"{v:.15g}" for v in (r.V_n, r.sigma0_sq, r.kappa4, r.contraction_sq, r.bound)]
                       + list(extra.values()))
