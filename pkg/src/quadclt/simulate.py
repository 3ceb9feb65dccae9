"""Exact simulation of stationary Gaussian paths by circulant embedding.

The Toeplitz covariance of ``X_1..X_n`` is embedded in a circulant of size
``m`` (a power of two); its eigenvalues come from one FFT and a Gaussian
vector with that circulant covariance is produced by a second FFT. The first
``n`` coordinates then have exactly the requested covariance.
"""
from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass
from pathlib import Path as FsPath

import numpy as np

from .errors import DomainError, NegativeEmbedding
from .spectra import CovSequence

TOL_EMBED = 1e-12
MAX_DOUBLINGS = 4
_MASK64 = (1 << 64) - 1


def mix64(master: int, index: int) -> int:
    """SplitMix64 finaliser applied to ``master + (index + 1) * golden``.

    Gives well separated 64-bit seeds for replicate ``index`` of a run.
    """
    z = (int(master) + (int(index) + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def fingerprint(cov: CovSequence) -> str:
    return hashlib.sha256(np.ascontiguousarray(cov.r).tobytes()).hexdigest()[:16]


@dataclass(frozen=True)
class SamplerPlan:
    n: int
    m: int
    circ_eigs: np.ndarray
    cov_hash: str

    @property
    def amplitude(self) -> np.ndarray:
        return np.sqrt(self.circ_eigs / self.m)


@dataclass(frozen=True)
class Path:
    x: np.ndarray
    seed: int
    plan_ref: str


def _first_row(r: np.ndarray, n: int, m: int) -> np.ndarray:
    # lags beyond n-1 are filled with the true covariances when available
    half = m // 2
    lags = np.zeros(half + 1)
    top = min(r.size - 1, half)
    lags[:top + 1] = r[:top + 1]
    return np.concatenate([lags, lags[1:half][::-1]])


def plan_circulant(cov: CovSequence, n: int, tol_embed: float = TOL_EMBED,
                   max_doublings: int = MAX_DOUBLINGS) -> SamplerPlan:
    """Build a circulant embedding of ``Toeplitz(r(0..n-1))``.

    Small negative eigenvalues (relative size below ``tol_embed``) are
    clamped to zero; larger ones trigger up to ``max_doublings`` doublings of
    the embedding before :class:`NegativeEmbedding` is raised.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if cov.K < n - 1:
        raise DomainError(f"covariance has K={cov.K} < n-1={n - 1}")
    m = 2
    while m < 2 * (n - 1):
        m *= 2
    worst = 0.0
    for _ in range(max_doublings + 1):
        eigs = np.fft.rfft(_first_row(cov.r, n, m)).real
        eigs = np.concatenate([eigs, eigs[1:-1][::-1]])
        top = eigs.max()
        worst = eigs.min() / top
        if worst >= -tol_embed:
            eigs = np.clip(eigs, 0.0, None)
            eigs.setflags(write=False)
            return SamplerPlan(n, m, eigs, fingerprint(cov))
        m *= 2
    raise NegativeEmbedding(
        f"circulant embedding has relative minimal eigenvalue {worst:.3e} at m={m // 2}"
    )


def _complex_gaussian_field(plan: SamplerPlan, rng: np.random.Generator, rows: int) -> np.ndarray:
    z = rng.standard_normal((rows, plan.m)) + 1j * rng.standard_normal((rows, plan.m))
    return np.fft.fft(plan.amplitude * z, axis=-1)[:, :plan.n]


def sample_path(plan: SamplerPlan, seed: int) -> Path:
    """One path with the planned covariance; bit-identical for equal ``(plan, seed)``."""
    rng = np.random.Generator(np.random.PCG64(seed))
    y = _complex_gaussian_field(plan, rng, 1)[0]
    return Path(np.ascontiguousarray(y.real), int(seed), plan.cov_hash)


def sample_paths(plan: SamplerPlan, seed: int, count: int, batch: int = 4096) -> np.ndarray:
    """``count`` independent paths as rows of an array.

    Real and imaginary parts of each complex draw are independent with the
    target covariance, so each FFT yields two paths. Batch ``b`` uses the seed
    ``mix64(seed, b)``.
    """
    out = np.empty((count, plan.n))
    filled = 0
    b = 0
    while filled < count:
        rows = min(batch, count - filled)
        rng = np.random.Generator(np.random.PCG64(mix64(seed, b)))
        y = _complex_gaussian_field(plan, rng, (rows + 1) // 2)
        pair = np.concatenate([y.real, y.imag], axis=0)[:rows]
        out[filled:filled + rows] = pair
        filled += rows
        b += 1
    return out


def write_path_csv(path: Path, dest) -> None:
    with open(FsPath(dest), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x"])
        for v in path.x:
            w.writerow([f"{v:.15g}"])
