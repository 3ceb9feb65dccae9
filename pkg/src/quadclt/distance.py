"""Wasserstein-1 distance between the law of ``F_n`` and ``N(0, sigma0^2)``.

The law of ``Q = sum lambda_i (xi_i^2 - 1)`` is obtained by inverting its
characteristic function (Imhof's formula); the distance is the L1 norm of
the CDF difference on the line.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path as FsPath

import numpy as np
from scipy import optimize, special, stats

from .errors import DomainError, NonConvergence
from .oracle import ChiSquareWeights
from .quadrature import gauss_legendre

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_DROP = 1e-13  # weights below this fraction of the largest are ignored
_MAX_PANELS = 100_000


@dataclass(frozen=True)
class CdfCurve:
    xs: np.ndarray
    ps: np.ndarray
    tail_bound: float


def _as_weights(w) -> np.ndarray:
    lam = np.asarray(w.lambda_i if isinstance(w, ChiSquareWeights) else w, dtype=float)
    if lam.size == 0:
        return lam
    top = np.abs(lam).max()
    return lam[np.abs(lam) > _DROP * top] if top > 0 else lam[:0]


def _tail_mass(lam: np.ndarray, x: float) -> float:
    """Upper bound on ``int_x^inf P(Q > t) dt`` (and the mirror tail) for ``x > 0``.

    From the sub-gamma bound ``P(Q >= 2a sqrt(s) + 2b s) <= e^{-s}`` with
    ``a = ||lambda||_2``, ``b = ||lambda||_inf``, valid for either sign.
    """
    a = float(np.sqrt(np.sum(lam ** 2)))
    b = float(np.abs(lam).max())
    # solve 2a sqrt(s) + 2b s = x for s
    r = (-2 * a + math.sqrt(4 * a * a + 8 * b * x)) / (4 * b)
    s0 = r * r
    return a * math.sqrt(math.pi) * special.erfc(math.sqrt(s0)) + 2 * b * math.exp(-s0)


def _gauss_tail_mass(sigma: float, x: float) -> float:
    t = x / sigma
    return sigma * (stats.norm.pdf(t) - t * stats.norm.sf(t))


class ImhofCdf:
    """CDF of ``sum lambda_i (xi_i^2 - 1)`` for at least two nonzero weights.

    The inversion integrand is integrated on ``(0, U]`` with Gauss panels sized
    to the local oscillation rate of the phase; ``U`` makes the dropped tail
    smaller than ``tol`` using ``1/rho(u) <= prod_{i<=k} (|lambda_i| u)^{-1/2}``
    over the best subset of the ``k`` largest weights.
    """

    def __init__(self, weights, tol: float = 1e-9, x_scale: float | None = None):
        lam = _as_weights(weights)
        if lam.size < 2:
            raise DomainError("inversion needs at least two nonzero weights; use the closed-form branches")
        self.lam = lam[np.argsort(-np.abs(lam), kind="stable")]
        self.tol = tol
        abs_sorted = np.abs(self.lam)
        k = np.arange(1, abs_sorted.size + 1)
        log_u = (2.0 / k) * (np.log(2.0 / k) - 0.5 * np.cumsum(np.log(abs_sorted)) - math.log(math.pi * tol))
        log_u[0] = np.inf
        self.u_max = float(np.exp(np.min(log_u)))
        sd = math.sqrt(2.0 * float(np.sum(self.lam ** 2)))
        self.x_scale = x_scale if x_scale is not None else 12.0 * sd
        self._build_nodes()

    def _rate(self, u: float) -> float:
        lam = self.lam
        inner = np.sum(np.abs(lam) * (lam * u) ** 2 / (1.0 + (lam * u) ** 2))
        return 0.5 * (float(inner) + self.x_scale)

    def _build_nodes(self) -> None:
        edges = [0.0]
        u = 0.0
        cap = self.u_max / 8.0
        h_min = 3.0 / self._rate(self.u_max)
        if self.u_max / h_min > 4 * _MAX_PANELS:
            raise NonConvergence(
                f"tolerance {self.tol:g} not reachable with {self.lam.size} weights "
                f"(truncation point {self.u_max:.3g}); loosen tol"
            )
        while u < self.u_max:
            h = max(min(cap, 3.0 / self._rate(u + cap), self.u_max - u), h_min)
            u = min(u + h, self.u_max)
            edges.append(u)
            if len(edges) > _MAX_PANELS:
                raise NonConvergence(f"tolerance {self.tol:g} needs more than {_MAX_PANELS} panels")
        edges = np.asarray(edges)
        p, v = gauss_legendre(16)
        lo = edges[:-1, None]
        wd = np.diff(edges)[:, None]
        self.u = (lo + wd * p).ravel()
        self.w = (wd * v).ravel()
        phase = np.zeros(self.u.size)
        log_rho = np.zeros(self.u.size)
        for i in range(0, self.lam.size, 256):
            lu = np.outer(self.lam[i:i + 256], self.u)
            phase += 0.5 * np.sum(np.arctan(lu) - lu, axis=0)
            log_rho += 0.25 * np.sum(np.log1p(lu ** 2), axis=0)
        self.phase = phase
        self.amp = self.w * np.exp(-log_rho) / self.u

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        if flat.size and np.abs(flat).max() > self.x_scale:
            raise DomainError("evaluation point beyond the scale the nodes were built for")
        out = np.empty(flat.size)
        step = max(1, 4_000_000 // self.u.size)
        for i in range(0, flat.size, step):
            ang = self.phase[None, :] - 0.5 * np.outer(flat[i:i + step], self.u)
            out[i:i + step] = 0.5 - (np.sin(ang) @ self.amp) / math.pi
        out = np.clip(out, 0.0, 1.0)
        return out.reshape(x.shape) if x.ndim else float(out[0])


def _single_cdf(lam1: float, x):
    z = np.asarray(x, dtype=float) / lam1 + 1.0
    return stats.chi2.cdf(z, 1) if lam1 > 0 else stats.chi2.sf(z, 1)


def imhof_cdf(w, x, tol: float = 1e-9):
    """``P(Q <= x)``; closed-form branches for zero or one nonzero weight."""
    lam = _as_weights(w)
    if lam.size == 0:
        return np.where(np.asarray(x) >= 0, 1.0, 0.0) if np.ndim(x) else float(x >= 0)
    if lam.size == 1:
        out = _single_cdf(float(lam[0]), x)
        return out if np.ndim(x) else float(out)
    scale = max(12.0 * math.sqrt(2.0 * float(np.sum(lam ** 2))), 1.01 * float(np.max(np.abs(x))))
    return ImhofCdf(lam, tol, scale)(x)


def _horizon(lam: np.ndarray, sigma0: float, tol: float) -> float:
    def excess(t):
        return 2.0 * (_tail_mass(lam, t) + _gauss_tail_mass(sigma0, t)) - 0.5 * tol

    hi = max(sigma0, math.sqrt(2.0 * float(np.sum(lam ** 2))))
    while excess(hi) > 0:
        hi *= 2.0
        if hi > 1e8:
            raise NonConvergence("tail bound not achievable")
    return hi


def _closed_form_cdf(lam: np.ndarray):
    if lam.size == 0:
        return lambda x: (np.asarray(x) >= 0).astype(float)
    return lambda x: _single_cdf(float(lam[0]), x)


def cdf_curve(w, tol: float = 1e-8, sigma0: float = 1.0, points: int = 2001) -> CdfCurve:
    lam = _as_weights(w)
    if lam.size == 0:
        raise DomainError("point mass has no continuous CDF curve")
    t = _horizon(lam, sigma0, tol)
    xs = np.linspace(-t, t, points)
    cdf = ImhofCdf(lam, tol, 1.01 * t) if lam.size >= 2 else _closed_form_cdf(lam)
    ps = np.maximum.accumulate(np.clip(cdf(xs), 0.0, 1.0))
    return CdfCurve(xs, ps, 2.0 * _tail_mass(lam, t))


def wasserstein_exact(w, sigma0: float, tol: float = 1e-7, panel_width: float | None = None) -> float:
    """``int |F_Q(x) - Phi(x / sigma0)| dx`` within ``2 tol``.

    The line is truncated to ``[-T, T]`` where both tails carry less than
    ``tol/2``; inside, composite Gauss rules are split at the sign changes of
    the CDF difference and at the support edge of ``Q`` (where the density
    of few-weight laws jumps). Panels are halved until two successive rules
    agree to ``tol``.
    """
    if sigma0 <= 0:
        raise DomainError("sigma0 must be positive")
    lam = _as_weights(w)
    if lam.size == 0:
        return sigma0 * SQRT_2_OVER_PI
    t = _horizon(lam, sigma0, tol)
    cdf = ImhofCdf(lam, 0.01 * tol, 1.01 * t) if lam.size >= 2 else _closed_form_cdf(lam)

    def diff(x):
        return cdf(x) - stats.norm.cdf(np.asarray(x) / sigma0)

    coarse = np.linspace(-t, t, 4001)
    dc = diff(coarse)
    breaks = [-t, t]
    def scalar(z):
        return float(diff(np.array([z]))[0])

    flips = (np.sign(dc[:-1]) * np.sign(dc[1:]) < 0) & (np.maximum(np.abs(dc[:-1]), np.abs(dc[1:])) > tol)
    for i in np.nonzero(flips)[0]:
        fa, fb = scalar(coarse[i]), scalar(coarse[i + 1])
        if fa * fb < 0:
            breaks.append(optimize.brentq(scalar, coarse[i], coarse[i + 1], xtol=1e-13))
    if np.all(lam > 0):
        breaks.append(-float(lam.sum()))
    elif np.all(lam < 0):
        breaks.append(float(-lam.sum()))
    edges0 = np.unique(np.clip(breaks, -t, t))
    width = panel_width or sigma0 / 4.0
    p, v = gauss_legendre(16)
    prev = None
    for _ in range(6):
        edges = np.concatenate([np.linspace(a, b, max(1, math.ceil((b - a) / width)) + 1)[:-1]
                                for a, b in zip(edges0[:-1], edges0[1:])] + [edges0[-1:]])
        lo = edges[:-1, None]
        wd = np.diff(edges)[:, None]
        xs = (lo + wd * p).ravel()
        val = float(np.sum((wd * v).ravel() * np.abs(diff(xs))))
        if prev is not None and abs(val - prev) < tol:
            return val
        prev = val
        width /= 2.0
    raise NonConvergence("CDF-difference quadrature did not settle")


@dataclass(frozen=True)
class EmpiricalW1:
    value: float
    se: float
    samples: int


def _gauss_primitive(x, sigma):
    # int_{-inf}^x Phi(t / sigma) dt
    z = x / sigma
    return x * stats.norm.cdf(z) + sigma * stats.norm.pdf(z)


def wasserstein_empirical(samples, sigma0: float) -> EmpiricalW1:
    """Exact W1 between the empirical law of ``samples`` and ``N(0, sigma0^2)``.

    ``se`` is ``int sqrt(F_m (1 - F_m) / m) dx``, the pointwise standard error
    of the empirical CDF integrated over the line; it bounds the expected
    sampling deviation of the distance from above.
    """
    xs = np.sort(np.asarray(samples, dtype=float).ravel())
    m = xs.size
    if m < 2:
        raise DomainError("need at least two samples")
    if sigma0 <= 0:
        raise DomainError("sigma0 must be positive")
    left = float(_gauss_primitive(xs[0], sigma0))
    z = xs[-1] / sigma0
    right = float(sigma0 * stats.norm.pdf(z) - xs[-1] * stats.norm.sf(z))
    a = xs[:-1]
    b = xs[1:]
    c = np.arange(1, m) / m
    cross = np.clip(sigma0 * stats.norm.ppf(c), a, b)
    ga = _gauss_primitive(a, sigma0)
    gb = _gauss_primitive(b, sigma0)
    gx = _gauss_primitive(cross, sigma0)
    # c >= Phi on [a, cross], c <= Phi on [cross, b]
    inner = (c * (cross - a) - (gx - ga)) + ((gb - gx) - c * (b - cross))
    value = left + right + float(np.sum(inner))
    se = float(np.sum(np.sqrt(c * (1.0 - c) / m) * (b - a)))
    return EmpiricalW1(value, se, m)


DISTANCE_HEADER = ["n", "dW_exact", "dW_empirical", "stein_bound"]


def write_distance_csv(rows, dest, extra: dict | None = None) -> None:
    """``rows``: iterables ``(n, exact, empirical, bound)``; missing values as ``nan``."""
    extra = extra or {}
    with open(FsPath(dest), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DISTANCE_HEADER + list(extra))
        for n, ex, em, bd in rows:
            w.writerow([n] + ["nan" if v != v else f"{v:.15g}" for v in (ex, em, bd)] + list(extra.values()))
