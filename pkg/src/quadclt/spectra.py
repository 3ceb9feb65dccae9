"""Spectral densities, weight functions and their Fourier coefficients.

Conventions: a spectral density ``f`` on (-pi, pi) generates the covariances
``r(k) = int_{-pi}^{pi} e^{ik lam} f(lam) dlam`` and a weight ``g`` has
coefficients ``gamma_g(k) = (1/2pi) int g(lam) e^{ik lam} dlam``. Both are
even, so every integral is folded onto (0, pi).

Models are immutable dataclasses that evaluate vectorised on arrays; the
``exponent`` attribute is the power of the singularity at the origin
(``f ~ |lam|^-exponent``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.special import gammaln, zeta

from .errors import DomainError
from .quadrature import DEFAULT_QUAD, QuadratureSpec, integrate

TWO_PI = 2.0 * math.pi


# --- slowly varying factors -------------------------------------------------

@dataclass(frozen=True)
class Constant:
    c: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError("Constant slowly varying factor needs c > 0")

    def __call__(self, lam):
        return np.full_like(np.asarray(lam, dtype=float), self.c)


@dataclass(frozen=True)
class LogPower:
    """``L(lam) = c * (1 + ln(pi/|lam|))**a``, positive on (0, pi]."""

    c: float = 1.0
    a: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError("LogPower needs c > 0")

    def __call__(self, lam):
        return self.c * (1.0 + np.log(math.pi / np.abs(lam))) ** self.a


@dataclass(frozen=True)
class FarimaFactor:
    """Smooth factor of the FARIMA(0, d, 0) density: ``f = |lam|^(-2d) * L``."""

    d: float
    innov_var: float = 1.0

    def __call__(self, lam):
        lam = np.abs(lam)
        ratio = 2.0 * np.sin(0.5 * lam) / lam
        return self.innov_var / TWO_PI * ratio ** (-2.0 * self.d)


SlowVaryingSpec = Union[Constant, LogPower]


def slow_variation_ratio(L, lam, t: float):
    """``L(t lam) / L(lam)``; tends to 1 as ``lam -> 0`` for slowly varying ``L``."""
    lam = np.asarray(lam, dtype=float)
    return L(t * lam) / L(lam)


# --- spectral densities -----------------------------------------------------

@dataclass(frozen=True)
class PowerLaw:
    alpha: float
    L: SlowVaryingSpec = field(default_factory=Constant)

    def __post_init__(self):
        if not -1.0 < self.alpha < 1.0:
            raise DomainError("PowerLaw needs alpha in (-1, 1)")

    @property
    def exponent(self) -> float:
        return self.alpha

    def __call__(self, lam):
        lam = np.abs(lam)
        return lam ** (-self.alpha) * self.L(lam)


@dataclass(frozen=True)
class Farima:
    """FARIMA(0, d, 0): ``f = innov_var/(2pi) |2 sin(lam/2)|^(-2d)``."""

    d: float
    innov_var: float = 1.0

    def __post_init__(self):
        if not -0.5 < self.d < 0.5:
            raise DomainError("Farima needs d in (-1/2, 1/2)")
        if not self.innov_var > 0:
            raise DomainError("Farima needs innov_var > 0")

    @property
    def exponent(self) -> float:
        return 2.0 * self.d

    @property
    def factor(self) -> FarimaFactor:
        return FarimaFactor(self.d, self.innov_var)

    def __call__(self, lam):
        return self.innov_var / TWO_PI * np.abs(2.0 * np.sin(0.5 * np.abs(lam))) ** (-2.0 * self.d)


@dataclass(frozen=True)
class Fgn:
    """Fractional Gaussian noise with Hurst index ``hurst`` and variance ``var``.

    The aliased series of the density is summed exactly through the Hurwitz
    zeta function.
    """

    hurst: float
    var: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.hurst < 1.0:
            raise DomainError("Fgn needs hurst in (0, 1)")

    @property
    def exponent(self) -> float:
        return 2.0 * self.hurst - 1.0

    def __call__(self, lam):
        lam = np.abs(np.asarray(lam, dtype=float))
        s = 2.0 * self.hurst + 1.0
        c = self.var * math.gamma(s) * math.sin(math.pi * self.hurst) / TWO_PI
        u = lam / TWO_PI
        aliased = lam ** (-s) + TWO_PI ** (-s) * (zeta(s, 1.0 + u) + zeta(s, 1.0 - u))
        return c * 4.0 * np.sin(0.5 * lam) ** 2 * aliased


@dataclass(frozen=True)
class WhiteNoise:
    @property
    def exponent(self) -> float:
        return 0.0

    def __call__(self, lam):
        return np.full_like(np.asarray(lam, dtype=float), 1.0 / TWO_PI)


SpectralModel = Union[PowerLaw, Farima, Fgn, WhiteNoise]


# --- weights ----------------------------------------------------------------

@dataclass(frozen=True)
class PowerLawWeight:
    beta: float
    L: SlowVaryingSpec = field(default_factory=Constant)
    sign: int = 1

    def __post_init__(self):
        if not -1.0 < self.beta < 1.0:
            raise DomainError("PowerLawWeight needs beta in (-1, 1)")
        if self.sign not in (1, -1):
            raise DomainError("sign must be +1 or -1")

    @property
    def exponent(self) -> float:
        return self.beta

    def __call__(self, lam):
        lam = np.abs(lam)
        return self.sign * lam ** (-self.beta) * self.L(lam)


@dataclass(frozen=True)
class UnitWeight:
    @property
    def exponent(self) -> float:
        return 0.0

    def __call__(self, lam):
        return np.ones_like(np.asarray(lam, dtype=float))


@dataclass(frozen=True)
class LogScore:
    """``g = ln|lam| / (2 pi f)``: the weight behind the Whittle score."""

    base: SpectralModel

    @property
    def exponent(self) -> float:
        return -self.base.exponent

    def __call__(self, lam):
        lam = np.abs(lam)
        return np.log(lam) / (TWO_PI * self.base(lam))


@dataclass(frozen=True)
class LogSqHess:
    """``g = ln^2|lam| / (2 pi f)``: the weight behind the Whittle Hessian."""

    base: SpectralModel

    @property
    def exponent(self) -> float:
        return -self.base.exponent

    def __call__(self, lam):
        lam = np.abs(lam)
        return np.log(lam) ** 2 / (TWO_PI * self.base(lam))


WeightModel = Union[PowerLawWeight, UnitWeight, LogScore, LogSqHess]


# --- sequences ----------------------------------------------------------------

@dataclass(frozen=True)
class CovSequence:
    """Autocovariances ``r(0..K)``."""

    r: np.ndarray
    source: str = "quadrature"

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if r.ndim != 1 or r.size == 0:
            raise DomainError("covariance sequence must be a non-empty 1-D array")
        if not r[0] > 0:
            raise DomainError("r(0) must be positive")
        r.setflags(write=False)
        object.__setattr__(self, "r", r)

    @property
    def K(self) -> int:
        return self.r.size - 1


@dataclass(frozen=True)
class WeightFourier:
    """Fourier coefficients ``gamma_g(0..K)`` of an even weight."""

    gamma: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float)
        if g.ndim != 1 or g.size == 0:
            raise DomainError("weight coefficients must be a non-empty 1-D array")
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)

    @property
    def K(self) -> int:
        return self.gamma.size - 1


# --- operations ---------------------------------------------------------------

def eval_density(model, lam: float) -> float:
    """Evaluate ``f(lam)`` (or a weight ``g(lam)``) at a single frequency."""
    lam = float(lam)
    if lam == 0.0 or abs(lam) > math.pi:
        raise DomainError(f"frequency {lam!r} outside (-pi, pi] minus the origin")
    return float(model(np.array([lam]))[0])


def singular_points(model) -> list[float]:
    return [] if isinstance(model, (WhiteNoise, UnitWeight)) else [0.0]


def cosine_integrals(func, K: int, quad: QuadratureSpec, singular=(0.0,), block: int = 256):
    """``int_0^pi func(lam) cos(k lam) dlam`` for ``k = 0..K``."""
    out = np.empty(K + 1)
    width = math.pi / max(K, 8)
    for k0 in range(0, K + 1, block):
        ks = np.arange(k0, min(k0 + block, K + 1), dtype=float)

        def integrand(lam, ks=ks):
            return np.cos(np.outer(ks, lam)) * func(lam)

        out[k0:k0 + ks.size] = integrate(integrand, 0.0, math.pi, singular=singular,
                                         max_width=width, quad=quad)
    return out


def autocovariance(model: SpectralModel, K: int, quad: QuadratureSpec = DEFAULT_QUAD) -> CovSequence:
    """Autocovariances ``r(0..K)`` by singularity-aware quadrature.

    Fractional Gaussian noise uses its closed form instead of integrating the
    aliased density.
    """
    if K < 0:
        raise DomainError("K must be >= 0")
    if isinstance(model, Fgn):
        return fgn_autocov(model.hurst, model.var, K)
    r = 2.0 * cosine_integrals(model, K, quad, singular=singular_points(model))
    return CovSequence(r, "quadrature")


def farima_autocov(d_frac: float, innov_var: float, K: int) -> CovSequence:
    """Closed-form FARIMA(0, d, 0) autocovariances via the gamma-ratio recursion."""
    if not abs(d_frac) < 0.5:
        raise DomainError("FARIMA autocovariance needs |d| < 1/2")
    if K < 0:
        raise DomainError("K must be >= 0")
    r = np.empty(K + 1)
    r[0] = innov_var * math.exp(gammaln(1.0 - 2.0 * d_frac) - 2.0 * gammaln(1.0 - d_frac))
    k = np.arange(1, K + 1, dtype=float)
    r[1:] = r[0] * np.cumprod((k - 1.0 + d_frac) / (k - d_frac))
    return CovSequence(r, "closed-form")


def fgn_autocov(hurst: float, var: float, K: int) -> CovSequence:
    k = np.arange(K + 1, dtype=float)
    h2 = 2.0 * hurst
    r = 0.5 * var * (np.abs(k + 1) ** h2 - 2.0 * k ** h2 + np.abs(k - 1) ** h2)
    return CovSequence(r, "closed-form")


def covariance_sequence(model: SpectralModel, K: int, quad: QuadratureSpec = DEFAULT_QUAD) -> CovSequence:
    """Autocovariances preferring closed forms where the model has one."""
    if isinstance(model, Farima):
        return farima_autocov(model.d, model.innov_var, K)
    if isinstance(model, Fgn):
        return fgn_autocov(model.hurst, model.var, K)
    if isinstance(model, WhiteNoise):
        r = np.zeros(K + 1)
        r[0] = 1.0
        return CovSequence(r, "closed-form")
    return autocovariance(model, K, quad)


def weight_fourier(weight: WeightModel, K: int, quad: QuadratureSpec = DEFAULT_QUAD) -> WeightFourier:
    if K < 0:
        raise DomainError("K must be >= 0")
    if isinstance(weight, UnitWeight):
        gamma = np.zeros(K + 1)
        gamma[0] = 1.0
        return WeightFourier(gamma)
    return WeightFourier(cosine_integrals(weight, K, quad, singular=singular_points(weight)) / math.pi)


def sigma0_sq(model: SpectralModel, weight: WeightModel, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Limit variance ``4 pi int f^2 g^2``; raises DivergenceError when not integrable."""

    def integrand(lam):
        return (model(lam) * weight(lam)) ** 2

    sing = sorted(set(singular_points(model)) | set(singular_points(weight)))
    return float(8.0 * math.pi * integrate(integrand, 0.0, math.pi, singular=sing, quad=quad))


def farima_sigma0_sq(d_frac: float, innov_var: float = 1.0) -> float:
    """Closed form of ``sigma0_sq(Farima(d), UnitWeight())`` (needs ``d < 1/4``)."""
    if not d_frac < 0.25:
        raise DomainError("f^2 is integrable only for d < 1/4")
    return 2.0 * innov_var ** 2 * math.exp(gammaln(1.0 - 4.0 * d_frac) - 2.0 * gammaln(1.0 - 2.0 * d_frac))


def log_square_integral() -> float:
    """``int_{-pi}^{pi} ln^2|lam| dlam = 2 pi (ln^2 pi - 2 ln pi + 2)``."""
    lp = math.log(math.pi)
    return 2.0 * math.pi * (lp * lp - 2.0 * lp + 2.0)
