"""Dirichlet and Fejer kernels and the integral operators built from them.

The normalised Dirichlet kernel is ``D_n(w) = (2 pi n)^{-1/2} sum_{t=1}^n e^{itw}``
and the Fejer kernel ``Phi_n = |D_n|^2``. Everything here is a numerical
check of an identity or a bound on these kernels; bounds of the form
``<= C n^rho`` are checked as fitted log-log slopes (see :mod:`quadclt.rates`).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path as FsPath
from typing import Sequence

import numpy as np

from .errors import DomainError
from .quadrature import DEFAULT_QUAD, QuadratureSpec, graded_breaks, integrate, rule
from .spectra import singular_points

TWO_PI = 2.0 * math.pi


def _wrap(w):
    """Reduce to (-pi, pi]; every kernel here is 2 pi periodic."""
    w = np.asarray(w, dtype=float)
    return w - TWO_PI * np.round(w / TWO_PI)


def dirichlet(n: int, w):
    w = _wrap(w)
    s = np.sin(0.5 * w)
    safe = np.where(s == 0.0, 1.0, s)
    ratio = np.where(s == 0.0, float(n), np.sin(0.5 * n * w) / safe)
    return np.exp(0.5j * (n + 1) * w) * ratio / math.sqrt(TWO_PI * n)


def dirichlet_abs(n: int, w):
    w = _wrap(w)
    s = np.abs(np.sin(0.5 * w))
    safe = np.where(s == 0.0, 1.0, s)
    ratio = np.where(s == 0.0, float(n), np.abs(np.sin(0.5 * n * w)) / safe)
    return ratio / math.sqrt(TWO_PI * n)


def dirichlet_direct(n: int, w):
    """Direct-sum evaluation of ``D_n``; reference for the closed form."""
    w = np.asarray(w, dtype=float)
    t = np.arange(1, n + 1)
    return np.exp(1j * np.multiply.outer(w, t)).sum(axis=-1) / math.sqrt(TWO_PI * n)


def fejer(n: int, w):
    return dirichlet_abs(n, w) ** 2


def envelope_h(n: int, w):
    return math.sqrt(n) / (1.0 + n * np.abs(_wrap(w)))


@dataclass(frozen=True)
class KernelPoint:
    n: int
    omega: float
    D: complex
    Phi: float
    H: float


def kernel_eval(n: int, omega: float) -> KernelPoint:
    d = complex(dirichlet(n, omega))
    return KernelPoint(n, float(omega), d, abs(d) ** 2, float(envelope_h(n, omega)))


def envelope_constants(ns: Sequence[int] = (4, 16, 64, 256, 1024), points: int = 10_000):
    """Smallest ``C`` with ``|D_n| <= C H_n`` and with ``|D_n| <= C min(sqrt n, 1/(sqrt n |w|))``.

    The grid is uniform on [-pi, pi] merged with a geometric grid toward the
    origin, where the envelope is tightest, and with the peaks
    ``(2j + 1) pi / n`` of each kernel's numerator.
    """
    base = np.linspace(-math.pi, math.pi, points)
    geo = math.pi * np.geomspace(1e-6, 1.0, points // 4)
    base = np.concatenate([base, geo, -geo, [0.0]])
    c_h = c_min = 0.0
    for n in ns:
        peaks = (2 * np.arange(n) + 1) * math.pi / n
        grid = np.unique(np.concatenate([base, peaks[peaks <= math.pi], -peaks[peaks <= math.pi]]))
        d = dirichlet_abs(n, grid)
        c_h = max(c_h, float(np.max(d / envelope_h(n, grid))))
        with np.errstate(divide="ignore"):
            bound = np.minimum(math.sqrt(n), 1.0 / (math.sqrt(n) * np.abs(grid)))
        c_min = max(c_min, float(np.max(d / bound)))
    return c_h, c_min


def _near_origin(h, *pts) -> list[float]:
    # grading toward a singular origin at the scale of the nearest point of interest
    scales = [abs(p) for p in pts if p != 0.0]
    if not singular_points(h) or not scales:
        return []
    return graded_breaks(0.0, min(scales))


def _zeros(n: int, centre: float) -> list[float]:
    # zeros of w -> D_n(w - centre) inside (-pi, pi), plus the peak itself
    j = np.arange(-n, n + 1)
    pts = centre + TWO_PI * j / n
    return [float(p) for p in pts if -math.pi < p < math.pi]


def fejer_mass(n: int, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    return float(integrate(lambda w: fejer(n, w), -math.pi, math.pi, breaks=_zeros(n, 0.0),
                           max_width=math.pi / n, quad=quad))


def a_nh(h, n: int, lam: float, mu: float, quad: QuadratureSpec = DEFAULT_QUAD) -> complex:
    """``A_{n,h}(lam, mu) = int h(w) D_n(lam - w) D_n(w - mu) dw``."""

    def integrand(w):
        return h(w) * dirichlet(n, lam - w) * dirichlet(n, w - mu)

    return complex(integrate(integrand, -math.pi, math.pi, singular=singular_points(h),
                             breaks=[lam, mu, *_near_origin(h, lam, mu)], max_width=math.pi / n, quad=quad))


def convolution_identity_residual(n: int, lam: float, mu: float,
                                  quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``|int D_n(lam-w) D_n(w-mu) dw - sqrt(2pi/n) D_n(lam-mu)|``."""

    def integrand(w):
        return dirichlet(n, lam - w) * dirichlet(n, w - mu)

    lhs = complex(integrate(integrand, -math.pi, math.pi, breaks=[lam, mu],
                            max_width=math.pi / n, quad=quad))
    return abs(lhs - math.sqrt(TWO_PI / n) * complex(dirichlet(n, lam - mu)))


def _check_lam(lam: float) -> float:
    lam = float(lam)
    if lam == 0.0 or abs(lam) > math.pi:
        raise DomainError("lambda must lie in [-pi, pi] minus the origin")
    return lam


def e_nf(model, n: int, lam: float, mu: float, quad: QuadratureSpec = DEFAULT_QUAD) -> complex:
    """``E_{n,f}(lam, mu) = int (f(w) - f(lam)) D_n(lam - w) D_n(w - mu) dw``."""
    lam = _check_lam(lam)
    f_lam = float(model(np.array([lam]))[0])

    def integrand(w):
        return (model(w) - f_lam) * dirichlet(n, lam - w) * dirichlet(n, w - mu)

    return complex(integrate(integrand, -math.pi, math.pi, singular=singular_points(model),
                             breaks=[lam, mu, *_near_origin(model, lam, mu)], max_width=math.pi / n, quad=quad))


@dataclass(frozen=True)
class OperatorKernelSample:
    n: int
    lam: float
    mu: float
    a_nf: complex
    e_nf: complex
    ell0: float


def operator_kernel_sample(model, weight, n: int, lam: float, mu: float,
                           quad: QuadratureSpec = DEFAULT_QUAD) -> OperatorKernelSample:
    """``A_{n,f}``, ``E_{n,f}`` and the kernel ``l_n^(0)`` at one point.

    ``l_n^(0)`` is real here: it uses ``|D_n|`` since only its modulus enters
    the Schur test.
    """
    lam = _check_lam(lam)
    mu = _check_lam(mu)
    a = a_nh(model, n, lam, mu, quad)
    e = e_nf(model, n, lam, mu, quad)
    pts = np.array([lam, mu])
    fv = model(pts)
    gv = np.abs(weight(pts))
    ell = math.sqrt(TWO_PI / n) * math.sqrt(fv[0] * fv[1] * gv[0] * gv[1]) * float(dirichlet_abs(n, lam - mu))
    return OperatorKernelSample(n, lam, mu, a, e, ell)


def bessel_check(model, n: int, lam: float, quad: QuadratureSpec = DEFAULT_QUAD,
                 mu_points: int | None = None) -> tuple[float, float]:
    """Both sides of ``int |E_{n,f}(lam, mu)|^2 dmu <= (2pi/n) int |f - f(lam)|^2 Phi_n(lam - w) dw``.

    ``mu -> E_{n,f}(lam, mu)`` is a trigonometric polynomial of degree ``n``,
    so a Gauss rule on panels of width ``pi/n`` integrates its square exactly
    up to the accuracy of the inner integral.
    """
    lam = _check_lam(lam)
    f_lam = float(model(np.array([lam]))[0])
    p = mu_points or quad.points_per_panel
    mu, wmu = rule(-math.pi, math.pi, max_width=math.pi / n, points=p)

    def inner(w):
        left = (model(w) - f_lam) * dirichlet(n, lam - w)
        return left[None, :] * dirichlet(n, w[None, :] - mu[:, None])

    e = integrate(inner, -math.pi, math.pi, singular=singular_points(model),
                  breaks=[lam, *_near_origin(model, lam)],
                  max_width=math.pi / n, quad=quad)
    lhs = float(np.sum(wmu * np.abs(e) ** 2))

    def rhs_integrand(w):
        return (model(w) - f_lam) ** 2 * fejer(n, lam - w)

    rhs = TWO_PI / n * float(integrate(rhs_integrand, -math.pi, math.pi, singular=singular_points(model),
                                       breaks=_zeros(n, lam) + _near_origin(model, lam), max_width=math.pi / n, quad=quad))
    return lhs, rhs


def _require_sum_below_one(model, weight):
    if model.exponent + weight.exponent >= 1.0:
        raise DomainError("need alpha + beta < 1")


def _phi_shift(model, weight, om: float, quad: QuadratureSpec) -> float:
    # int f(l) |g(l) - g(l - om)| dl with g extended 2pi-periodically
    def integrand(lam):
        return model(lam) * np.abs(weight(lam) - weight(_wrap(lam - om)))

    # the difference decays like a derivative for |l| >> om; grade panels geometrically from om
    breaks = [0.5 * om, 0.5 * om - math.pi, om - math.pi, -0.5 * om, *graded_breaks(0.0, om)]
    return float(integrate(integrand, -math.pi, math.pi, singular=[0.0, om], breaks=breaks, quad=quad))


def delta_n_sweep(model, weight, ns: Sequence[int], quad: QuadratureSpec = DEFAULT_QUAD,
                  outer_levels: int = 48) -> np.ndarray:
    """``Delta_n = int int f(l) |g(l) - g(m)| H_n^2(l - m) dl dm`` for each ``n``.

    Substituting ``m = l - w`` (with ``H_n`` and ``g`` taken 2pi-periodic)
    leaves ``2 int_0^pi H_n^2(w) Phi(w) dw`` where ``Phi`` does not depend on
    ``n``, so the inner integrals are shared across the sweep.
    """
    _require_sum_below_one(model, weight)
    om, w = rule(0.0, math.pi, singular=[0.0], levels=outer_levels, points=quad.points_per_panel)
    phi = np.array([_phi_shift(model, weight, o, quad) for o in om])
    return np.array([2.0 * float(np.sum(w * phi * envelope_h(n, om) ** 2)) for n in ns])


def delta_n(model, weight, n: int, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    return float(delta_n_sweep(model, weight, [n], quad)[0])


def one_denom_integral(h, mu: float, n: int, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``int |h(l) D_n(l - mu)| dl`` for ``h ~ |l|^-gamma``, ``0 <= gamma < 1``."""
    if not 0.0 <= h.exponent < 1.0:
        raise DomainError("exponent must lie in [0, 1)")

    def integrand(lam):
        return np.abs(h(lam)) * dirichlet_abs(n, lam - mu)

    return float(integrate(integrand, -math.pi, math.pi, singular=singular_points(h),
                           breaks=_zeros(n, mu) + _near_origin(h, mu), max_width=math.pi / n, quad=quad))


def default_mu_grid(n: int, density: int = 1) -> np.ndarray:
    """Positive frequencies: geometric toward ``pi/(8n)`` plus a uniform grid."""
    steps = int(math.ceil(2 * density * math.log2(8 * n))) + 1
    geo = math.pi * np.exp2(-np.arange(steps) / (2.0 * density))
    lin = np.linspace(0.0, math.pi, 8 * density + 1)[1:]
    return np.unique(np.concatenate([geo, lin]))


@dataclass(frozen=True)
class SchurRows:
    mu: np.ndarray
    full: np.ndarray
    reduced: np.ndarray

    @property
    def sup(self) -> float:
        return float(self.full.max())

    @property
    def max_rel_gap(self) -> float:
        return float(np.max(np.abs(self.full - self.reduced) / self.reduced))


def schur_rows(model, weight, n: int, mu_grid=None, quad: QuadratureSpec = DEFAULT_QUAD) -> SchurRows:
    """Weighted Schur row integrals of ``l_n^(0)`` with ``p = sqrt(f |g|)``.

    ``full`` evaluates ``(1/p(mu)) int l_n^(0)(l, mu) p(l) dl`` as written;
    ``reduced`` the equivalent ``sqrt(2pi/n) int f |g| |D_n(l - mu)| dl``.
    """
    if model.exponent + weight.exponent >= 0.5:
        raise DomainError("need alpha + beta < 1/2")
    mu_grid = default_mu_grid(n) if mu_grid is None else np.asarray(mu_grid, dtype=float)
    if np.any(mu_grid == 0.0):
        raise DomainError("mu grid must avoid the origin")
    scale = math.sqrt(TWO_PI / n)
    sing = sorted(set(singular_points(model)) | set(singular_points(weight)))

    def p(lam):
        return np.sqrt(model(lam) * np.abs(weight(lam)))

    full = np.empty(mu_grid.size)
    reduced = np.empty(mu_grid.size)
    for i, mu in enumerate(mu_grid):
        p_mu = float(p(np.array([mu]))[0])

        def ell_p(lam, mu=mu, p_mu=p_mu):
            pl = p(lam)
            return scale * pl * p_mu * dirichlet_abs(n, lam - mu) * pl

        def red(lam, mu=mu):
            return model(lam) * np.abs(weight(lam)) * dirichlet_abs(n, lam - mu)

        brk = _zeros(n, mu) + (graded_breaks(0.0, mu) if sing else [])
        full[i] = float(integrate(ell_p, -math.pi, math.pi, singular=sing, breaks=brk,
                                  max_width=math.pi / n, quad=quad)) / p_mu
        reduced[i] = scale * float(integrate(red, -math.pi, math.pi, singular=sing, breaks=brk,
                                             max_width=math.pi / n, quad=quad))
    return SchurRows(mu_grid, full, reduced)


def schur_rowsup(model, weight, n: int, mu_grid=None, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    return schur_rows(model, weight, n, mu_grid, quad).sup


# --- reports ------------------------------------------------------------------

@dataclass(frozen=True)
class LemmaRow:
    lemma: str
    n: int
    measured: float
    reference_slope: float
    fitted_slope: float
    passed: bool


LEMMA_HEADER = ["lemma", "n", "measured", "reference_slope", "fitted_slope", "pass"]


def _fmt(v: float) -> str:
    return "nan" if v != v else f"{v:.15g}"


def write_lemma_csv(rows: Sequence[LemmaRow], dest, extra: dict | None = None) -> None:
    extra = extra or {}
    with open(FsPath(dest), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LEMMA_HEADER + list(extra))
        for r in rows:
            w.writerow([r.lemma, r.n, _fmt(r.measured), _fmt(r.reference_slope),
                        _fmt(r.fitted_slope), "pass" if r.passed else "fail"] + list(extra.values()))
