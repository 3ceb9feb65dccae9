"""Whittle estimation of the memory exponent with a known slowly varying factor.

The model is ``f_alpha(lam) = |lam|^-alpha L(lam)`` with ``L`` fixed. Contrast,
score and Hessian are

    Q(alpha)   = (1/2pi) int [log f_alpha + I_n / f_alpha]
    Q'(alpha)  = (1/2pi) int log|lam| (I_n / f_alpha - 1)
    Q''(alpha) = (1/2pi) int log^2|lam| I_n / f_alpha

over (-pi, pi). All three are weighted sums over one set of nodes carrying
``I_n / L``, so a fit evaluates the periodogram once.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path as FsPath

import numpy as np
from scipy import optimize

from .errors import ConfigError, DomainError, QuadCLTError
from .quadrature import DEFAULT_QUAD, QuadratureSpec, integrate, rule
from .simulate import Path, mix64, plan_circulant, sample_path
from .spectra import Constant, covariance_sequence, log_square_integral
from .statistic import periodogram, periodogram_nodes

TWO_PI = 2.0 * math.pi
LOG_INT = math.pi * math.log(math.pi) - math.pi  # int_0^pi log(lam) dlam
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class WhittleConfig:
    a: float = 0.0
    b: float = 0.99
    L: object = field(default_factory=Constant)
    quad: QuadratureSpec = DEFAULT_QUAD
    minimizer_tol: float = 1e-8
    fourier_grid: bool = False
    dyadic_levels: int = 40

    def __post_init__(self):
        if not 0.0 <= self.a < self.b < 1.0:
            raise ConfigError("need 0 <= a < b < 1")
        if not self.minimizer_tol > 0:
            raise ConfigError("minimizer_tol must be positive")


@dataclass(frozen=True)
class WhittleData:
    """Nodes ``lam`` on (0, pi) with ``ratio = 2 w I / L`` (integral weights folded in)."""

    lam: np.ndarray
    ratio: np.ndarray
    log_l_integral: float

    @property
    def log_lam(self) -> np.ndarray:
        return np.log(self.lam)


def _log_l_integral(cfg: WhittleConfig) -> float:
    # int_{-pi}^{pi} log L
    return 2.0 * float(integrate(lambda x: np.log(cfg.L(x)), 0.0, math.pi, singular=[0.0], quad=cfg.quad))


def prepare(x, cfg: WhittleConfig) -> WhittleData:
    """Periodogram at the contrast nodes of ``cfg`` (quadrature or Fourier grid)."""
    if isinstance(x, WhittleData):
        return x
    x = np.asarray(x.x if isinstance(x, Path) else x, dtype=float)
    n = x.size
    if cfg.fourier_grid:
        grid = TWO_PI * np.arange(n) / n
        vals = periodogram(x, grid)
        j = np.arange(1, (n - 1) // 2 + 1)
        lam = grid[j]
        # Riemann sum over positive Fourier frequencies, doubled for evenness
        ratio = 2.0 * (TWO_PI / n) * vals[j] / cfg.L(lam)
    else:
        lam, w, vals = periodogram_nodes(x, cfg.quad, levels=cfg.dyadic_levels)
        ratio = 2.0 * w * vals / cfg.L(lam)
    return WhittleData(lam, ratio, _log_l_integral(cfg))


def population_data(model, cfg: WhittleConfig, levels: int = 60) -> WhittleData:
    """Replace ``I_n`` by a spectral density (the population contrast)."""
    lam, w = rule(0.0, math.pi, singular=[0.0], max_width=math.pi / 64, levels=levels,
                  points=cfg.quad.points_per_panel)
    return WhittleData(lam, 2.0 * w * model(lam) / cfg.L(lam), _log_l_integral(cfg))


def _check_alpha(alpha: float, cfg: WhittleConfig) -> None:
    if not cfg.a - 1e-12 <= alpha <= cfg.b + 1e-12:
        raise DomainError(f"alpha={alpha} outside [{cfg.a}, {cfg.b}]")


def contrast(data, alpha: float, cfg: WhittleConfig) -> float:
    _check_alpha(alpha, cfg)
    d = prepare(data, cfg)
    log_f = -alpha * 2.0 * LOG_INT + d.log_l_integral
    return (log_f + float(np.sum(d.ratio * d.lam ** alpha))) / TWO_PI


def score(data, alpha: float, cfg: WhittleConfig) -> float:
    _check_alpha(alpha, cfg)
    d = prepare(data, cfg)
    return (float(np.sum(d.ratio * d.lam ** alpha * d.log_lam)) - 2.0 * LOG_INT) / TWO_PI


def hessian(data, alpha: float, cfg: WhittleConfig) -> float:
    _check_alpha(alpha, cfg)
    d = prepare(data, cfg)
    return float(np.sum(d.ratio * d.lam ** alpha * d.log_lam ** 2)) / TWO_PI


@dataclass(frozen=True)
class WhittleFit:
    alpha_hat: float
    at_boundary: bool
    q_value: float
    iterations: int


def fit(x, cfg: WhittleConfig, bracket_width: float = 1e-2) -> WhittleFit:
    """Golden-section search to a bracket, then a root of the score inside it.

    The contrast is strictly convex, so the score changes sign at most once;
    when it does not change sign on the bracket the minimiser is the
    corresponding end of ``[a, b]``.
    """
    d = prepare(x, cfg)
    lo, hi = cfg.a, cfg.b
    c1 = hi - _GOLDEN * (hi - lo)
    c2 = lo + _GOLDEN * (hi - lo)
    q1, q2 = contrast(d, c1, cfg), contrast(d, c2, cfg)
    it = 0
    while hi - lo > bracket_width:
        it += 1
        if q1 <= q2:
            hi, c2, q2 = c2, c1, q1
            c1 = hi - _GOLDEN * (hi - lo)
            q1 = contrast(d, c1, cfg)
        else:
            lo, c1, q1 = c1, c2, q2
            c2 = lo + _GOLDEN * (hi - lo)
            q2 = contrast(d, c2, cfg)
    s_lo, s_hi = score(d, lo, cfg), score(d, hi, cfg)
    if s_lo > 0:
        alpha = lo
    elif s_hi < 0:
        alpha = hi
    else:
        alpha, res = optimize.brentq(lambda a: score(d, a, cfg), lo, hi, xtol=cfg.minimizer_tol,
                                     full_output=True)
        it += res.iterations
    edge = 10.0 * cfg.minimizer_tol
    at_boundary = abs(alpha - cfg.a) < edge or abs(alpha - cfg.b) < edge
    return WhittleFit(float(alpha), at_boundary, contrast(d, alpha, cfg), it)


def candidate_variances() -> tuple[float, float]:
    """The two candidate limits ``4 pi / L2`` and ``8 pi / L2``, ``L2 = int log^2|lam|``."""
    l2 = log_square_integral()
    return 4.0 * math.pi / l2, 8.0 * math.pi / l2


@dataclass(frozen=True)
class McSummary:
    replicates: int
    n: int
    alpha0: float
    mean_alpha_hat: float
    mean_se: float
    var_scaled: float
    var_se: float
    candidate_vars: tuple[float, float]
    failures: int
    boundary_hits: int
    alpha_hats: np.ndarray = field(repr=False)

    @property
    def z_scores(self) -> tuple[float, float]:
        return tuple((self.var_scaled - c) / self.var_se for c in self.candidate_vars)

    @property
    def adjudicated(self) -> str:
        """``"4pi/L2"``, ``"8pi/L2"``, ``"both"`` or ``"none"`` at 4 standard errors."""
        hits = [abs(z) <= 4.0 for z in self.z_scores]
        if all(hits):
            return "both"
        if hits[0]:
            return "4pi/L2"
        if hits[1]:
            return "8pi/L2"
        return "none"


def mc_normality(cfg: WhittleConfig, model, alpha0: float, n: int, replicates: int,
                 master_seed: int) -> McSummary:
    """Simulate from ``model``, fit each path and summarise ``sqrt(n) (alpha_hat - alpha0)``.

    Replicate ``r`` uses the seed ``mix64(master_seed, r)``. Failing
    replicates (numerical errors) are counted and excluded.
    """
    if replicates < 100:
        raise DomainError("need at least 100 replicates")
    plan = plan_circulant(covariance_sequence(model, n, cfg.quad), n)
    hats = []
    failures = 0
    boundary = 0
    for r in range(replicates):
        try:
            res = fit(sample_path(plan, mix64(master_seed, r)), cfg)
        except QuadCLTError:
            failures += 1
            continue
        boundary += res.at_boundary
        hats.append(res.alpha_hat)
    hats = np.asarray(hats)
    m = hats.size
    if m < 2:
        raise DomainError("fewer than two successful replicates")
    z = math.sqrt(n) * (hats - alpha0)
    c = z - z.mean()
    var = float(c @ c / (m - 1))
    var_se = math.sqrt(max(float(np.mean(c ** 4)) - var * var, 0.0) / m)
    return McSummary(replicates, n, alpha0, float(hats.mean()), float(hats.std(ddof=1) / math.sqrt(m)),
                     var, var_se, candidate_variances(), failures, boundary, hats)


MC_HEADER = ["n", "replicates", "alpha0", "mean_alpha_hat", "mean_se", "var_scaled", "var_se",
             "cand_4pi_L2", "cand_8pi_L2", "z_4pi_L2", "z_8pi_L2", "adjudicated", "failures", "boundary_hits"]


def write_mc_csv(summaries, dest, extra: dict | None = None) -> None:
    extra = extra or {}
    with open(FsPath(dest), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MC_HEADER + list(extra))
        for s in summaries:
            nums = [s.alpha0, s.mean_alpha_hat, s.mean_se, s.var_scaled, s.var_se, *s.candidate_vars, *s.z_scores]
            w.writerow([s.n, s.replicates] + [f"{v:.15g}" for v in nums]
                       + [s.adjudicated, s.failures, s.boundary_hits] + list(extra.values()))


def write_alpha_hats(summary: McSummary, dest) -> None:
    with open(FsPath(dest), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha_hat"])
        for v in summary.alpha_hats:
            w.writerow([f"{v:.15g}"])
