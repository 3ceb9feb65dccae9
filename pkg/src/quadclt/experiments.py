"""Experiment pipelines shared by the command line and the acceptance suite.

Each pipeline returns an :class:`ExperimentResult`: CSV tables plus named
checks. Pipelines are deterministic functions of their inputs and seed.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import distance, kernels, oracle, whittle
from .montecarlo import simulate_statistics
from .quadrature import DEFAULT_QUAD, QuadratureSpec
from .rates import rate_fit
from .simulate import mix64
from .spectra import (Constant, Farima, LogPower, PowerLaw, PowerLawWeight, UnitWeight, WhiteNoise,
                      covariance_sequence, farima_sigma0_sq, sigma0_sq, weight_fourier)


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    target: str
    passed: bool


@dataclass
class Table:
    header: list[str]
    rows: list[list] = field(default_factory=list)


@dataclass
class ExperimentResult:
    tables: dict[str, Table] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def merge(self, other: "ExperimentResult") -> "ExperimentResult":
        self.tables.update(other.tables)
        self.checks.extend(other.checks)
        return self


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "pass" if v else "fail"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "nan" if v != v else f"{float(v):.15g}"
    return str(v)


def write_outputs(result: ExperimentResult, out_dir: Path, fingerprint: str, seed: int) -> list[Path]:
    """Write every table and ``summary.csv``; each row carries fingerprint and seed."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    tables = dict(result.tables)
    tables["summary"] = Table(["check", "value", "target", "pass"],
                              [[c.name, c.value, c.target, c.passed] for c in result.checks])
    for name, table in tables.items():
        dest = out_dir / f"{name}.csv"
        with open(dest, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(table.header + ["config_fingerprint", "seed"])
            for row in table.rows:
                w.writerow([fmt(v) for v in row] + [fingerprint, seed])
        written.append(dest)
    return written


def _pmap(func: Callable, items: Sequence, threads: int = 1) -> list:
    if threads <= 1 or len(items) <= 1:
        return [func(i) for i in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


# --- exact law sweeps -----------------------------------------------------------

def exponent_sum(model, weight) -> float:
    return float(model.exponent + weight.exponent)


def sigma0_for(model, weight, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    if isinstance(model, Farima) and isinstance(weight, UnitWeight):
        return farima_sigma0_sq(model.d, model.innov_var)
    return sigma0_sq(model, weight, quad)


@dataclass(frozen=True)
class _SweepJob:
    model: object
    weight: object
    n: int
    cap: int | None
    quad: QuadratureSpec
    with_kappa: bool

    def __call__(self):
        cov = covariance_sequence(self.model, self.n, self.quad)
        wf = weight_fourier(self.weight, self.n, self.quad)
        v = oracle.variance_exact(cov, wf, self.n, self.cap)
        k = oracle.kappa4_exact(cov, wf, self.n, self.cap) if self.with_kappa else float("nan")
        return v, k


def _run_job(job: _SweepJob):
    return job()


def exact_sweep(model, weight, ns: Sequence[int], quad: QuadratureSpec = DEFAULT_QUAD,
                cap: int | None = None, with_kappa: bool = True, threads: int = 1) -> list[oracle.BoundReport]:
    """``V_n``, ``kappa_4`` and the Stein bound at every ``n``."""
    s0 = sigma0_for(model, weight, quad)
    d = exponent_sum(model, weight)
    jobs = [_SweepJob(model, weight, n, cap, quad, with_kappa) for n in ns]
    out = []
    for n, (v, k) in zip(ns, _pmap(_run_job, jobs, threads)):
        bound = oracle.stein_bound(v, k, s0, n, d) if with_kappa else \
            oracle.BoundReport(n, v, s0, k, k / 48.0, float("nan"), d)
        out.append(bound)
    return out


def _slope_check(name, ns, values, target, slack) -> tuple[Check, float]:
    fit = rate_fit(ns, values)
    lo, hi = round(target - slack, 12), round(target + slack, 12)
    return Check(name, fit.slope, f"[{lo:.6g}, {hi:.6g}]", lo <= fit.slope <= hi), fit.slope


def variance_rate(model, weight, ns, quad=DEFAULT_QUAD, cap=None, slack=0.2, threads=1,
                  reports=None) -> ExperimentResult:
    reports = reports or exact_sweep(model, weight, ns, quad, cap, with_kappa=False, threads=threads)
    res = ExperimentResult()
    gaps = [abs(r.V_n - r.sigma0_sq) for r in reports]
    res.tables["variance_rate"] = Table(["n", "V_n", "sigma0_sq", "abs_gap"],
                                        [[r.n, r.V_n, r.sigma0_sq, g] for r, g in zip(reports, gaps)])
    scale = max(1.0, reports[0].sigma0_sq)
    if max(gaps) <= 1e-12 * scale:
        res.checks.append(Check("variance_exact", max(gaps), "<= 1e-12", True))
    elif len(ns) >= 4:
        d = exponent_sum(model, weight)
        res.checks.append(_slope_check("variance_gap_slope", ns, gaps, 2 * d - 1, slack)[0])
    else:
        res.checks.append(Check("variance_gap_slope", float("nan"), ">= 4 points", False))
    return res


def kappa4_rate(model, weight, ns, quad=DEFAULT_QUAD, cap=None, slack=0.2, threads=1,
                reports=None) -> ExperimentResult:
    reports = reports or exact_sweep(model, weight, ns, quad, cap, threads=threads)
    res = ExperimentResult()
    res.tables["kappa4_rate"] = Table(["n", "kappa4", "contraction_sq", "n_kappa4"],
                                      [[r.n, r.kappa4, r.contraction_sq, r.n * r.kappa4] for r in reports])
    if len(ns) >= 4:
        d = exponent_sum(model, weight)
        res.checks.append(_slope_check("contraction_slope", ns, [r.contraction_sq for r in reports],
                                       2 * d - 1, slack)[0])
    else:
        res.checks.append(Check("contraction_slope", float("nan"), ">= 4 points", False))
    return res


def wasserstein_experiment(model, weight, ns, quad=DEFAULT_QUAD, cap=None, replicates=0,
                           empirical_ns=None, seed=0, tol=1e-7, threads=1) -> ExperimentResult:
    """Exact ``d_W`` per ``n`` with the Stein bound; optional empirical cross-check.

    Checks: strictly decreasing, slope ``<= -0.05`` and within ``d - 1/2 +- 0.25``,
    ``d_W <= 3 * bound``, and ``|exact - empirical| <= 3 (se + tol)``.
    """
    reports = exact_sweep(model, weight, ns, quad, cap, threads=threads)
    s0 = reports[0].sigma0_sq
    res = ExperimentResult()
    table = Table(["n", "dW_exact", "dW_empirical", "empirical_se", "stein_bound"])
    exact = []
    emp_ns = set(ns if empirical_ns is None else empirical_ns) if replicates else set()
    for i, r in enumerate(reports):
        cov = covariance_sequence(model, r.n, quad)
        wf = weight_fourier(weight, r.n, quad)
        ex = distance.wasserstein_exact(oracle.chisquare_weights(cov, wf, r.n, cap), math.sqrt(s0), tol)
        exact.append(ex)
        em = se = float("nan")
        if r.n in emp_ns:
            samples = simulate_statistics(cov, wf, r.n, replicates, mix64(seed, i))
            e = distance.wasserstein_empirical(samples, math.sqrt(s0))
            em, se = e.value, e.se
            ok = abs(ex - em) <= 3.0 * (se + tol)
            res.checks.append(Check(f"empirical_crosscheck_n{r.n}", abs(ex - em) / (se + tol), "<= 3", ok))
        table.rows.append([r.n, ex, em, se, r.bound])
        res.checks.append(Check(f"dominance_n{r.n}", ex / r.bound, "<= 3", ex <= 3.0 * r.bound))
    res.tables["wasserstein"] = table
    res.tables["bounds"] = Table(["n", "V_n", "sigma0_sq", "kappa4", "contraction_sq", "bound"],
                                 [[r.n, r.V_n, r.sigma0_sq, r.kappa4, r.contraction_sq, r.bound] for r in reports])
    res.checks.append(Check("strictly_decreasing", float(np.max(np.diff(exact))) if len(exact) > 1 else 0.0,
                            "< 0", bool(np.all(np.diff(exact) < 0))))
    if len(ns) >= 4:
        d = exponent_sum(model, weight)
        slope = rate_fit(ns, exact).slope
        res.checks.append(Check("dW_slope_negative", slope, "<= -0.05", slope <= -0.05))
        res.checks.append(Check("dW_slope_window", slope, f"[{d - 0.75:.6g}, {d - 0.25:.6g}]",
                                d - 0.75 <= slope <= d - 0.25))
    return res


# --- kernel lemmas ----------------------------------------------------------------

LemmaResult = tuple[list[kernels.LemmaRow], list[Check]]
NAN = float("nan")


def _slope_rows(lemma, ns, values, target, slack) -> LemmaResult:
    check, slope = _slope_check(f"{lemma}_slope", ns, values, target, slack)
    rows = [kernels.LemmaRow(lemma, n, v, target, slope, check.passed) for n, v in zip(ns, values)]
    return rows, [check]


def lemma_fejer_mass(ns=None, quad=DEFAULT_QUAD, seed=0) -> LemmaResult:
    ns = ns or (1, 64, 1024)
    rows, checks = [], []
    for n in ns:
        err = abs(kernels.fejer_mass(n, quad) - 1.0)
        rows.append(kernels.LemmaRow("fejer-mass", n, err, NAN, NAN, err < 1e-6))
        checks.append(Check(f"fejer_mass_n{n}", err, "< 1e-6", err < 1e-6))
    return rows, checks


def lemma_convolution(ns=None, quad=DEFAULT_QUAD, seed=0, draws: int = 20) -> LemmaResult:
    rng = np.random.Generator(np.random.PCG64(seed))
    pool = ns or (4, 16, 64, 256, 1024)
    rows = []
    for i in range(draws):
        n = int(pool[i % len(pool)]) if ns else int(2 ** rng.uniform(2, 10))
        lam, mu = rng.uniform(-math.pi, math.pi, 2)
        r = kernels.convolution_identity_residual(n, lam, mu, quad)
        rows.append(kernels.LemmaRow("convolution", n, r, NAN, NAN, r < 1e-6))
    worst = max(r.measured for r in rows)
    return rows, [Check("convolution_residual_max", worst, "< 1e-6", worst < 1e-6)]


def lemma_envelope(ns=None, quad=DEFAULT_QUAD, seed=0) -> LemmaResult:
    ns = ns or (4, 16, 64, 256, 1024)
    c_h, c_min = kernels.envelope_constants(ns)
    rows = [kernels.LemmaRow("envelope-H", max(ns), c_h, NAN, NAN, c_h <= 4.0),
            kernels.LemmaRow("envelope-min", max(ns), c_min, NAN, NAN, c_min <= 4.0)]
    return rows, [Check("envelope_constant_H", c_h, "<= 4", c_h <= 4.0),
                  Check("envelope_constant_min", c_min, "<= 4", c_min <= 4.0)]


BESSEL_POINTS = (
    (Farima(0.2, 1.0), 32, 1.0),
    (PowerLaw(0.4, LogPower(1.0, 1.0)), 64, 0.3),
    (Farima(0.2, 1.0), 64, -0.5),
    (Farima(0.1, 1.0), 32, 2.5),
)


def lemma_bessel(ns=None, quad=DEFAULT_QUAD, seed=0) -> LemmaResult:
    points = BESSEL_POINTS if not ns else [(Farima(0.2, 1.0), n, 1.0) for n in ns]
    rows, checks = [], []
    for model, n, lam in points:
        lhs, rhs = kernels.bessel_check(model, n, lam, quad)
        ok = lhs <= rhs * (1 + 1e-6)
        rows.append(kernels.LemmaRow("bessel", n, lhs / rhs, NAN, NAN, ok))
        checks.append(Check(f"bessel_{type(model).__name__}_n{n}_lam{lam:g}", lhs / rhs, "<= 1 + 1e-6", ok))
    return rows, checks


def lemma_delta(ns=None, quad=DEFAULT_QUAD, seed=0) -> LemmaResult:
    ns = ns or (64, 128, 256, 512, 1024)
    f, g = Farima(0.2, 1.0), PowerLawWeight(0.3)
    vals = kernels.delta_n_sweep(f, g, ns, quad)
    rows, checks = _slope_rows("delta", ns, vals, exponent_sum(f, g) - 1.0, 0.2)
    mono = bool(np.all(vals[1:] <= 1.1 * vals[:-1]))
    checks.append(Check("delta_monotone", float(np.max(vals[1:] / vals[:-1])), "<= 1.1", mono))
    return rows, checks


def lemma_one_denom(ns=None, quad=DEFAULT_QUAD, seed=0) -> LemmaResult:
    ns = ns or tuple(2 ** k for k in range(6, 13))
    vals = [kernels.one_denom_integral(UnitWeight(), 0.0, n, quad) for n in ns]
    rows, checks = _slope_rows("one-denom", ns, vals, -0.5, 0.2)
    slope = checks[0].value
    checks.append(Check("one-denom_slope_upper", slope, "<= -0.35", slope <= -0.35))
    return rows, checks


def lemma_one_denom_sup(ns=None, quad=DEFAULT_QUAD, seed=0) -> LemmaResult:
    ns = ns or (64, 128, 256, 512, 1024)
    h = PowerLawWeight(0.5)
    vals = [max(kernels.one_denom_integral(h, mu, n, quad) for mu in kernels.default_mu_grid(n)) for n in ns]
    return _slope_rows("one-denom-sup", ns, vals, h.exponent - 0.5, 0.2)


def lemma_schur(ns=None, quad=DEFAULT_QUAD, seed=0) -> LemmaResult:
    ns = ns or tuple(2 ** k for k in range(6, 13))
    vals = [kernels.schur_rowsup(WhiteNoise(), UnitWeight(), n, quad=quad) for n in ns]
    return _slope_rows("schur-whitenoise", ns, vals, -1.0, 0.2)


def lemma_schur_farima(ns=None, quad=DEFAULT_QUAD, seed=0) -> LemmaResult:
    ns = ns or tuple(2 ** k for k in range(6, 13))
    f, g = Farima(0.2, 1.0), PowerLawWeight(0.05)
    sweeps = [kernels.schur_rows(f, g, n, quad=quad) for n in ns]
    rows, checks = _slope_rows("schur-farima", ns, [s.sup for s in sweeps], exponent_sum(f, g) - 1.0, 0.2)
    gap = max(s.max_rel_gap for s in sweeps)
    checks.append(Check("schur_forms_agree", gap, "< 1e-8", gap < 1e-8))
    return rows, checks


LEMMAS: dict[str, Callable[..., LemmaResult]] = {
    "fejer-mass": lemma_fejer_mass,
    "convolution": lemma_convolution,
    "envelope": lemma_envelope,
    "bessel": lemma_bessel,
    "delta": lemma_delta,
    "one-denom": lemma_one_denom,
    "one-denom-sup": lemma_one_denom_sup,
    "schur": lemma_schur,
    "schur-farima": lemma_schur_farima,
}

LEMMA_HEADER = ["lemma", "n", "measured", "reference_slope", "fitted_slope", "pass"]


def lemma_experiment(ids: Sequence[str] | None = None, ns=None, quad=DEFAULT_QUAD, seed=0) -> ExperimentResult:
    res = ExperimentResult()
    table = Table(list(LEMMA_HEADER))
    for lemma_id in ids or LEMMAS:
        rows, checks = LEMMAS[lemma_id](ns, quad, seed)
        table.rows.extend([r.lemma, r.n, r.measured, r.reference_slope, r.fitted_slope, r.passed] for r in rows)
        res.checks.extend(checks)
    res.tables["lemmas"] = table
    return res


# --- Whittle ------------------------------------------------------------------------

def whittle_setup(model, quad=DEFAULT_QUAD, alpha0=None) -> tuple[whittle.WhittleConfig, float]:
    """Known-``L`` Whittle configuration matching ``model``."""
    if isinstance(model, Farima):
        cfg, a0 = whittle.WhittleConfig(L=model.factor, quad=quad), model.exponent
    elif isinstance(model, PowerLaw):
        cfg, a0 = whittle.WhittleConfig(L=model.L, quad=quad), model.exponent
    elif isinstance(model, WhiteNoise):
        cfg, a0 = whittle.WhittleConfig(L=Constant(1.0 / (2.0 * math.pi)), quad=quad), 0.0
    else:
        raise ValueError(f"no Whittle parametrisation for {type(model).__name__}")
    return cfg, (a0 if alpha0 is None else alpha0)


def whittle_experiment(model, ns, replicates, seed, quad=DEFAULT_QUAD, alpha0=None,
                       fourier_grid=False) -> tuple[ExperimentResult, list[whittle.McSummary]]:
    cfg, a0 = whittle_setup(model, quad, alpha0)
    if fourier_grid:
        cfg = whittle.WhittleConfig(cfg.a, cfg.b, cfg.L, cfg.quad, cfg.minimizer_tol, True)
    res = ExperimentResult()
    sums = []
    for i, n in enumerate(ns):
        s = whittle.mc_normality(cfg, model, a0, n, replicates, mix64(seed, i))
        sums.append(s)
        z_mean = (s.mean_alpha_hat - a0) / s.mean_se
        res.checks.append(Check(f"whittle_mean_n{n}", z_mean, "|z| <= 3", abs(z_mean) <= 3.0))
        res.checks.append(Check(f"whittle_variance_n{n}", s.var_scaled, "exactly one candidate within 4 SE",
                                s.adjudicated in ("4pi/L2", "8pi/L2")))
    res.tables["whittle_mc"] = Table(
        list(whittle.MC_HEADER),
        [[s.n, s.replicates, s.alpha0, s.mean_alpha_hat, s.mean_se, s.var_scaled, s.var_se, *s.candidate_vars,
          *s.z_scores, s.adjudicated, s.failures, s.boundary_hits] for s in sums])
    for s in sums:
        res.tables[f"alpha_hats_n{s.n}"] = Table(["alpha_hat"], [[v] for v in s.alpha_hats])
    return res, sums


# --- dispatcher -----------------------------------------------------------------------

def run_config(cfg, threads: int = 1) -> ExperimentResult:
    """Execute the experiment named in an :class:`~quadclt.config.ExperimentConfig`."""
    kind = cfg.kind
    args = (cfg.model, cfg.weight, list(cfg.n_list), cfg.quad, cfg.dense_cap)
    if kind == "variance-rate":
        return variance_rate(*args, slack=cfg.slope_slack, threads=threads)
    if kind == "kappa4-rate":
        return kappa4_rate(*args, slack=cfg.slope_slack, threads=threads)
    if kind == "wasserstein":
        return wasserstein_experiment(*args, replicates=cfg.replicates, empirical_ns=cfg.empirical_ns,
                                      seed=cfg.master_seed, threads=threads)
    if kind == "kernels":
        return lemma_experiment(None, None, cfg.quad, cfg.master_seed)
    if kind == "whittle-mc":
        return whittle_experiment(cfg.model, list(cfg.n_list), cfg.replicates, cfg.master_seed, cfg.quad,
                                  cfg.alpha0)[0]
    if kind == "full-report":
        reports = exact_sweep(*args, threads=threads)
        res = variance_rate(*args, slack=cfg.slope_slack, reports=reports)
        res.merge(kappa4_rate(*args, slack=cfg.slope_slack, reports=reports))
        return res.merge(wasserstein_experiment(*args, replicates=cfg.replicates, empirical_ns=cfg.empirical_ns,
                                                seed=cfg.master_seed, threads=threads))
    raise ValueError(f"unknown experiment kind {kind!r}")
