"""Regenerate the frozen reference values in this directory.

Every value is computed without importing quadclt: closed forms in mpmath,
adaptive scipy quadrature on hand-split intervals, or dense numpy linear
algebra on closed-form covariances. Run from the repository root::

    python3 tests/fixtures/generate.py
"""
from __future__ import annotations

import csv
import math
from pathlib import Path

import mpmath as mp
import numpy as np
from scipy import integrate, linalg, stats

HERE = Path(__file__).resolve().parent
mp.mp.dps = 40
TWO_PI = 2 * math.pi


def farima_r(d: float, K: int) -> list[float]:
    # r(k) = Gamma(1-2d) Gamma(k+d) / (Gamma(d) Gamma(1-d) Gamma(k+1-d)), unit innovation variance
    d = mp.mpf(d)
    if d == 0:
        return [1.0] + [0.0] * K
    c = mp.gamma(1 - 2 * d) / (mp.gamma(d) * mp.gamma(1 - d))
    return [float(c * mp.gamma(k + d) / mp.gamma(k + 1 - d)) for k in range(K + 1)]


def farima_f(d, lam):
    return abs(2 * np.sin(lam / 2)) ** (-2 * d) / TWO_PI


def dn(n, w):
    t = np.arange(1, n + 1)
    return np.exp(1j * w * t).sum() / math.sqrt(TWO_PI * n)


def split_quad(func, cuts):
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        total += integrate.quad(func, a, b, limit=400, epsabs=1e-14, epsrel=1e-13)[0]
    return total


def cuts_for(n, centres, extra=()):
    pts = {-math.pi, math.pi, *extra}
    for c in centres:
        for j in range(-2 * n, 2 * n + 1):
            p = c + TWO_PI * j / n
            if -math.pi < p < math.pi:
                pts.add(p)
    return sorted(pts)


def scalars() -> dict[str, float]:
    out = {}
    lp = mp.log(mp.pi)
    out["farima_d02_density_at_pi"] = float(2 ** mp.mpf(-0.4) / (2 * mp.pi))
    out["farima_d02_r0"] = float(mp.gamma(0.6) / mp.gamma(0.8) ** 2)
    out["powerlaw_a04_r0"] = float(2 * mp.pi ** 0.6 / 0.6)
    out["powerlaw_weight_b03_gamma0"] = float(mp.pi ** -0.3 / 0.7)
    out["log_square_integral"] = float(2 * mp.pi * (lp ** 2 - 2 * lp + 2))
    out["logscore_sigma0_sq"] = float(2 * (lp ** 2 - 2 * lp + 2))
    out["whittle_population_hessian"] = float((lp ** 2 - 2 * lp + 2))
    out["farima_d02_sigma0_sq"] = float(2 * mp.gamma(1 - 0.8) / mp.gamma(1 - 0.4) ** 2)
    out["chi2_1_cdf_at_1"] = float(mp.erf(1 / mp.sqrt(2)))
    out["chi2_16_cdf_at_16"] = float(mp.gammainc(8, 0, 8, regularized=True))

    # E I_n(1) for Farima d=0.2, n=256, from the Fejer-weighted covariance sum
    n = 256
    r = np.array(farima_r(0.2, n))
    k = np.arange(1, n)
    out["farima_d02_mean_periodogram_lam1_n256"] = float(
        (r[0] + 2 * np.sum((1 - k / n) * r[1:n] * np.cos(k))) / TWO_PI)

    # minimal relative eigenvalue of the first circulant embedding, n=1024 (m=2048)
    n = 1024
    m = 2048
    r = np.array(farima_r(0.2, m // 2))
    row = np.concatenate([r, r[1:-1][::-1]])
    eig = np.fft.fft(row).real
    out["farima_d02_n1024_embed_min_rel_eig"] = float(eig.min() / eig.max())

    # E_{n,f}(0.5, 0.8) for Farima d=0.2, n=64
    n, lam, mu = 64, 0.5, 0.8
    f_lam = farima_f(0.2, lam)

    def e_int(w, part):
        v = (farima_f(0.2, w) - f_lam) * dn(n, lam - w) * dn(n, w - mu)
        return v.real if part == 0 else v.imag

    cuts = cuts_for(n, [lam, mu], [0.0])
    out["enf_farima_d02_n64_re"] = split_quad(lambda w: e_int(w, 0), cuts)
    out["enf_farima_d02_n64_im"] = split_quad(lambda w: e_int(w, 1), cuts)

    # one-denominator integral, h = |l|^-0.5, mu = 0.1, n = 256
    n, mu = 256, 0.1
    cuts = cuts_for(n, [mu], [0.0])
    out["one_denom_b05_mu01_n256"] = split_quad(
        lambda w: abs(w) ** -0.5 * abs(dn(n, w - mu)), cuts)

    # Bessel contract for Farima d=0.2, n=32, lam=1: mu -> E(lam, mu) is a trigonometric
    # polynomial, so int |E|^2 dmu = (1/n) sum_t |c_t|^2 with
    # c_t = int (f(w) - f(lam)) D_n(lam - w) e^{itw} dw
    n, lam = 32, 1.0
    f_lam = farima_f(0.2, lam)
    cuts = cuts_for(n, [lam], [0.0])
    total = 0.0
    for t in range(1, n + 1):
        re = split_quad(lambda w: ((farima_f(0.2, w) - f_lam) * dn(n, lam - w) * np.exp(1j * t * w)).real, cuts)
        im = split_quad(lambda w: ((farima_f(0.2, w) - f_lam) * dn(n, lam - w) * np.exp(1j * t * w)).imag, cuts)
        total += re * re + im * im
    out["bessel_farima_d02_n32_lam1_lhs"] = total / n
    out["bessel_farima_d02_n32_lam1_rhs"] = TWO_PI / n * split_quad(
        lambda w: (farima_f(0.2, w) - f_lam) ** 2 * abs(dn(n, lam - w)) ** 2, cuts)

    # W1 between (chi2_16 - 16)/4 and N(0, 2)
    sig = math.sqrt(2.0)
    cdf = lambda x: stats.chi2.cdf(4 * x + 16, 16)
    out["w1_whitenoise_n16_sigma_sqrt2"] = split_quad(
        lambda x: abs(cdf(x) - stats.norm.cdf(x / sig)), [-40, -4, -2, -1, 0, 1, 2, 4, 8, 16, 60])

    # W1 between (chi2_4 - 4)/sqrt(8) and N(0, 1): four equal weights 1/sqrt(8)
    s8 = math.sqrt(8.0)
    cdf4 = lambda x: stats.chi2.cdf(s8 * x + 4, 4)
    edge = -4 / s8
    out["w1_four_equal_weights_sigma1"] = split_quad(
        lambda x: abs(cdf4(x) - stats.norm.cdf(x)), [-40, -4, edge, -1, 0, 1, 2, 4, 8, 16, 60])
    return out


def write_scalars(values: dict[str, float]) -> None:
    with open(HERE / "derived.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["name", "value"])
        for k, v in values.items():
            w.writerow([k, f"{v:.15g}"])


def write_farima_autocov() -> None:
    with open(HERE / "farima_autocov.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        ds = (-0.2, 0.1, 0.2, 0.35)
        w.writerow(["k"] + [f"d={d:g}" for d in ds])
        cols = [farima_r(d, 128) for d in ds]
        for k in range(129):
            w.writerow([k] + [f"{c[k]:.15g}" for c in cols])


def write_chisquare_weights() -> None:
    n = 64
    r = np.array(farima_r(0.2, n - 1))
    lam = linalg.eigvalsh(linalg.toeplitz(r)) / math.sqrt(n)
    lam = lam[np.argsort(-np.abs(lam), kind="stable")]
    with open(HERE / "chisquare_weights_farima_d02_n64.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lambda"])
        for v in lam:
            w.writerow([f"{v:.15g}"])


if __name__ == "__main__":
    write_scalars(scalars())
    write_farima_autocov()
    write_chisquare_weights()
