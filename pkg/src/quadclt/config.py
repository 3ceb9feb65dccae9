"""Experiment configuration files.

INI syntax (one nesting level). Example::

    [experiment]
    kind = variance-rate
    n_list = 128, 256, 512, 1024
    master_seed = 20240101
    replicates = 0
    output_dir = out/farima

    [model]
    kind = farima
    d_frac = 0.2

    [weight]
    kind = unit

    [quadrature]
    abs_tol = 1e-11

Experiment keys: ``kind`` (one of ``KINDS``), ``n_list``, ``replicates``,
``master_seed``, ``output_dir``, ``dense_cap``, ``alpha0`` (Whittle truth,
defaults to the model's exponent) and ``empirical_n`` (subset of ``n_list``
where the Wasserstein experiment also simulates). ``[acceptance]`` accepts
``slope_slack``.

Model kinds: ``whitenoise``, ``farima`` (``d_frac``, ``innov_var``),
``powerlaw`` (``alpha``, ``L``), ``fgn`` (``hurst``, ``var``). Weight kinds:
``unit``, ``powerlaw`` (``beta``, ``L``, ``sign``), ``logscore``,
``logsqhess`` (both relative to the model). ``L`` is ``constant:c`` or
``logpower:c,a``.
"""
from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, QuadCLTError
from .oracle import dense_cap
from .quadrature import QuadratureSpec
from .spectra import (Constant, Farima, Fgn, LogPower, LogScore, LogSqHess, PowerLaw, PowerLawWeight,
                      UnitWeight, WhiteNoise)

KINDS = ("variance-rate", "kappa4-rate", "wasserstein", "kernels", "whittle-mc", "full-report")
EXACT_KINDS = ("variance-rate", "kappa4-rate", "wasserstein", "full-report")

_ALLOWED = {
    "experiment": {"kind", "n_list", "replicates", "master_seed", "output_dir", "dense_cap", "alpha0",
                   "empirical_n"},
    "model": {"kind", "d_frac", "innov_var", "alpha", "l", "hurst", "var"},
    "weight": {"kind", "beta", "l", "sign"},
    "quadrature": {"dyadic_levels", "points_per_panel", "abs_tol"},
    "acceptance": {"slope_slack"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    model: object
    weight: object
    n_list: tuple[int, ...]
    replicates: int
    master_seed: int
    quad: QuadratureSpec
    output_dir: Path
    fingerprint: str
    dense_cap: int | None = None
    alpha0: float | None = None
    slope_slack: float = 0.2
    empirical_ns: tuple[int, ...] | None = None


def _get(section, key, cast, default=None, required=False):
    name = f"{section.name}.{key}"
    if key not in section:
        if required:
            raise ConfigError(f"missing key {name}")
        return default
    raw = section[key]
    try:
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {name}: {raw!r} ({exc})") from None


def parse_slow_varying(text: str):
    kind, _, args = text.strip().partition(":")
    vals = [float(v) for v in args.split(",")] if args.strip() else []
    kind = kind.strip().lower()
    if kind == "constant":
        return Constant(*vals) if vals else Constant()
    if kind == "logpower" and len(vals) == 2:
        return LogPower(*vals)
    raise ValueError("expected constant[:c] or logpower:c,a")


def _build(section, what: str, builders: dict):
    kind = _get(section, "kind", str, required=True).strip().lower()
    if kind not in builders:
        raise ConfigError(f"unknown {what} kind {kind!r} in {section.name}.kind")
    try:
        return builders[kind](section)
    except ConfigError:
        raise
    except QuadCLTError as exc:
        raise ConfigError(f"invalid {what} in [{section.name}]: {exc}") from None


def _model(section):
    return _build(section, "model", {
        "whitenoise": lambda s: WhiteNoise(),
        "farima": lambda s: Farima(_get(s, "d_frac", float, required=True), _get(s, "innov_var", float, 1.0)),
        "powerlaw": lambda s: PowerLaw(_get(s, "alpha", float, required=True),
                                       _get(s, "l", parse_slow_varying, Constant())),
        "fgn": lambda s: Fgn(_get(s, "hurst", float, required=True), _get(s, "var", float, 1.0)),
    })


def _weight(section, model):
    return _build(section, "weight", {
        "unit": lambda s: UnitWeight(),
        "powerlaw": lambda s: PowerLawWeight(_get(s, "beta", float, required=True),
                                             _get(s, "l", parse_slow_varying, Constant()),
                                             _get(s, "sign", int, 1)),
        "logscore": lambda s: LogScore(model),
        "logsqhess": lambda s: LogSqHess(model),
    })


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.replace(",", " ").split())


def fingerprint_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def load_config(path, seed: int | None = None, out_dir=None) -> ExperimentConfig:
    """Parse and validate a config file; ``seed``/``out_dir`` override the file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    for sec in cp.sections():
        if sec not in _ALLOWED:
            raise ConfigError(f"unknown section [{sec}]")
        for key in cp[sec]:
            if key not in _ALLOWED[sec]:
                raise ConfigError(f"unknown key {sec}.{key}")
    for sec in ("experiment", "model"):
        if sec not in cp:
            raise ConfigError(f"missing section [{sec}]")
    exp = cp["experiment"]
    kind = _get(exp, "kind", str, required=True).strip()
    if kind not in KINDS:
        raise ConfigError(f"unknown experiment.kind {kind!r}; expected one of {', '.join(KINDS)}")
    n_list = _get(exp, "n_list", _int_list, required=kind != "kernels") or ()
    if any(n < 1 for n in n_list):
        raise ConfigError("experiment.n_list entries must be positive")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ConfigError("experiment.n_list must be strictly increasing")
    cap = _get(exp, "dense_cap", int)
    if kind in EXACT_KINDS and n_list and max(n_list) > dense_cap(cap):
        raise ConfigError(f"experiment.n_list exceeds dense_cap={dense_cap(cap)}")
    replicates = _get(exp, "replicates", int, 0)
    if replicates < 0:
        raise ConfigError("experiment.replicates must be nonnegative")
    master_seed = seed if seed is not None else _get(exp, "master_seed", int, 0)
    if master_seed < 0:
        raise ConfigError("experiment.master_seed must be nonnegative")
    model = _model(cp["model"])
    weight = _weight(cp["weight"], model) if "weight" in cp else UnitWeight()
    quad = QuadratureSpec()
    if "quadrature" in cp:
        q = cp["quadrature"]
        try:
            quad = QuadratureSpec(_get(q, "dyadic_levels", int, quad.dyadic_levels),
                                  _get(q, "points_per_panel", int, quad.points_per_panel),
                                  _get(q, "abs_tol", float, quad.abs_tol))
        except ValueError as exc:
            raise ConfigError(f"bad [quadrature]: {exc}") from None
    slack = _get(cp["acceptance"], "slope_slack", float, 0.2) if "acceptance" in cp else 0.2
    output = Path(out_dir) if out_dir is not None else Path(_get(exp, "output_dir", str, "out"))
    empirical = _get(exp, "empirical_n", _int_list)
    if empirical is not None and not set(empirical) <= set(n_list):
        raise ConfigError("experiment.empirical_n must be a subset of experiment.n_list")
    return ExperimentConfig(kind, model, weight, tuple(n_list), replicates, master_seed, quad, output,
                            fingerprint_text(text), cap, _get(exp, "alpha0", float), slack, empirical)
