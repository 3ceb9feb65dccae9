"""Command line entry point ``quadclt``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 acceptance check failed.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import experiments
from .config import fingerprint_text, load_config
from .errors import ConfigError, QuadCLTError
from .quadrature import QuadratureSpec
from .spectra import Farima, PowerLaw, WhiteNoise

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_ACCEPTANCE = 0, 1, 2, 3

log = logging.getLogger("quadclt")


def _report(result: experiments.ExperimentResult, out_dir: Path, fingerprint: str, seed: int) -> int:
    written = experiments.write_outputs(result, out_dir, fingerprint, seed)
    for c in result.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {experiments.fmt(c.value)} (target {c.target})")
    for p in written:
        log.info("wrote %s", p)
    return EXIT_OK if result.passed else EXIT_ACCEPTANCE


def cmd_run(args) -> int:
    cfg = load_config(args.config, seed=args.seed, out_dir=args.out_dir)
    result = experiments.run_config(cfg, threads=args.threads)
    return _report(result, cfg.output_dir, cfg.fingerprint, cfg.master_seed)


def cmd_lemma(args) -> int:
    ids = list(experiments.LEMMAS) if args.id == "all" else [args.id]
    result = experiments.lemma_experiment(ids, args.n, QuadratureSpec(), args.seed)
    stamp = fingerprint_text(f"lemma {args.id} n={args.n}")
    return _report(result, Path(args.out_dir), stamp, args.seed)


def _whittle_model(args):
    if args.model == "farima":
        return Farima(args.d_frac, 1.0)
    if args.model == "powerlaw":
        return PowerLaw(args.alpha)
    return WhiteNoise()


def cmd_whittle(args) -> int:
    model = _whittle_model(args)
    result, _ = experiments.whittle_experiment(model, args.n, args.reps, args.seed,
                                               fourier_grid=args.fourier_grid)
    stamp = fingerprint_text(f"whittle {args.model} d={args.d_frac} a={args.alpha} n={args.n} "
                             f"reps={args.reps} fourier={args.fourier_grid}")
    return _report(result, Path(args.out_dir), stamp, args.seed)


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors; exit 2 is reserved for numerics
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="quadclt", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the experiment described by a config file")
    run.add_argument("config")
    run.add_argument("--seed", type=int, default=None, help="override experiment.master_seed")
    run.add_argument("--out-dir", default=None, help="override experiment.output_dir")
    run.add_argument("--threads", type=int, default=1, help="worker processes for n sweeps")
    run.set_defaults(func=cmd_run)

    lem = sub.add_parser("lemma", help="run one kernel lemma check (or all)")
    lem.add_argument("id", choices=sorted(experiments.LEMMAS) + ["all"])
    lem.add_argument("--n", type=int, nargs="+", default=None)
    lem.add_argument("--seed", type=int, default=0)
    lem.add_argument("--out-dir", default="out/lemma")
    lem.add_argument("--threads", type=int, default=1, help="accepted for symmetry; lemma checks run serially")
    lem.set_defaults(func=cmd_lemma)

    wh = sub.add_parser("whittle", help="Monte Carlo study of the Whittle estimator")
    wh.add_argument("--n", type=int, nargs="+", default=[4096])
    wh.add_argument("--reps", type=int, default=500)
    wh.add_argument("--seed", type=int, default=0)
    wh.add_argument("--model", choices=["farima", "powerlaw", "whitenoise"], default="farima")
    wh.add_argument("--d-frac", type=float, default=0.2)
    wh.add_argument("--alpha", type=float, default=0.4)
    wh.add_argument("--fourier-grid", action="store_true", help="Riemann sum over Fourier frequencies")
    wh.add_argument("--out-dir", default="out/whittle")
    wh.add_argument("--threads", type=int, default=1, help="accepted for symmetry; replicates run serially")
    wh.set_defaults(func=cmd_whittle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadCLTError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
