"""Command-line entry point: ``lapspec <experiment> ...`` and ``lapspec verify-all``."""
from __future__ import annotations

import argparse
import sys

from . import defaults as dft
from .errors import LapspecError
from .harness import EXPERIMENTS, ExperimentConfig, execute
from .verify import CRITERIA, PROFILES, verify_all


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lapspec", description="Extreme eigenvalues of random Laplacians.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--trials", type=int, required=True)
        p.add_argument("--k", type=int, default=dft.DEFAULT_K)
        p.add_argument("--delta", type=float, default=dft.DEFAULT_DELTA)
        p.add_argument("--seed", type=_u64, default=dft.DEFAULT_SEED)
        p.add_argument("--threads", type=int, default=1, help="worker processes, 0 = all cores")
        p.add_argument("--out", default=None, help="JSONL output path (sidecars written next to it)")
        if name in ("locallaw", "concentration"):
            p.add_argument("--single", action="store_true", help="only size n and the given delta")
            p.add_argument("--resamples", type=int, default=dft.LOCALLAW_RESAMPLES)
        if name in ("gumbel", "diag-max"):
            p.add_argument("--centering", choices=("eigen", "iid"), default=None)
    v = sub.add_parser("verify-all", help="run the acceptance criteria")
    v.add_argument("--profile", choices=PROFILES, default="quick")
    v.add_argument("--seed", type=_u64, default=dft.DEFAULT_SEED)
    v.add_argument("--threads", type=int, default=1)
    v.add_argument("--only", type=int, nargs="*", choices=sorted(CRITERIA), default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify-all":
            results = verify_all(args.profile, args.seed, args.threads, args.only,
                                 echo=lambda s: print(s, flush=True))
            ok = all(r.passed for r in results)
            print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
            return 0 if ok else 1
        options = {}
        if getattr(args, "single", False):
            options["sweep"] = False
        if getattr(args, "resamples", None) not in (None, dft.LOCALLAW_RESAMPLES):
            options["resamples"] = args.resamples
        if getattr(args, "centering", None):
            options["centering"] = args.centering
        cfg = ExperimentConfig(args.command, args.n, args.trials, args.k, args.delta, args.seed,
                               args.out, args.threads, options)
        result = execute(cfg)
    except LapspecError as exc:
        print(f"lapspec: error: {exc}", file=sys.stderr)
        return 2
    print(result.report.summary())
    for path in result.artifacts.values():
        print(f"wrote {path}")
    return 0 if result.report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
