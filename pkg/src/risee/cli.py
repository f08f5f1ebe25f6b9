"""Command-line experiment runner.

    risee sweep --config configs/default.cfg --out results/
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import platform
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import __version__
from . import experiments as ex
from .alternating import STRATEGIES
from .config import ConfigError, load_config

log = logging.getLogger("risee")

EXIT_CONFIG = 2


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (np.integer,)):
        return str(int(x))
    return str(x)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(r[h]) for h in header])


def write_manifest(path: Path, args, settings, cfg_bytes: bytes, outputs) -> None:
    manifest = {
        "subcommand": args.command,
        "config_path": str(args.config),
        "config_sha256": hashlib.sha256(cfg_bytes).hexdigest(),
        "seed": settings.config.seed,
        "resolved_config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(settings.config).items()},
        "T": settings.T,
        "S": settings.S,
        "strategy": settings.strategy,
        "outputs": outputs,
        "versions": {"risee": __version__, "python": platform.python_version(), "numpy": np.__version__},
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="risee", description="EE maximization for RIS-aided massive MIMO with ZF.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("sweep", "EE, active antennas and budget utilization vs P_TX for every strategy"),
        ("ccdf", "CCDFs of lower-bound rates and EE per strategy"),
        ("rician", "EE vs P_TX for several Rician factors"),
        ("convergence", "sum-rate traces of the phase optimizers"),
        ("timing", "wall-clock time per phase optimizer"),
        ("validate-lb", "Monte Carlo check of the rate lower bound"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, default=Path("results"))
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--strategy", default=None, choices=STRATEGIES + ("all",))
        p.add_argument("--method", default=None, choices=("analytic", "sfp", "gradient"))
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--setups", type=int, default=None, help="override s_setups")
        p.add_argument("--realizations", type=int, default=None, help="override t_realizations")
    return parser


def _strategies(name):
    return STRATEGIES if name == "all" else (name,)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg_bytes = Path(args.config).read_bytes()
        settings = load_config(args.config)
    except (OSError, ConfigError) as exc:
        print(f"risee: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    cfg = settings.config
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    if args.method is not None:
        cfg = cfg.replace(method=args.method)
    S = args.setups or settings.S
    T = args.realizations or settings.T
    settings = replace(settings, config=cfg, S=S, T=T, strategy=args.strategy or settings.strategy)
    args.out.mkdir(parents=True, exist_ok=True)
    threads = max(1, args.threads)
    outputs = []

    def emit(name, header, rows):
        write_csv(args.out / name, header, rows)
        outputs.append(name)
        log.info("wrote %s (%d rows)", args.out / name, len(rows))

    if args.command == "sweep":
        strategies = STRATEGIES if args.strategy is None else _strategies(args.strategy)
        rows = ex.sweep(cfg, settings.p_tx_dbm_sweep, S, strategies, threads=threads)
        emit("sweep.csv", ex.SWEEP_HEADER, rows)
    elif args.command == "rician":
        strategies = _strategies(settings.strategy)
        rows = ex.rician(cfg, settings.k1_sweep, settings.p_tx_dbm_sweep, S, strategies, threads=threads)
        emit("rician.csv", ex.SWEEP_HEADER, rows)
    elif args.command == "ccdf":
        strategies = STRATEGIES if args.strategy is None else _strategies(args.strategy)
        samples = ex.ccdf_samples(cfg, S, strategies, threads=threads)
        emit("ccdf_samples.csv", ex.CCDF_SAMPLES_HEADER, samples)
        emit("ccdf.csv", ex.CCDF_HEADER, ex.ccdf_rows(samples, cfg))
    elif args.command in ("convergence", "timing"):
        methods = (args.method,) if args.method else ("analytic", "sfp", "gradient")
        results = ex.convergence(cfg, S, methods, threads=threads)
        if args.command == "convergence":
            emit("convergence.csv", ex.CONVERGENCE_HEADER, ex.convergence_rows(results, cfg))
        else:
            emit("timing.csv", ex.TIMING_HEADER, ex.timing_rows(results, cfg))
    elif args.command == "validate-lb":
        strategy = settings.strategy if settings.strategy != "all" else "p_v_M"
        rows = ex.validate_lb(cfg, S, T, strategy, threads=threads)
        emit("validate_lb.csv", ex.VALIDATE_HEADER, rows)
        bad = sum(1 for r in rows if not r["valid"])
        log.info("lower bound violated on %d of %d (setup, UE) pairs", bad, len(rows))

    write_manifest(args.out / f"manifest_{args.command}.json", args, settings, cfg_bytes, outputs)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
