"""acsheet command line: run experiments, write CSV + summary, exit 0 iff all PASS."""

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields

from . import config as config_mod
from .criteria import COMMANDS, CRITERIA, simulate_tables
from .errors import AcsheetError, ConfigInvalid
from .report import write_report

log = logging.getLogger("acsheet")


def _config_help():
    cfg = config_mod.ExperimentConfig()
    lines = ["configuration keys (key = value, '#' comments, lists comma separated):"]
    for fl in fields(cfg):
        v = getattr(cfg, fl.name)
        if isinstance(v, tuple):
            v = ", ".join(str(x) for x in v)
        lines.append(f"  {fl.name} = {v}")
    return "\n".join(lines)


def build_parser():
    p = argparse.ArgumentParser(
        prog="acsheet",
        description="Stochastic Allen-Cahn laboratory: simulations and numerical checks.",
        epilog=_config_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("command", choices=sorted(COMMANDS), help="experiment to run")
    p.add_argument("--config", help="path to a key = value config file")
    p.add_argument("--seed", type=int, help="override the base seed (unsigned 64-bit)")
    p.add_argument("--out", help="output directory (default: config key 'out')")
    p.add_argument("--threads", type=int, help="worker threads (default: $ACSHEET_THREADS or 1)")
    p.add_argument("--verbose", action="store_true", help="log progress to stderr")
    return p


def _threads(arg):
    if arg is not None:
        n = arg
    else:
        env = os.environ.get("ACSHEET_THREADS", "").strip()
        try:
            n = int(env) if env else 1
        except ValueError:
            raise ConfigInvalid("ACSHEET_THREADS", f"not an integer: {env!r}") from None
    if n < 1:
        raise ConfigInvalid("threads", "must be >= 1")
    return n


def run(command, cfg, threads=1):
    """Run the criteria behind ``command``; returns (verdicts, extra tables)."""
    verdicts = []
    with ThreadPoolExecutor(max_workers=threads) as pool:
        map_fn = pool.map if threads > 1 else map
        for cid in COMMANDS[command]:
            log.info("criterion %d: %s", cid, CRITERIA[cid].__name__)
            try:
                v = CRITERIA[cid](cfg, map_fn)
            except ConfigInvalid:
                raise
            except AcsheetError as e:
                raise AcsheetError(f"criterion {cid} ({CRITERIA[cid].__name__}): {e}") from e
            log.info("%s", v.line())
            verdicts.append(v)
    extra = simulate_tables(cfg) if command == "simulate" else {}
    return verdicts, extra


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        threads = _threads(args.threads)
        cfg = config_mod.load(args.config, dict(seed=args.seed, out=args.out))
        verdicts, extra = run(args.command, cfg, threads)
    except ConfigInvalid as e:
        print(f"acsheet: invalid configuration: {e}", file=sys.stderr)
        return 2
    except AcsheetError as e:
        print(f"acsheet: {args.command} failed: {e}", file=sys.stderr)
        return 3
    # the output path is left out of the dump so reruns elsewhere compare byte-equal
    write_report(cfg.out, args.command, verdicts, cfg.to_text(exclude=("out",)), extra)
    for v in verdicts:
        print(v.line())
    return 0 if all(v.passed for v in verdicts) else 1


if __name__ == "__main__":
    sys.exit(main())
