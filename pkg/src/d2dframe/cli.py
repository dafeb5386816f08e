"""
Command line entry point.

    d2d run <experiment> --config cfg.json [--seed N] [--trials N] [--out f.csv] [--plot]
    d2d single --config cfg.json [--seed N] [--orthogonal | --no-orthogonal]
    d2d validate --config cfg.json

Exit status is 0 on success and 2 for any configuration problem.
"""

import argparse
import dataclasses
import json
import math
import os
import sys

from .harness.config import EXPERIMENTS, ConfigError, load_config
from .harness.experiments import run_experiment, single_shot
from .harness.report import write_csv, write_plot_script, write_timing

EXIT_CONFIG = 2


def _parser():
    p = argparse.ArgumentParser(prog="d2d")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte-Carlo sweep and write CSV")
    run.add_argument("experiment", choices=[e for e in EXPERIMENTS if e != "single-shot"])
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--trials", type=int)
    run.add_argument("--workers", type=int)
    run.add_argument("--out")
    run.add_argument("--plot", action="store_true",
                     help="also write a plot script and a PNG next to the CSV")

    single = sub.add_parser("single", help="run the decision pipeline once")
    single.add_argument("--config", required=True)
    single.add_argument("--seed", type=int)
    single.add_argument("--out")
    orth = single.add_mutually_exclusive_group()
    orth.add_argument("--orthogonal", dest="orthogonal", action="store_true", default=None)
    orth.add_argument("--no-orthogonal", dest="orthogonal", action="store_false")

    val = sub.add_parser("validate", help="check a config file against the schema")
    val.add_argument("--config", required=True)
    return p


def _override(cfg, args):
    kw = {}
    if getattr(args, "seed", None) is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        kw["master_seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        kw["trials"] = args.trials
    if getattr(args, "workers", None) is not None:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        kw["workers"] = args.workers
    # replace() re-runs validation; sweeps are already merged so pass them on
    return dataclasses.replace(cfg, **kw) if kw else cfg


def _json_default(o):
    if isinstance(o, float) and not math.isfinite(o):
        return repr(o)
    if dataclasses.is_dataclass(o):
        return dataclasses.asdict(o)
    raise TypeError(type(o).__name__)


def _cmd_run(args):
    cfg = _override(load_config(args.config, name=args.experiment), args)
    out = args.out or cfg.output or "%s.csv" % cfg.name
    result = run_experiment(cfg)
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    write_csv(result, out)
    written = [out]
    side = write_timing(result, out)
    if side:
        written.append(side)
    if args.plot:
        from .harness.plotting import render
        written.append(write_plot_script(result, out))
        written.append(render(result, os.path.splitext(out)[0] + ".png"))
    for w in written:
        print(w)
    return 0


def _cmd_single(args):
    cfg = _override(load_config(args.config, name="single-shot"), args)
    rec = single_shot(cfg, orthogonal_available=args.orthogonal)
    body = rec.to_dict()
    text = json.dumps(body, indent=2, default=_json_default)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _cmd_validate(args):
    cfg = load_config(args.config)
    print("ok: %s, %d trials, seed %d" % (cfg.name, cfg.trials, cfg.master_seed))
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handler = {"run": _cmd_run, "single": _cmd_single, "validate": _cmd_validate}
    try:
        return handler[args.command](args)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
