"""Command-line entry point: ``disscalc <experiment> --config cfg.json``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigInvalid, DisscalcError
from .harness import EXPERIMENTS, ExperimentConfig, besov_summary, replay, run, write_outputs
from .scalar_functions import load_function

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigInvalid("argv", message)


def build_parser():
    parser = _Parser(prog="disscalc", description=__doc__)
    parser.add_argument("experiment", choices=EXPERIMENTS + ("replay",))
    parser.add_argument("records", nargs="?", help="records file (replay only)")
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--function", help="function JSON (besov-norm)")
    parser.add_argument("--mode", choices=("coef_sum", "grid"), default="coef_sum")
    parser.add_argument("--grid-res", type=int, default=4096)
    parser.add_argument("--order", choices=("first", "second", "ab12", "ba21"))
    return parser


def _fail(exc, field=None):
    payload = {"error": type(exc).__name__, "message": str(exc)}
    if field is not None:
        payload["field"] = field
    print(json.dumps(payload), file=sys.stderr)
    return EXIT_INVALID


def _load_config(args):
    data = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigInvalid("config", f"cannot read {args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigInvalid("config", f"invalid JSON ({exc.msg} at line {exc.lineno})") from None
        if not isinstance(data, dict):
            raise ConfigInvalid("config", "top level must be a JSON object")
    if data.get("experiment") not in (None, args.experiment):
        raise ConfigInvalid("experiment", f"config names {data['experiment']!r}")
    data.pop("experiment", None)
    if args.order:
        data["order"] = args.order
    if args.function:
        data["function"] = args.function
    if args.experiment == "besov-norm":
        data.setdefault("sup_mode", args.mode)
        data.setdefault("grid_res", args.grid_res)
    return ExperimentConfig.from_dict(data, args.experiment)


def _besov_direct(args):
    try:
        f = load_function(args.function)
    except (OSError, ValueError) as exc:
        raise ConfigInvalid("function", str(exc)) from None
    if args.grid_res < 2:
        raise ConfigInvalid("grid_res", "expected an integer >= 2")
    print(json.dumps(besov_summary(f, args.mode, args.grid_res)))
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.threads < 1:
            raise ConfigInvalid("threads", "expected an integer >= 1")
        if args.experiment == "replay":
            if not args.records:
                raise ConfigInvalid("records", "replay needs a records file")
            report = replay(args.records)
            print(json.dumps(report))
            return EXIT_OK if report["ok"] else EXIT_FAIL
        if args.experiment == "besov-norm" and args.function and not args.config:
            return _besov_direct(args)
        cfg = _load_config(args)
        result = run(cfg, threads=args.threads)
        out = args.out or cfg.output
        path = write_outputs(result, out)
        failed = [r["trial"] for r in result.records if not r["ok"]]
        print(json.dumps({"experiment": cfg.experiment, "records": str(path),
                          "trials": len(result.records), "failed": failed}))
        return result.exit_code
    except ConfigInvalid as exc:
        return _fail(exc, exc.field)
    except (DisscalcError, ValueError, OSError) as exc:
        return _fail(exc)


if __name__ == "__main__":
    sys.exit(main())
