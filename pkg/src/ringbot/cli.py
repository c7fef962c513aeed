"""Command-line entry point.

Exit status: 0 on success, 1 on a configuration error, 2 on a runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ringbot.errors import ConfigError, RingbotError
from ringbot.harness import (
    METRICS_COLUMNS,
    STEP_COLUMNS,
    TRANSPORTS,
    HarnessConfig,
    process_images,
    run_batch,
    run_loopback,
)
from ringbot.policy import POLICY_NAMES
from ringbot.selfcheck import run_selfcheck

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

OUTPUT_HELP = f"""\
outputs (in --out):
  metrics.csv               one row per episode, columns:
                            {", ".join(METRICS_COLUMNS)}
  episode_NNNN.jsonl        one JSON object per step, then a summary object
  episode_NNNN_steps.csv    per-step columns: {", ".join(STEP_COLUMNS)}
"""


def _add_common(p: argparse.ArgumentParser, episodes: bool = True) -> None:
    p.add_argument("--config", type=Path, help="harness config JSON")
    p.add_argument("--seed", type=int, help="base seed; episode k uses seed + k")
    p.add_argument("--out", type=Path, help="output directory")
    if episodes:
        p.add_argument("--episodes", type=int, help="number of episodes")
        p.add_argument("--policy", choices=POLICY_NAMES, help="red robot policy")
        p.add_argument("--opponent", choices=POLICY_NAMES, help="blue robot policy")
        p.add_argument("--layout", choices=["standard", "seeded_random"], help="ring layout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ringbot", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="group", required=True)

    sim = sub.add_parser("sim", help="simulated episodes").add_subparsers(dest="command", required=True)
    run = sim.add_parser("run", help="run episodes and write metrics", epilog=OUTPUT_HELP,
                         formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_common(run)

    vision = sub.add_parser("vision", help="ring detection on images").add_subparsers(dest="command", required=True)
    proc = vision.add_parser("process", help="detect and localize rings in images")
    proc.add_argument("images", type=Path, help="image file or directory")
    _add_common(proc, episodes=False)
    proc.add_argument("--calibration", type=Path, help="camera calibration JSON")
    proc.add_argument("--pipeline", type=Path, help="pipeline config JSON")
    proc.add_argument("--depth", type=Path, help="directory holding <stem>.depth or <stem>_depth.png")
    proc.add_argument("--debug-images", action="store_true", help="write threshold, blur and masked images")

    link = sub.add_parser("link", help="protocol link").add_subparsers(dest="command", required=True)
    loop = link.add_parser("loopback", help="run episodes with policies answering over the link",
                           epilog=OUTPUT_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_common(loop)
    loop.add_argument("--transport", choices=TRANSPORTS, help="link transport (default memory)")

    sub.add_parser("selfcheck", help="run the embedded invariant checks")
    return parser


def load_config(args) -> HarnessConfig:
    cfg = HarnessConfig.load(args.config) if args.config else HarnessConfig()
    overrides = {
        "seed": "seed", "out": "out", "episodes": "episodes", "policy": "policy",
        "opponent": "opponent", "layout": "layout", "transport": "transport",
        "calibration": "calibration", "pipeline": "pipeline_config",
    }
    data = {f: getattr(cfg, f) for f in cfg.__dataclass_fields__}
    for arg, name in overrides.items():
        value = getattr(args, arg, None)
        if value is not None:
            data[name] = value
    return HarnessConfig(**data)


def _print_summary(summary) -> None:
    for line in summary.lines():
        print(line)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage; a bad command line is a config error here
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.group == "selfcheck":
            results = run_selfcheck()
            for r in results:
                print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
            return EXIT_OK if all(r.passed for r in results) else EXIT_RUNTIME
        cfg = load_config(args)
        if args.group == "sim":
            _print_summary(run_batch(cfg))
            print(f"metrics: {cfg.out / 'metrics.csv'}")
        elif args.group == "link":
            _print_summary(run_loopback(cfg))
            print(f"metrics: {cfg.out / 'metrics.csv'}")
        elif args.group == "vision":
            done, failed = process_images(args.images, cfg, args.depth, args.debug_images)
            print(f"processed {done} image(s), {failed} failed; results in {cfg.out}")
            if failed:
                return EXIT_RUNTIME
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RingbotError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
