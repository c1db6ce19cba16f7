"""Command-line entry point: run one scenario, all figure presets, or the validation suite."""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .errors import CavmolError
from .scenarios_io import figure_presets, load_config, run_scenario, write_csv
from .validate import run_validation


def _run_one(config, out_dir: Path) -> Path:
    result = run_scenario(config)
    path = out_dir / f"{config.name}.csv"
    write_csv(result, path)
    return path


def _run_preset_by_name(args: tuple[str, str]) -> str:
    name, out_dir = args
    preset = next(p for p in figure_presets() if p.name == name)
    return str(_run_one(preset, Path(out_dir)))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cavmol",
        description="Simulate molecular-only dynamics under quantum and classical light.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario from a JSON config")
    p_run.add_argument("--config", required=True, help="path to the scenario JSON")
    p_run.add_argument("--out", required=True, help="output directory")

    p_fig = sub.add_parser("figures", help="run all figure presets")
    p_fig.add_argument("--out", required=True, help="output directory")
    p_fig.add_argument("--jobs", type=int, default=1, help="parallel scenario workers")

    sub.add_parser("validate", help="run the validation suite and report")

    args = parser.parse_args(argv)

    if args.command == "run":
        try:
            config = load_config(args.config)
            out_dir = Path(args.out)
            out_dir.mkdir(parents=True, exist_ok=True)
            path = _run_one(config, out_dir)
        except (CavmolError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print(path)
        return 0

    if args.command == "figures":
        try:
            out_dir = Path(args.out)
            out_dir.mkdir(parents=True, exist_ok=True)
            names = [p.name for p in figure_presets()]
            if args.jobs > 1:
                with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                    for path in pool.map(
                        _run_preset_by_name, [(n, str(out_dir)) for n in names]
                    ):
                        print(path)
            else:
                for preset in figure_presets():
                    print(_run_one(preset, out_dir))
        except (CavmolError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        return 0

    results = run_validation()
    print(json.dumps([r.as_dict() for r in results], indent=2))
    failed = [r for r in results if not r.passed]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: {r.detail}", file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
