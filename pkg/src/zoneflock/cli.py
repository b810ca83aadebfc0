"""
Command-line driver.

    flock run --scenario FILE --out DIR [--seed N] [--steps N]
              [--model zone|simplified] [--measurement position|bearing|bearing-fd]
              [--strict-paper-mode] [--figures]
    flock figures --run DIR [--out DIR] [--no-png]
    flock check --scenario FILE
    flock scenarios

Exit status: 0 success, 1 invalid input (bad flags or scenario), 2 runtime fault.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from .export import ExportError, write_metrics, write_summary, write_trajectory
from .metrics import compute_metrics, summarize
from .scenario import (
    Scenario,
    ScenarioError,
    ScenarioIOError,
    ValidationError,
    build_world,
    parse_scenario,
    shipped_scenarios,
)
from .sim import MEASUREMENTS, MODELS, run

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2

log = logging.getLogger("zoneflock")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunResult:
    out_dir: Path
    frames: int
    summary: dict


def apply_overrides(
    scn: Scenario,
    model: Optional[str] = None,
    measurement: Optional[str] = None,
    strict_paper_mode: bool = False,
) -> Scenario:
    if model is not None and model != scn.model:
        if model == "simplified" and scn.simplified is None:
            raise ValidationError("--model simplified needs a 'simplified' block in the scenario")
        if model == "zone" and scn.zones is None:
            raise ValidationError("--model zone needs an 'agents.zones' block in the scenario")
        scn = replace(scn, model=model)
    if measurement is not None:
        scn = replace(scn, measurement=measurement)
    if strict_paper_mode:
        scn = replace(scn, options=replace(scn.options, strict_paper_mode=True))
    return scn


def run_experiment(scn: Scenario, out_dir, seed: Optional[int] = None, steps: Optional[int] = None) -> RunResult:
    """Simulate ``scn`` and write trajectory.csv, metrics.csv and summary.json into ``out_dir``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ExportError(f"cannot create output directory {out}: {exc.strerror or exc}") from None
    n_steps = scn.steps if steps is None else steps
    if n_steps < 1:
        raise UsageError(f"--steps must be >= 1, got {n_steps}")
    used_seed = scn.seed if seed is None else seed
    world = build_world(scn, used_seed)
    _, traj = run(world, n_steps)
    m = compute_metrics(traj)
    summary = summarize(m)
    summary.update(
        seed=used_seed,
        steps=n_steps,
        dt_s=scn.dt,
        agents=scn.count,
        dimension=scn.dimension,
        model=scn.model,
        measurement=scn.measurement,
        strict_paper_mode=scn.options.strict_paper_mode,
    )
    write_trajectory(traj, out / "trajectory.csv")
    write_metrics(m, traj.ids, out / "metrics.csv")
    write_summary(summary, out / "summary.json")
    return RunResult(out, traj.n_frames, summary)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="flock", description="Zone-based and simplified flocking simulator.")
    p.add_argument("-v", "--verbose", action="store_true", help="log measurement warnings and progress")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="simulate a scenario and export CSVs")
    r.add_argument("--scenario", required=True, help="scenario file, or the name of a shipped scenario")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--seed", type=_nonneg_int, help="override the scenario seed")
    r.add_argument("--steps", type=_positive_int, help="override the number of steps")
    r.add_argument("--model", choices=MODELS)
    r.add_argument("--measurement", choices=MEASUREMENTS)
    r.add_argument("--strict-paper-mode", action="store_true", help="disable the interpretive extensions")
    r.add_argument("--figures", action="store_true", help="also write figure panels next to the CSVs")

    f = sub.add_parser("figures", help="write figure panels (CSV and PNG) for a finished run")
    f.add_argument("--run", required=True, help="directory holding metrics.csv and trajectory.csv")
    f.add_argument("--out", help="output directory (default: the run directory)")
    f.add_argument("--no-png", action="store_true", help="write only the panel CSVs")

    c = sub.add_parser("check", help="validate a scenario file")
    c.add_argument("--scenario", required=True)

    sub.add_parser("scenarios", help="list the shipped scenarios")
    return p


def _resolve_scenario(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    shipped = shipped_scenarios()
    if name in shipped:
        return shipped[name]
    if p.stem in shipped and p.suffix == ".scn" and p.parent == Path("."):
        return shipped[p.stem]
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"flock: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")

    try:
        if args.command == "scenarios":
            for name, path in shipped_scenarios().items():
                print(f"{name}\t{path}")
            return EXIT_OK
        if args.command == "check":
            scn = parse_scenario(_resolve_scenario(args.scenario))
            print(f"ok: {scn.count} agents, {scn.dimension}D, model {scn.model}, {scn.steps} steps")
            return EXIT_OK
        if args.command == "figures":
            for path in _render(args.run, args.out, not args.no_png):
                print(path)
            return EXIT_OK
        scn = parse_scenario(_resolve_scenario(args.scenario))
        scn = apply_overrides(scn, args.model, args.measurement, args.strict_paper_mode)
        result = run_experiment(scn, args.out, args.seed, args.steps)
        s = result.summary
        print(
            f"{result.frames} frames -> {result.out_dir}  min distance {s['min_distance_m']:.3f} m, "
            f"final mean speed {s['mean_final_speed_m_s']:.3f} m/s, max |u| {s['max_control_m_s2']:.3f}"
            if s["min_distance_m"] is not None
            else f"{result.frames} frames -> {result.out_dir}"
        )
        if args.figures:
            _render(result.out_dir, None, True)
        return EXIT_OK
    except (UsageError, ScenarioIOError, FileNotFoundError) as exc:
        # an unreadable scenario is bad input, not a simulation fault
        print(f"flock: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ScenarioError as exc:
        print(f"flock: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ExportError, OSError) as exc:
        print(f"flock: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - every other fault maps to the runtime exit code
        log.debug("unhandled fault", exc_info=True)
        print(f"flock: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def _render(run_dir, out_dir, png: bool):
    from .report import render_figures

    return render_figures(run_dir, out_dir, png)


if __name__ == "__main__":
    sys.exit(main())
