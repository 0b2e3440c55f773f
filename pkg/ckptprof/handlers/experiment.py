"""One-command reproduction of the random-vs-greedy comparison on a synthetic code.

gen -> random -> optimize (both strategies) -> binomial variants of the time
loop -> pareto when the tree is small enough, all into one directory.
"""
import argparse
import logging
from pathlib import Path
from typing import Any, Dict, List

from ckptprof.config import Config
from ckptprof.misc.errors import VerificationError
from ckptprof.misc.formatting import fmt_bytes, fmt_seconds
from ckptprof.misc.manifest import RunManifest
from ckptprof.misc.router import Argument, arg
from ckptprof.model.documents import serialize_tree
from ckptprof.model.generator import TIME_LOOP_ID, generate_tree
from ckptprof.model.tree import CallTree, CheckpointConfig
from ckptprof.services.optimizer import (
    Strategy,
    StrategyKind,
    TrajectoryPoint,
    dominance_fraction,
    optimize,
    pareto,
    random_configs,
)
from ckptprof.services.reports import (
    pareto_csv,
    read_pareto_csv,
    read_scatter_configs_csv,
    read_scatter_csv,
    read_trajectory_csv,
    scatter_configs_csv,
    scatter_csv,
    suggestions_csv,
    trajectory_csv,
    verify_pareto,
    verify_scatter,
    verify_trajectory,
)
from ckptprof.services.simulator import simulate_primal

logger = logging.getLogger(__name__)

BINOMIAL_SLOTS = (5, 20, 80)

EXPERIMENT_DEFAULTS: Dict[str, Any] = {
    "out": "out",
    "seed": 0,
    "n_calls": 85,
    "depth": 4,
    "n": 250,
    "time_steps": 80,
    "verify": False,
}


def _flag(name: str, **options: Any) -> Argument:
    # Own dest, so subcommand flags of the same name cannot overwrite it.
    return arg(f"--{name.replace('_', '-')}", dest=f"experiment_{name}", **options)


EXPERIMENT_ARGUMENTS = (
    arg("--experiment", choices=["fig6"], help="run a whole experiment instead of one subcommand"),
    _flag("out", metavar="DIR", help="experiment output directory [out]"),
    _flag("seed", type=int, help="[0]"),
    _flag("n_calls", type=int, help="[85]"),
    _flag("depth", type=int, help="[4]"),
    _flag("n", type=int, help="random configurations [250]"),
    _flag("time_steps", type=int, help="[80]"),
    _flag("verify", action="store_true", default=None, help="re-read every CSV and re-simulate its rows"),
)


def experiment_flags(args: argparse.Namespace) -> Dict[str, Any]:
    """The experiment flags given on the command line."""
    values = vars(args)
    return {
        name: values[f"experiment_{name}"]
        for name in EXPERIMENT_DEFAULTS
        if values.get(f"experiment_{name}") is not None
    }


def experiment_manifest(args: argparse.Namespace) -> RunManifest:
    knobs = {**EXPERIMENT_DEFAULTS, **experiment_flags(args)}
    return RunManifest(
        command=args.experiment,
        out_dir=Path(knobs.pop("out")),
        seed=knobs.pop("seed"),
        knobs=knobs,
    )


def _write_trajectory(manifest: RunManifest, name: str, trajectory: List[TrajectoryPoint]) -> None:
    manifest.write(f"trajectory_{name}.csv", trajectory_csv(trajectory))
    manifest.write(f"suggestions_{name}.csv", suggestions_csv(trajectory))


def _summary_lines(name: str, trajectory: List[TrajectoryPoint]) -> List[str]:
    first, last = trajectory[0], trajectory[-1]
    return [
        f"{name}.steps={len(trajectory) - 1}",
        f"{name}.initial_time_s={fmt_seconds(first.time_s)}",
        f"{name}.initial_peak_bytes={fmt_bytes(first.peak_bytes)}",
        f"{name}.final_time_s={fmt_seconds(last.time_s)}",
        f"{name}.final_peak_bytes={fmt_bytes(last.peak_bytes)}",
    ]


def _verify(manifest: RunManifest, tree: CallTree, initial: Dict[str, CheckpointConfig], with_pareto: bool) -> None:
    def read(name: str) -> str:
        return manifest.output(name).read_text(encoding="utf-8")

    problems = verify_scatter(tree, read_scatter_csv(read("scatter.csv")), read_scatter_configs_csv(read("scatter_configs.csv")))
    for name, config0 in initial.items():
        problems += verify_trajectory(tree, read_trajectory_csv(read(f"trajectory_{name}.csv")), config0)
    if with_pareto:
        problems += verify_pareto(tree, read_pareto_csv(read("pareto.csv")))

    for problem in problems:
        logger.error(problem)
    if problems:
        raise VerificationError(f"{len(problems)} row(s) disagree with the simulator")
    logger.info("Every written row matches a fresh simulation")


def run_fig6(manifest: RunManifest, config: Config) -> None:
    knobs = manifest.knobs
    seed = manifest.seed or 0
    time_steps = knobs.get("time_steps") or 0

    tree = generate_tree(seed, knobs["n_calls"], knobs["depth"], time_steps=time_steps)
    manifest.write("tree.json", serialize_tree(tree))
    refs = tree.static_refs()
    logger.info(f"Generated {tree.name}: {len(refs)} static checkpoints, time loop of {time_steps} steps")

    samples = random_configs(tree, knobs["n"], seed, workers=config.runtime.workers)
    manifest.write("scatter.csv", scatter_csv(samples))
    manifest.write("scatter_configs.csv", scatter_configs_csv(samples))
    scatter = [(cost.time_s, cost.peak_bytes) for _, cost in samples]

    summary = [
        f"tree={tree.name}",
        f"static_checkpoints={len(refs)}",
        f"primal_time_s={fmt_seconds(simulate_primal(tree))}",
        f"random_configs={len(samples)}",
    ]

    initial: Dict[str, CheckpointConfig] = {}
    for kind in StrategyKind:
        initial[kind.name.lower()] = CheckpointConfig()
    if time_steps:
        for d in BINOMIAL_SLOTS:
            initial[f"time_first_d{d}"] = CheckpointConfig(binomial={TIME_LOOP_ID: d})

    for name, config0 in initial.items():
        kind = StrategyKind.MEMORY_FIRST if name == "memory_first" else StrategyKind.TIME_FIRST
        trajectory = optimize(tree, config0, Strategy(kind=kind))
        _write_trajectory(manifest, name, trajectory)
        summary += _summary_lines(name, trajectory)
        summary.append(f"{name}.dominance_fraction={dominance_fraction(scatter, trajectory):.6f}")

    with_pareto = len(refs) <= config.runtime.pareto_guard
    if with_pareto:
        front = pareto(tree, config.runtime.pareto_guard, workers=config.runtime.workers)
        manifest.write("pareto.csv", pareto_csv(front))
        summary.append(f"pareto_points={len(front)}")
    else:
        logger.warning(f"Skipping the Pareto front: {len(refs)} static checkpoints exceed the guard")
        summary.append("pareto_points=skipped")

    text = "\n".join(summary) + "\n"
    manifest.write("summary.txt", text)
    print(text, end="")

    if knobs.get("verify"):
        _verify(manifest, tree, initial, with_pareto)


EXPERIMENTS = {
    "fig6": run_fig6,
}
