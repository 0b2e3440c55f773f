import logging
from typing import Any, Dict

from ckptprof.config import Config
from ckptprof.misc.manifest import RunManifest
from ckptprof.misc.router import CONFIG, OUT, TREE, CommandRouter, arg
from ckptprof.services.optimizer import Strategy, StrategyKind, optimize
from ckptprof.services.reports import suggestions_csv, trajectory_csv

logger = logging.getLogger(__name__)

optimize_router = CommandRouter()

STRATEGY_ARGUMENTS = (
    arg("--strategy", choices=[kind.value for kind in StrategyKind], default=StrategyKind.TIME_FIRST.value),
    arg("--batch", type=int, default=1, help="suggestions applied per re-profile"),
    arg("--budget", type=int, metavar="BYTES", help="never let the peak stack exceed BYTES"),
    arg("--defer-above", type=int, metavar="BYTES", help="time-first: defer suggestions costing more than BYTES"),
)


def strategy_from_knobs(knobs: Dict[str, Any]) -> Strategy:
    return Strategy(
        kind=StrategyKind(knobs.get("strategy") or StrategyKind.TIME_FIRST.value),
        batch=knobs.get("batch") or 1,
        budget_bytes=knobs.get("budget"),
        defer_above_bytes=knobs.get("defer_above"),
    )


@optimize_router.command(
    "optimize",
    "follow suggestions greedily, re-profiling after each step",
    TREE,
    CONFIG,
    OUT,
    *STRATEGY_ARGUMENTS,
)
def cmd_optimize(manifest: RunManifest, config: Config) -> None:
    tree = manifest.load_tree()
    strategy = strategy_from_knobs(manifest.knobs)
    trajectory = optimize(tree, manifest.load_config(), strategy)

    text = trajectory_csv(trajectory)
    manifest.write("trajectory.csv", text)
    manifest.write("suggestions.csv", suggestions_csv(trajectory))
    print(text, end="")
