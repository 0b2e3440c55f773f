import logging

from ckptprof.config import Config
from ckptprof.misc.formatting import fmt_bytes, fmt_seconds
from ckptprof.misc.manifest import RunManifest
from ckptprof.misc.router import CONFIG, TREE, CommandRouter, arg
from ckptprof.model.events import TraceEvent
from ckptprof.services.simulator import emit_events, simulate_primal
from ckptprof.services.trace_log import format_event_log

logger = logging.getLogger(__name__)

simulate_router = CommandRouter()


@simulate_router.command(
    "simulate",
    "run the adjoint of a tree under a config and print its cost",
    TREE,
    CONFIG,
    arg("--events", metavar="PATH", help="also write the profiling event log"),
)
def cmd_simulate(manifest: RunManifest, config: Config) -> None:
    tree = manifest.load_tree()
    checkpoints = manifest.load_config()

    events = []
    sink = events.append if manifest.knobs.get("events") else None
    cost = emit_events(tree, checkpoints, sink)
    primal = simulate_primal(tree)
    slowdown = cost.time_s / primal if primal > 0 else float("inf")

    print(f"time_s={fmt_seconds(cost.time_s)}")
    print(f"peak_bytes={fmt_bytes(cost.peak_bytes)}")
    print(f"turn_bytes={fmt_bytes(cost.turn_bytes)}")
    print(f"primal_time_s={fmt_seconds(primal)}")
    print(f"slowdown={fmt_seconds(slowdown)}")
    for ref, count in cost.primal_reexecutions.items():
        print(f"reexecutions[{ref}]={count}")
    for loop_id, count in cost.step_executions.items():
        print(f"step_executions[{loop_id}]={count}")

    if sink is not None:
        path = manifest.knobs["events"]
        with open(path, "w", encoding="utf-8") as f:
            f.write(format_event_log(events))
        logger.info(f"Wrote {len(events)} events to {path}")
