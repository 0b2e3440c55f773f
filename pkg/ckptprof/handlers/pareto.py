from ckptprof.config import Config
from ckptprof.misc.manifest import RunManifest
from ckptprof.misc.router import CONFIG, OUT, TREE, CommandRouter, arg
from ckptprof.services.optimizer import pareto
from ckptprof.services.reports import pareto_csv

pareto_router = CommandRouter()


@pareto_router.command(
    "pareto",
    "exhaustive (time, peak) Pareto front over all inhibition subsets",
    TREE,
    CONFIG,
    OUT,
    arg("--guard", type=int, metavar="M", help="refuse trees with more than M static checkpoints"),
)
def cmd_pareto(manifest: RunManifest, config: Config) -> None:
    tree = manifest.load_tree()
    guard = manifest.knobs.get("guard") or config.runtime.pareto_guard
    front = pareto(tree, guard, base=manifest.load_config(), workers=config.runtime.workers)

    text = pareto_csv(front)
    manifest.write("pareto.csv", text)
    print(text, end="")
