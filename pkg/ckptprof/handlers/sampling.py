from ckptprof.config import Config
from ckptprof.misc.manifest import RunManifest
from ckptprof.misc.router import CONFIG, OUT, SEED, TREE, CommandRouter, arg
from ckptprof.services.optimizer import random_configs
from ckptprof.services.reports import scatter_configs_csv, scatter_csv

sampling_router = CommandRouter()


@sampling_router.command(
    "random",
    "simulate uniformly random inhibition subsets",
    TREE,
    CONFIG,
    OUT,
    SEED,
    arg("--n", type=int, default=250, help="number of configurations"),
)
def cmd_random(manifest: RunManifest, config: Config) -> None:
    tree = manifest.load_tree()
    samples = random_configs(
        tree,
        manifest.knobs["n"],
        manifest.seed or 0,
        base=manifest.load_config(),
        workers=config.runtime.workers,
    )
    manifest.write("scatter.csv", scatter_csv(samples))
    manifest.write("scatter_configs.csv", scatter_configs_csv(samples))
    print(f"configs={len(samples)}")
