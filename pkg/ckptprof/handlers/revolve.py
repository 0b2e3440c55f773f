from ckptprof.config import Config
from ckptprof.misc.manifest import RunManifest
from ckptprof.misc.router import CommandRouter, arg
from ckptprof.services.binomial import binomial_cost
from ckptprof.services.reports import format_revolve_table, revolve_row

revolve_router = CommandRouter()


@revolve_router.command(
    "revolve",
    "binomial checkpointing cost of l steps with d snapshot slots",
    arg("--l", type=int, required=True, help="number of time steps"),
    arg("--d", type=int, nargs="+", required=True, help="snapshot slots (several values give several rows)"),
)
def cmd_revolve(manifest: RunManifest, config: Config) -> None:
    l = manifest.knobs["l"]
    rows = [revolve_row(l, d, binomial_cost(l, d)) for d in manifest.knobs["d"]]
    print(format_revolve_table(rows), end="")
