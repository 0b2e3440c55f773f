import logging
from pathlib import Path

from ckptprof.config import Config
from ckptprof.misc.manifest import RunManifest
from ckptprof.misc.router import SEED, CommandRouter, arg
from ckptprof.model.documents import serialize_tree
from ckptprof.model.generator import CostRanges, generate_tree

logger = logging.getLogger(__name__)

gen_router = CommandRouter()

GEN_ARGUMENTS = (
    arg("--n-calls", type=int, default=10),
    arg("--depth", type=int, default=3, help="maximum call nesting"),
    arg("--loops", type=int, default=0, help="loops wrapping random body slices"),
    arg("--time-steps", type=int, default=0, help="wrap the program in a time-stepping loop of this length"),
    arg("--ranges", default="", metavar="KEY=LO:HI,...", help="override sampling ranges"),
)


@gen_router.command(
    "gen",
    "generate a synthetic call tree",
    SEED,
    *GEN_ARGUMENTS,
    arg("--out", dest="out_file", metavar="PATH", help="tree file to write (stdout when omitted)"),
)
def cmd_gen(manifest: RunManifest, config: Config) -> None:
    knobs = manifest.knobs
    tree = generate_tree(
        manifest.seed or 0,
        knobs["n_calls"],
        knobs["depth"],
        CostRanges.parse(knobs["ranges"]),
        n_loops=knobs["loops"],
        time_steps=knobs["time_steps"],
    )
    text = serialize_tree(tree)
    if not knobs.get("out_file"):
        print(text, end="")
        return

    path = Path(knobs["out_file"])
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {tree.name} with {len(tree.static_refs())} static checkpoints to {path}")
