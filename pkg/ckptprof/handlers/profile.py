import logging
from pathlib import Path

from ckptprof.config import Config
from ckptprof.misc.errors import TraceError
from ckptprof.misc.manifest import RunManifest, read_input
from ckptprof.misc.router import CONFIG, TREE, CommandRouter, arg
from ckptprof.services.profiler import profile, profile_run
from ckptprof.services.reports import format_report_table, report_csv
from ckptprof.services.trace_log import parse_event_log

logger = logging.getLogger(__name__)

profile_router = CommandRouter()


@profile_router.command(
    "profile",
    "predict the effect of inhibiting each active checkpoint",
    TREE,
    CONFIG,
    arg("--trace", metavar="PATH", help="profile a recorded event log instead of simulating"),
    arg("--out", metavar="DIR", help="also write report.csv into DIR"),
)
def cmd_profile(manifest: RunManifest, config: Config) -> None:
    trace = manifest.knobs.get("trace")
    if trace:
        report = profile(parse_event_log(read_input(Path(trace), TraceError)))
    else:
        tree = manifest.load_tree()
        _, report = profile_run(tree, manifest.load_config())

    logger.info(f"{len(report.suggestions)} suggestion(s)")
    print(format_report_table(report), end="")
    if manifest.out_dir is not None:
        manifest.write("report.csv", report_csv(report))
