"""Tab-separated event logs: one profiling callback per line."""
import csv
import io
from typing import Iterable, List

from ckptprof.misc.errors import TraceError
from ckptprof.misc.formatting import fmt_seconds
from ckptprof.model.events import EventKind, TraceEvent
from ckptprof.model.tree import StaticRef

FIELDS = ["kind", "proc", "site", "clock_s", "stack_bytes"]


def format_event_log(events: Iterable[TraceEvent]) -> str:
    out = io.StringIO()
    w = csv.writer(out, delimiter="\t", lineterminator="\n")
    for event in events:
        proc = event.ref.proc if event.ref else ""
        site = "" if event.ref is None or event.ref.site is None else event.ref.site
        w.writerow([event.kind.value, proc, site, fmt_seconds(event.clock_s), event.stack_bytes])
    return out.getvalue()


def _parse_row(row: List[str], index: int) -> TraceEvent:
    if len(row) != len(FIELDS):
        raise TraceError(f"expected {len(FIELDS)} fields, got {len(row)}", index=index)
    kind, proc, site, clock, stack = row
    try:
        event_kind = EventKind(kind)
        ref = None
        if proc:
            ref = StaticRef(proc, int(site) if site else None)
        elif event_kind is not EventKind.TURN:
            raise TraceError(f"{kind} without a checkpoint reference", index=index)
        return TraceEvent(kind=event_kind, ref=ref, clock_s=float(clock), stack_bytes=int(stack))
    except ValueError as e:
        raise TraceError(f"malformed event: {e}", index=index) from e


def parse_event_log(text: str) -> List[TraceEvent]:
    """Inverse of `format_event_log`. Event indices in errors count from 0."""
    rows = [row for row in csv.reader(io.StringIO(text), delimiter="\t") if row]
    return [_parse_row(row, index) for index, row in enumerate(rows)]
