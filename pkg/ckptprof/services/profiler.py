"""Single-run profiling of checkpoint cost/benefits.

The profiler consumes the callback stream of one adjoint run and, for every
active static checkpoint X, predicts the change of run time, turn-point stack
and peak stack if X alone were inhibited. Round trips are folded bottom-up and
right to left: each END_REVERSE combines the finished child round trip with
the accumulated suffix of its enclosing frame.

All stack sizes are absolute bytes within the run.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Tuple

from ckptprof.misc.errors import TraceError
from ckptprof.model.events import EventKind, TraceEvent
from ckptprof.model.tree import CallTree, CheckpointConfig, StaticRef
from ckptprof.services.simulator import AdjointCost, emit_events

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DeltaTriple:
    dt: float = 0.0
    dtn: int = 0
    dpk: int = 0


ZERO = DeltaTriple()


@dataclass(frozen=True)
class FrameStats:
    t: float
    tn: int
    pk: int
    deltas: Dict[StaticRef, DeltaTriple] = field(default_factory=dict)


@dataclass(frozen=True)
class PendingOccurrence:
    ref: StaticRef
    t1: float
    t2: float
    snp: int


@dataclass(frozen=True)
class Suggestion:
    ref: StaticRef
    occurrences: int
    dt: float
    dtn: int
    dpk: int
    category: int


@dataclass(frozen=True)
class ProfileReport:
    root: FrameStats
    suggestions: Tuple[Suggestion, ...]
    occurrences: Dict[StaticRef, int]
    multi_site_procs: FrozenSet[str] = frozenset()

    def suggestion(self, ref: StaticRef) -> Optional[Suggestion]:
        return next((s for s in self.suggestions if s.ref == ref), None)


FrameObserver = Callable[[FrameStats, FrameStats, FrameStats], None]


def categorize(delta: DeltaTriple) -> int:
    if delta.dpk < 0:
        return 1
    if delta.dpk == 0:
        return 2
    return 3


def absorb(inner: FrameStats, suffix: FrameStats) -> FrameStats:
    """Fold a nested round trip that is not a checkpoint of X into its frame.

    Used for binomial time steps and, through `combine`, for every X other
    than the checkpoint that owns `inner`.
    """
    pk = max(suffix.pk, inner.pk)
    deltas: Dict[StaticRef, DeltaTriple] = {}
    for ref in inner.deltas.keys() | suffix.deltas.keys():
        d_in = inner.deltas.get(ref, ZERO)
        d_sf = suffix.deltas.get(ref, ZERO)
        deltas[ref] = DeltaTriple(
            dt=d_sf.dt + d_in.dt,
            dtn=d_sf.dtn,
            dpk=max(suffix.pk + d_sf.dpk, inner.pk + d_in.dpk) - pk,
        )
    return FrameStats(t=suffix.t + inner.t, tn=suffix.tn, pk=pk, deltas=deltas)


def combine(c: FrameStats, suffix: FrameStats, occ: PendingOccurrence, c_ref: StaticRef) -> FrameStats:
    """Stats of the round trip on C;D from those of C and of its suffix D."""
    merged = absorb(c, suffix)
    pk = merged.pk
    d_c = c.deltas.get(c_ref, ZERO)
    d_sf = suffix.deltas.get(c_ref, ZERO)
    deltas = dict(merged.deltas)
    deltas[c_ref] = DeltaTriple(
        dt=d_sf.dt + d_c.dt - occ.t1 - occ.t2,
        dtn=c.tn + d_c.dtn + d_sf.dtn - occ.snp,
        dpk=max(c.tn + d_c.dtn + suffix.pk + d_sf.dpk - occ.snp, c.pk + d_c.dpk) - pk,
    )
    return FrameStats(t=occ.t1 + suffix.t + occ.t2 + c.t, tn=suffix.tn, pk=pk, deltas=deltas)


class _Frame:
    """One open round trip: the root, a checkpoint body or a binomial step."""

    def __init__(self, kind: EventKind, ref: Optional[StaticRef], start_clock: float,
                 occurrence: Optional[PendingOccurrence] = None):
        self.kind = kind
        self.ref = ref
        self.start_clock = start_clock
        self.occurrence = occurrence
        self.pending: List[PendingOccurrence] = []
        self.t1_total = 0.0
        self.writing: Optional[Tuple[StaticRef, float, int, bool]] = None
        self.reading: Optional[Tuple[PendingOccurrence, float]] = None
        self.suffix: Optional[FrameStats] = None
        self.last_clock = start_clock

    def close(self, clock: float) -> FrameStats:
        if self.suffix is None:
            raise TraceError(f"round trip of {self.ref or 'root'} closed without a TURN")
        if self.pending or self.writing or self.reading:
            raise TraceError(f"round trip of {self.ref or 'root'} closed with unmatched checkpoints")
        tail = clock - self.last_clock
        return FrameStats(t=self.suffix.t + tail, tn=self.suffix.tn, pk=self.suffix.pk, deltas=self.suffix.deltas)


class Profiler:
    """Online consumer of the profiling callbacks of one run."""

    def __init__(self, observer: Optional[FrameObserver] = None):
        self.observer = observer
        self.frames: List[_Frame] = [_Frame(EventKind.TURN, None, 0.0)]
        self.occurrences: Dict[StaticRef, int] = {}
        self.clock = 0.0
        self.count = 0
        self.report: Optional[ProfileReport] = None

    def _fail(self, message: str) -> None:
        raise TraceError(message, index=self.count)

    def __call__(self, event: TraceEvent) -> None:
        self.feed(event)

    def feed(self, event: TraceEvent) -> None:
        if self.report is not None:
            self._fail("event after the end of the run")
        if event.clock_s < self.clock:
            self._fail(f"clock regression from {self.clock} to {event.clock_s}")
        self.clock = event.clock_s
        if not self.frames:
            self._fail("event after the root round trip was closed")
        frame = self.frames[-1]
        handler = getattr(self, f"_on_{event.kind.value.lower()}")
        handler(frame, event)
        self.count += 1

    # forward sweep ---------------------------------------------------------------
    def _on_snp_write(self, frame: _Frame, event: TraceEvent) -> None:
        if frame.suffix is not None:
            self._fail(f"SNP_WRITE of {event.ref} after the turn point")
        if frame.writing is not None:
            self._fail(f"SNP_WRITE of {event.ref} inside the advance of {frame.writing[0]}")
        frame.writing = (event.ref, event.clock_s, event.stack_bytes, False)

    def _on_begin_advance(self, frame: _Frame, event: TraceEvent) -> None:
        if frame.writing is None or frame.writing[0] != event.ref or frame.writing[3]:
            self._fail(f"BEGIN_ADVANCE of {event.ref} without a matching SNP_WRITE")
        ref, clock, snp, _ = frame.writing
        frame.writing = (ref, clock, snp, True)

    def _on_end_advance(self, frame: _Frame, event: TraceEvent) -> None:
        if frame.writing is None or frame.writing[0] != event.ref or not frame.writing[3]:
            self._fail(f"END_ADVANCE of {event.ref} without a matching BEGIN_ADVANCE")
        ref, clock, snp, _ = frame.writing
        t1 = event.clock_s - clock
        frame.pending.append(PendingOccurrence(ref=ref, t1=t1, t2=0.0, snp=snp))
        frame.t1_total += t1
        frame.writing = None

    def _on_turn(self, frame: _Frame, event: TraceEvent) -> None:
        if frame.suffix is not None:
            self._fail("second TURN in one round trip")
        if frame.writing is not None:
            self._fail(f"TURN inside the advance of {frame.writing[0]}")
        elapsed = event.clock_s - frame.start_clock - frame.t1_total
        frame.suffix = FrameStats(t=elapsed, tn=event.stack_bytes, pk=event.stack_bytes)
        frame.last_clock = event.clock_s

    # backward sweep --------------------------------------------------------------
    def _backward_frame(self, frame: _Frame, event: TraceEvent) -> FrameStats:
        if frame.suffix is None:
            self._fail(f"{event.kind.value} of {event.ref} before the turn point")
        return frame.suffix

    def _on_snp_read(self, frame: _Frame, event: TraceEvent) -> None:
        suffix = self._backward_frame(frame, event)
        if frame.reading is not None:
            self._fail(f"SNP_READ of {event.ref} while {frame.reading[0].ref} is being read")
        if not frame.pending or frame.pending[-1].ref != event.ref:
            expected = frame.pending[-1].ref if frame.pending else "nothing"
            self._fail(f"SNP_READ of {event.ref} does not match the forward sweep (expected {expected})")
        occurrence = frame.pending.pop()
        frame.suffix = FrameStats(
            t=suffix.t + (event.clock_s - frame.last_clock), tn=suffix.tn, pk=suffix.pk, deltas=suffix.deltas
        )
        frame.last_clock = event.clock_s
        frame.reading = (occurrence, event.clock_s)

    def _on_begin_reverse(self, frame: _Frame, event: TraceEvent) -> None:
        if frame.reading is None or frame.reading[0].ref != event.ref:
            self._fail(f"BEGIN_REVERSE of {event.ref} without a matching SNP_READ")
        occurrence, read_clock = frame.reading
        frame.reading = None
        matched = PendingOccurrence(
            ref=occurrence.ref, t1=occurrence.t1, t2=event.clock_s - read_clock, snp=occurrence.snp
        )
        self.frames.append(_Frame(EventKind.BEGIN_REVERSE, event.ref, event.clock_s, matched))

    def _on_end_reverse(self, frame: _Frame, event: TraceEvent) -> None:
        if frame.kind is not EventKind.BEGIN_REVERSE or frame.ref != event.ref:
            self._fail(f"END_REVERSE of {event.ref} does not close the current round trip")
        child = self._close(frame, event)
        parent = self.frames[-1]
        combined = combine(child, parent.suffix, frame.occurrence, frame.ref)
        self._fold(parent, child, combined, event)
        self.occurrences[frame.ref] = self.occurrences.get(frame.ref, 0) + 1

    def _on_begin_step(self, frame: _Frame, event: TraceEvent) -> None:
        suffix = self._backward_frame(frame, event)
        if frame.reading is not None:
            self._fail(f"BEGIN_STEP of {event.ref} while {frame.reading[0].ref} is being read")
        frame.suffix = FrameStats(
            t=suffix.t + (event.clock_s - frame.last_clock), tn=suffix.tn, pk=suffix.pk, deltas=suffix.deltas
        )
        frame.last_clock = event.clock_s
        self.frames.append(_Frame(EventKind.BEGIN_STEP, event.ref, event.clock_s))

    def _on_end_step(self, frame: _Frame, event: TraceEvent) -> None:
        if frame.kind is not EventKind.BEGIN_STEP or frame.ref != event.ref:
            self._fail(f"END_STEP of {event.ref} does not close the current round trip")
        child = self._close(frame, event)
        parent = self.frames[-1]
        self._fold(parent, child, absorb(child, parent.suffix), event)

    def _close(self, frame: _Frame, event: TraceEvent) -> FrameStats:
        try:
            stats = frame.close(event.clock_s)
        except TraceError as e:
            self._fail(str(e))
        self.frames.pop()
        if not self.frames:
            self._fail("more round trips closed than opened")
        return stats

    def _fold(self, parent: _Frame, child: FrameStats, combined: FrameStats, event: TraceEvent) -> None:
        if self.observer is not None:
            self.observer(child, parent.suffix, combined)
        parent.suffix = combined
        parent.last_clock = event.clock_s

    # end of run ------------------------------------------------------------------
    def finish(self, end_clock_s: Optional[float] = None, tree: Optional[CallTree] = None) -> ProfileReport:
        if len(self.frames) != 1:
            self._fail(f"run ended with {len(self.frames) - 1} unclosed round trip(s)")
        end_clock = self.clock if end_clock_s is None else end_clock_s
        if end_clock < self.clock:
            self._fail(f"end clock {end_clock} precedes the last event at {self.clock}")
        try:
            root = self.frames[0].close(end_clock)
        except TraceError as e:
            self._fail(str(e))

        suggestions = [
            Suggestion(
                ref=ref,
                occurrences=self.occurrences.get(ref, 0),
                dt=delta.dt,
                dtn=delta.dtn,
                dpk=delta.dpk,
                category=categorize(delta),
            )
            for ref, delta in root.deltas.items()
        ]
        suggestions.sort(key=lambda s: (s.category, -abs(s.dt), s.ref.sort_key()))

        if tree is not None:
            multi = tree.procs_with_many_sites()
        else:
            sites: Dict[str, int] = {}
            for ref in self.occurrences:
                sites[ref.proc] = sites.get(ref.proc, 0) + 1
            multi = frozenset(proc for proc, count in sites.items() if count > 1)
        flagged = sorted(multi & {s.ref.proc for s in suggestions})
        if flagged:
            logger.warning(
                f"Procedures called at several sites: {', '.join(flagged)}; predictions are per call site"
            )

        self.report = ProfileReport(
            root=root,
            suggestions=tuple(suggestions),
            occurrences=dict(sorted(self.occurrences.items(), key=lambda kv: kv[0].sort_key())),
            multi_site_procs=frozenset(flagged),
        )
        return self.report


def profile(events: Iterable[TraceEvent], end_clock_s: Optional[float] = None,
            observer: Optional[FrameObserver] = None) -> ProfileReport:
    """Profile a recorded event stream.

    Without `end_clock_s` the root round trip ends at the last event.
    """
    profiler = Profiler(observer)
    for event in events:
        profiler.feed(event)
    return profiler.finish(end_clock_s)


def profile_run(tree: CallTree, config: CheckpointConfig,
                observer: Optional[FrameObserver] = None) -> Tuple[AdjointCost, ProfileReport]:
    """Simulate `tree` under `config` and profile the run in the same pass."""
    profiler = Profiler(observer)
    cost = emit_events(tree, config, profiler)
    return cost, profiler.finish(cost.time_s, tree)
