"""Exact discrete simulation of an adjoint run under a checkpointing config.

The simulator is the ground truth for time, turn-point stack and peak stack,
and the source of the profiling event stream.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

from ckptprof.misc.errors import DanglingLoopError, StackDisciplineError
from ckptprof.model.events import EventKind, EventSink, TraceEvent
from ckptprof.model.tree import (
    CallNode,
    CallTree,
    CheckpointConfig,
    LoopNode,
    Segment,
    StaticRef,
    TreeItem,
)
from ckptprof.services.binomial import ActionKind, schedule_actions

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AdjointCost:
    time_s: float
    peak_bytes: int
    turn_bytes: int
    primal_reexecutions: Dict[StaticRef, int] = field(default_factory=dict)
    step_executions: Dict[str, int] = field(default_factory=dict)


def primal_time(items: Iterable[TreeItem]) -> float:
    total = 0.0
    for item in items:
        if isinstance(item, Segment):
            total += item.t_primal
        elif isinstance(item, CallNode):
            total += primal_time(item.body)
        else:
            total += item.iterations * primal_time(item.body)
    return total


def simulate_primal(tree: CallTree) -> float:
    """Plain primal run time: every segment's t_primal, loops times their iterations."""
    return primal_time(tree.items)


class _Run:
    def __init__(self, tree: CallTree, config: CheckpointConfig, sink: Optional[EventSink]):
        self.tree = tree
        self.config = config
        self.sink = sink
        self.clock = 0.0
        self.stack = 0
        self.peak = 0
        self.turn_bytes: Optional[int] = None
        self.pushes: List[Tuple[object, int]] = []
        self.reexecutions: Counter = Counter()
        self.step_counts: Counter = Counter()
        self._primal: Dict[int, float] = {}

    # stack -----------------------------------------------------------------
    def push(self, tag: object, nbytes: int) -> None:
        self.pushes.append((tag, nbytes))
        self.stack += nbytes
        self.peak = max(self.peak, self.stack)

    def pop(self, tag: object) -> None:
        if not self.pushes or self.pushes[-1][0] is not tag:
            raise StackDisciplineError(f"pop of {tag!r} does not match the most recent push")
        _, nbytes = self.pushes.pop()
        self.stack -= nbytes

    def emit(self, kind: EventKind, ref: Optional[StaticRef], clock: Optional[float] = None) -> None:
        if self.sink is not None:
            self.sink(
                TraceEvent(
                    kind=kind,
                    ref=ref,
                    clock_s=self.clock if clock is None else clock,
                    stack_bytes=self.stack,
                )
            )

    # primal ----------------------------------------------------------------
    def primal_of(self, body: Tuple[TreeItem, ...]) -> float:
        key = id(body)
        if key not in self._primal:
            self._primal[key] = primal_time(body)
        return self._primal[key]

    def count_primal_steps(self, items: Iterable[TreeItem], times: int) -> None:
        for item in items:
            if isinstance(item, LoopNode):
                self.step_counts[item.loop_id] += times * item.iterations
                self.count_primal_steps(item.body, times * item.iterations)
            elif isinstance(item, CallNode):
                self.count_primal_steps(item.body, times)

    def run_primal(self, body: Tuple[TreeItem, ...], times: int = 1) -> None:
        self.clock += times * self.primal_of(body)
        self.count_primal_steps(body, times)

    # sweeps ----------------------------------------------------------------
    def round_trip(self, items: Tuple[TreeItem, ...]) -> None:
        self.forward(items)
        if self.turn_bytes is None:
            self.turn_bytes = self.stack
        self.emit(EventKind.TURN, None)
        self.backward(items)

    def forward(self, items: Tuple[TreeItem, ...]) -> None:
        for item in items:
            if isinstance(item, Segment):
                self.clock += item.t_fwd
                self.push(item, item.tape_bytes)
            elif isinstance(item, CallNode):
                if self.config.is_active(item.ref):
                    started = self.clock
                    self.push(item, item.snapshot_bytes)
                    self.emit(EventKind.SNP_WRITE, item.ref, clock=started)
                    self.clock += item.t_snp_write
                    self.emit(EventKind.BEGIN_ADVANCE, item.ref)
                    self.run_primal(item.body)
                    self.reexecutions[item.ref] += 1
                    self.emit(EventKind.END_ADVANCE, item.ref)
                else:
                    self.forward(item.body)
            else:
                capacity = self.config.capacity(item.loop_id)
                if capacity is None:
                    for _ in range(item.iterations):
                        self.step_counts[item.loop_id] += 1
                        self.forward(item.body)
                else:
                    self.forward_binomial(item, capacity)

    def backward(self, items: Tuple[TreeItem, ...]) -> None:
        for item in reversed(items):
            if isinstance(item, Segment):
                self.clock += item.t_bwd
                self.pop(item)
            elif isinstance(item, CallNode):
                if self.config.is_active(item.ref):
                    self.emit(EventKind.SNP_READ, item.ref)
                    self.pop(item)
                    self.clock += item.t_snp_read
                    self.emit(EventKind.BEGIN_REVERSE, item.ref)
                    self.round_trip(item.body)
                    self.emit(EventKind.END_REVERSE, item.ref)
                else:
                    self.backward(item.body)
            else:
                capacity = self.config.capacity(item.loop_id)
                if capacity is None:
                    for _ in range(item.iterations):
                        self.backward(item.body)
                else:
                    self.backward_binomial(item, capacity)

    # binomial loops ------------------------------------------------------------
    def forward_binomial(self, loop: LoopNode, capacity: int) -> None:
        actions = schedule_actions(loop.iterations, capacity)
        self.push(loop, min(capacity, loop.iterations) * loop.step_snapshot_bytes)
        for action in actions:
            if action.kind is ActionKind.STEP:
                break
            self.replay(loop, action)
        self.step_counts[loop.loop_id] += 1
        self.forward(loop.body)

    def backward_binomial(self, loop: LoopNode, capacity: int) -> None:
        actions = schedule_actions(loop.iterations, capacity)
        self.backward(loop.body)
        first_step = next(i for i, action in enumerate(actions) if action.kind is ActionKind.STEP)
        for action in actions[first_step + 1:]:
            if action.kind is ActionKind.STEP:
                ref = StaticRef(loop.loop_id, action.index)
                self.emit(EventKind.BEGIN_STEP, ref)
                self.step_counts[loop.loop_id] += 1
                self.round_trip(loop.body)
                self.emit(EventKind.END_STEP, ref)
            else:
                self.replay(loop, action)
        self.pop(loop)

    def replay(self, loop: LoopNode, action) -> None:
        if action.kind is ActionKind.ADVANCE:
            self.run_primal(loop.body, action.steps)
            self.step_counts[loop.loop_id] += action.steps
        elif action.kind is ActionKind.STORE:
            self.clock += loop.t_snp_write
        elif action.kind is ActionKind.RESTORE:
            self.clock += loop.t_snp_read

    def execute(self) -> AdjointCost:
        self.round_trip(self.tree.items)
        if self.pushes or self.stack != 0:
            raise StackDisciplineError(f"final stack is {self.stack} bytes, expected 0")
        return AdjointCost(
            time_s=self.clock,
            peak_bytes=self.peak,
            turn_bytes=self.turn_bytes or 0,
            primal_reexecutions=dict(sorted(self.reexecutions.items(), key=lambda kv: kv[0].sort_key())),
            step_executions=dict(sorted(self.step_counts.items())),
        )


def _check_config(tree: CallTree, config: CheckpointConfig) -> None:
    loop_ids = set(tree.loop_ids())
    dangling = sorted(set(config.binomial) - loop_ids)
    if dangling:
        raise DanglingLoopError(f"binomial capacity given for unknown loop(s): {', '.join(dangling)}")

    refs = set(tree.static_refs())
    procs = {ref.proc for ref in refs}
    for ref in config.inhibited:
        if (ref.site is None and ref.proc not in procs) or (ref.site is not None and ref not in refs):
            logger.warning(f"Inhibited checkpoint {ref} does not occur in tree {tree.name!r}")


def emit_events(tree: CallTree, config: CheckpointConfig, sink: Optional[EventSink]) -> AdjointCost:
    """Run the adjoint of `tree` under `config`, feeding every profiling event to `sink`."""
    _check_config(tree, config)
    return _Run(tree, config, sink).execute()


def simulate(tree: CallTree, config: CheckpointConfig) -> AdjointCost:
    return emit_events(tree, config, None)
