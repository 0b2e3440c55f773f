"""Binomial checkpointing of homogeneous time-stepping loops.

Conventions:
  * `d` slots include the snapshot of the loop's initial state; more slots
    than steps are useless, so `min(d, l)` slots are used.
  * Every execution of a step counts once in E, including the single taping
    execution that immediately precedes the step's backward sweep.
  * A range of one step is taped directly, so its start is never stored.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import List, NamedTuple, Tuple

from ckptprof.misc.errors import PreconditionError
from ckptprof.model.tree import CallTree, CheckpointConfig, LoopNode

logger = logging.getLogger(__name__)


class ActionKind(str, Enum):
    STORE = "STORE"
    RESTORE = "RESTORE"
    ADVANCE = "ADVANCE"
    STEP = "STEP"


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    index: int
    steps: int = 0


@dataclass(frozen=True)
class BinomialCost:
    step_executions: int
    repetition: int
    snapshot_slots: int
    stores: int
    restores: int


@dataclass(frozen=True)
class LoopCost:
    time_s: float
    peak_bytes: int
    step_executions: int


class _Plan(NamedTuple):
    executions: int
    repetition: int
    split: int
    stores: int
    restores: int


def _check(l: int, d: int) -> None:
    if l < 1 or d < 1:
        raise PreconditionError(f"binomial checkpointing needs l >= 1 and d >= 1, got l={l} d={d}")


def min_repetition(l: int, d: int) -> int:
    """Smallest r with C(d + r, r) >= l."""
    _check(l, d)
    r = 0
    while math.comb(d + r, r) < l:
        r += 1
    return r


@lru_cache(maxsize=None)
def _solve(n: int, k: int) -> _Plan:
    k = min(k, n)
    if n == 1:
        return _Plan(executions=1, repetition=1, split=0, stores=0, restores=0)
    if k == 1:
        return _Plan(executions=n * (n + 1) // 2, repetition=n, split=0, stores=0, restores=n - 1)
    if k == n:
        # A slot per step: advancing one step at a time is the unique optimum.
        return _Plan(executions=2 * n - 1, repetition=2, split=1, stores=n - 2, restores=n - 1)

    best = None
    for m in range(1, n):
        right = _solve(n - m, k - 1)
        left = _solve(m, k)
        executions = m + right.executions + left.executions
        repetition = max(1 + left.repetition, right.repetition)
        if best is None or (executions, repetition) < (best.executions, best.repetition):
            best = _Plan(
                executions=executions,
                repetition=repetition,
                split=m,
                stores=(1 if n - m >= 2 else 0) + right.stores + left.stores,
                restores=1 + right.restores + left.restores,
            )
    return best


def _plan(l: int, d: int) -> _Plan:
    _check(l, d)
    slots = min(d, l)
    if slots == l:
        return _solve(l, l)
    # Fill the memo bottom-up so the recursion in _solve never goes deep.
    for n in range(1, l + 1):
        for k in range(1, min(slots, n) + 1):
            _solve(n, k)
    return _solve(l, slots)


def step_executions(l: int, d: int) -> int:
    return _plan(l, d).executions


def binomial_cost(l: int, d: int) -> BinomialCost:
    plan = _plan(l, d)
    return BinomialCost(
        step_executions=plan.executions,
        repetition=plan.repetition - 1,
        snapshot_slots=min(d, l),
        stores=plan.stores + (1 if l >= 2 else 0),
        restores=plan.restores,
    )


def _emit(start: int, n: int, k: int, out: List[Action]) -> None:
    k = min(k, n)
    if n == 1:
        out.append(Action(ActionKind.STEP, start))
        return
    if k == 1:
        for offset in range(n - 1, -1, -1):
            if offset < n - 1:
                out.append(Action(ActionKind.RESTORE, start))
            if offset:
                out.append(Action(ActionKind.ADVANCE, start, offset))
            out.append(Action(ActionKind.STEP, start + offset))
        return

    m = _solve(n, k).split
    out.append(Action(ActionKind.ADVANCE, start, m))
    if n - m >= 2:
        out.append(Action(ActionKind.STORE, start + m))
    _emit(start + m, n - m, k - 1, out)
    out.append(Action(ActionKind.RESTORE, start))
    _emit(start, m, k, out)


@lru_cache(maxsize=256)
def schedule_actions(l: int, d: int) -> Tuple[Action, ...]:
    """The optimal reversal schedule of `l` steps with `d` slots, as actions.

    The first STEP action is always the last step: everything before it runs
    in the enclosing forward sweep, the rest during the backward sweep.
    """
    _plan(l, d)
    out: List[Action] = [Action(ActionKind.STORE, 0)] if l >= 2 else []
    _emit(0, l, min(d, l), out)
    return tuple(out)


def execution_counts(actions: Tuple[Action, ...], l: int) -> List[int]:
    """Executions of each step index when replaying `actions`."""
    counts = [0] * l
    for action in actions:
        if action.kind is ActionKind.ADVANCE:
            for index in range(action.index, action.index + action.steps):
                counts[index] += 1
        elif action.kind is ActionKind.STEP:
            counts[action.index] += 1
    return counts


def loop_cost(loop: LoopNode, d: int, inner_config: CheckpointConfig) -> LoopCost:
    """Time and peak of reversing `loop` alone with `d` slots.

    Inner checkpoints follow `inner_config`; its binomial entries for loops
    outside the body are ignored.
    """
    from ckptprof.services.simulator import primal_time, simulate

    _check(loop.iterations, d)
    body = CallTree(name=loop.loop_id, items=loop.body)
    inner_loops = set(body.loop_ids())
    inner = CheckpointConfig(
        inhibited=inner_config.inhibited,
        binomial={key: value for key, value in inner_config.binomial.items() if key in inner_loops},
    )
    one_step = simulate(body, inner)
    cost = binomial_cost(loop.iterations, d)
    l = loop.iterations

    time_s = (
        (cost.step_executions - l) * primal_time(loop.body)
        + l * one_step.time_s
        + cost.stores * loop.t_snp_write
        + cost.restores * loop.t_snp_read
    )
    peak_bytes = cost.snapshot_slots * loop.step_snapshot_bytes + one_step.peak_bytes
    return LoopCost(time_s=time_s, peak_bytes=peak_bytes, step_executions=cost.step_executions)
