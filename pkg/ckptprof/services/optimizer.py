"""Configuration search: greedy re-profiling, random baselines, exhaustive Pareto fronts."""
import itertools
import logging
import random
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

from ckptprof.misc.errors import GuardExceededError, PreconditionError
from ckptprof.model.tree import CallTree, CheckpointConfig, StaticRef, format_refs
from ckptprof.services.evaluation import evaluate_configs
from ckptprof.services.profiler import ProfileReport, Suggestion, profile_run
from ckptprof.services.simulator import AdjointCost, simulate

logger = logging.getLogger(__name__)

DEFAULT_PARETO_GUARD = 20


class StrategyKind(str, Enum):
    TIME_FIRST = "time-first"
    MEMORY_FIRST = "memory-first"


@dataclass(frozen=True)
class Strategy:
    kind: StrategyKind = StrategyKind.TIME_FIRST
    batch: int = 1
    budget_bytes: Optional[int] = None
    defer_above_bytes: Optional[int] = None

    def __post_init__(self):
        if self.batch < 1:
            raise PreconditionError(f"batch must be >= 1, got {self.batch}")
        if self.budget_bytes is not None and self.budget_bytes <= 0:
            raise PreconditionError(f"budget must be positive, got {self.budget_bytes}")
        if self.defer_above_bytes is not None and self.defer_above_bytes <= 0:
            raise PreconditionError(f"defer threshold must be positive, got {self.defer_above_bytes}")


@dataclass(frozen=True)
class TrajectoryPoint:
    step: int
    config: CheckpointConfig
    time_s: float
    peak_bytes: int
    applied: Tuple[StaticRef, ...] = ()
    suggestions: Tuple[Suggestion, ...] = ()


class ParetoPoint(NamedTuple):
    config: CheckpointConfig
    time_s: float
    peak_bytes: int


OrderingRule = Callable[[List[Suggestion], Strategy], List[Suggestion]]

RULES: Dict[StrategyKind, OrderingRule] = {}


def ordering_rule(kind: StrategyKind):
    def register(func: OrderingRule) -> OrderingRule:
        RULES[kind] = func
        return func

    return register


@ordering_rule(StrategyKind.TIME_FIRST)
def _time_first(suggestions: List[Suggestion], strategy: Strategy) -> List[Suggestion]:
    # Peak-neutral or peak-reducing moves first, expensive ones last.
    def by_gain(items: List[Suggestion]) -> List[Suggestion]:
        return sorted(items, key=lambda s: (-abs(s.dt), s.ref.sort_key()))

    free = [s for s in suggestions if s.dpk <= 0]
    costly = [s for s in suggestions if s.dpk > 0]
    limit = strategy.defer_above_bytes
    cheap = [s for s in costly if limit is None or s.dpk <= limit]
    deferred = [s for s in costly if limit is not None and s.dpk > limit]
    return by_gain(free) + by_gain(cheap) + by_gain(deferred)


@ordering_rule(StrategyKind.MEMORY_FIRST)
def _memory_first(suggestions: List[Suggestion], strategy: Strategy) -> List[Suggestion]:
    return sorted(suggestions, key=lambda s: (s.dpk, -abs(s.dt), s.ref.sort_key()))


def is_admissible(suggestion: Suggestion, strategy: Strategy, current_peak: int) -> bool:
    if suggestion.dt >= 0:
        return False
    return strategy.budget_bytes is None or current_peak + suggestion.dpk <= strategy.budget_bytes


def ranked_suggestions(report: ProfileReport, strategy: Strategy, current_peak: int) -> List[Suggestion]:
    """Every admissible suggestion, in the order the strategy would apply them."""
    admissible = [s for s in report.suggestions if is_admissible(s, strategy, current_peak)]
    return RULES[strategy.kind](admissible, strategy)


def next_suggestions(report: ProfileReport, strategy: Strategy, current_peak: int) -> List[Suggestion]:
    """Up to `strategy.batch` suggestions to apply next; empty when none is admissible.

    Budget checks are per suggestion here; `fill_batch` checks their combination.
    """
    return ranked_suggestions(report, strategy, current_peak)[: strategy.batch]


def fill_batch(
    tree: CallTree,
    config: CheckpointConfig,
    ranked: List[Suggestion],
    strategy: Strategy,
) -> List[Suggestion]:
    """Take ranked suggestions while their combined inhibition stays within budget.

    The first pick relies on its (exact) single-toggle prediction. Predictions
    do not compose, so every further pick is checked by simulating the
    inhibition of all picks so far plus the candidate.
    """
    picks: List[Suggestion] = []
    for candidate in ranked:
        if len(picks) == strategy.batch:
            break
        if picks and strategy.budget_bytes is not None:
            trial = config.with_inhibited([s.ref for s in picks] + [candidate.ref])
            peak = simulate(tree, trial).peak_bytes
            if peak > strategy.budget_bytes:
                logger.debug(f"Skipping {candidate.ref}: batch peak {peak} B exceeds the budget")
                continue
        picks.append(candidate)
    return picks


def optimize(tree: CallTree, config0: CheckpointConfig, strategy: Strategy) -> List[TrajectoryPoint]:
    """Apply suggestions and re-profile until none remains."""
    trajectory: List[TrajectoryPoint] = []
    config = config0
    applied: Tuple[StaticRef, ...] = ()
    while True:
        cost, report = profile_run(tree, config)
        step = len(trajectory)
        trajectory.append(
            TrajectoryPoint(
                step=step,
                config=config,
                time_s=cost.time_s,
                peak_bytes=cost.peak_bytes,
                applied=applied,
                suggestions=report.suggestions,
            )
        )
        logger.info(
            f"[{strategy.kind.value}] step {step}: time {cost.time_s:.6f} s, peak {cost.peak_bytes} B, "
            f"{len(report.suggestions)} suggestion(s)"
        )
        picks = fill_batch(tree, config, ranked_suggestions(report, strategy, cost.peak_bytes), strategy)
        if not picks:
            return trajectory
        applied = tuple(s.ref for s in picks)
        config = config.with_inhibited(applied)


def random_configs(
    tree: CallTree,
    n: int,
    seed: int,
    base: Optional[CheckpointConfig] = None,
    workers: int = 1,
) -> List[Tuple[CheckpointConfig, AdjointCost]]:
    """`n` configs, each static ref inhibited with probability 1/2.

    Binomial capacities are taken from `base`; its inhibitions are not.
    """
    if n < 0:
        raise PreconditionError(f"number of configurations must be >= 0, got {n}")
    rng = random.Random(seed)
    refs = tree.static_refs()
    binomial = dict(base.binomial) if base is not None else {}
    configs = [
        CheckpointConfig(inhibited=frozenset(ref for ref in refs if rng.random() < 0.5), binomial=binomial)
        for _ in range(n)
    ]
    costs = evaluate_configs(tree, configs, workers)
    return list(zip(configs, costs))


def dominates(a: Tuple[float, int], b: Tuple[float, int]) -> bool:
    """Weak dominance on (time, peak): no worse on both, better on one."""
    return a[0] <= b[0] and a[1] <= b[1] and (a[0] < b[0] or a[1] < b[1])


def pareto_front(points: Sequence[ParetoPoint]) -> List[ParetoPoint]:
    ordered = sorted(points, key=lambda p: (p.time_s, p.peak_bytes, format_refs(p.config.inhibited)))
    front: List[ParetoPoint] = []
    # Any dominator sorts strictly before the point it dominates.
    for point in ordered:
        if not any(dominates((f.time_s, f.peak_bytes), (point.time_s, point.peak_bytes)) for f in front):
            front.append(point)
    return front


def enumerate_configs(tree: CallTree, base: Optional[CheckpointConfig] = None) -> List[CheckpointConfig]:
    refs = tree.static_refs()
    binomial = dict(base.binomial) if base is not None else {}
    return [
        CheckpointConfig(inhibited=frozenset(itertools.compress(refs, mask)), binomial=binomial)
        for mask in itertools.product((False, True), repeat=len(refs))
    ]


def pareto(
    tree: CallTree,
    max_checkpoints_guard: int = DEFAULT_PARETO_GUARD,
    base: Optional[CheckpointConfig] = None,
    workers: int = 1,
) -> List[ParetoPoint]:
    """Non-dominated (time, peak) points among all 2^m inhibition subsets."""
    m = len(tree.static_refs())
    if m > max_checkpoints_guard:
        raise GuardExceededError(
            f"exhaustive search over {m} static checkpoints exceeds the guard of {max_checkpoints_guard}"
        )
    configs = enumerate_configs(tree, base)
    logger.info(f"Enumerating {len(configs)} configurations of {tree.name!r}")
    costs = evaluate_configs(tree, configs, workers)
    points = [ParetoPoint(config, cost.time_s, cost.peak_bytes) for config, cost in zip(configs, costs)]
    front = pareto_front(points)
    logger.info(f"Pareto front size: {len(front)} / {len(points)}")
    return front


def dominance_fraction(scatter: Sequence[Tuple[float, int]], trajectory: Sequence[TrajectoryPoint]) -> float:
    """Share of `(time, peak)` points no better on either axis than some trajectory point."""
    if not scatter:
        return 0.0
    covered = sum(
        1
        for time_s, peak in scatter
        if any(p.time_s <= time_s and p.peak_bytes <= peak for p in trajectory)
    )
    return covered / len(scatter)
