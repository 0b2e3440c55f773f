"""Deterministic synthetic call trees.

The tree is a pure function of the arguments: all randomness comes from one
`random.Random(seed)` and every sampled real is rounded to 6 decimals.
"""
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from ckptprof.misc.errors import PreconditionError
from ckptprof.model.tree import CallNode, CallTree, LoopNode, Segment, StaticRef, TreeItem

Range = Tuple[float, float]

TIME_LOOP_ID = "tsteps"
TIME_STEP_REF = StaticRef("timestep", 1)


@dataclass(frozen=True)
class CostRanges:
    """Inclusive sampling ranges. Forward/backward times are factors of t_primal."""

    t_primal: Range = (0.5, 2.0)
    fwd_factor: Range = (1.2, 2.0)
    bwd_factor: Range = (1.5, 3.0)
    tape_bytes: Range = (8, 256)
    snapshot_bytes: Range = (4, 96)
    t_snp: Range = (0.01, 0.2)
    gap_segments: Range = (0, 2)
    iterations: Range = (2, 4)

    def __post_init__(self):
        for name, (lo, hi) in self.__dict__.items():
            if lo > hi or lo < 0:
                raise PreconditionError(f"range {name}=({lo}, {hi}) is empty or negative")

    @staticmethod
    def parse(text: str, base: Optional["CostRanges"] = None) -> "CostRanges":
        """Parse `key=lo:hi,key=lo:hi` overrides on top of `base`."""
        values: Dict[str, Range] = dict((base or CostRanges()).__dict__)
        for part in filter(None, (chunk.strip() for chunk in text.split(","))):
            key, sep, bounds = part.partition("=")
            lo, colon, hi = bounds.partition(":")
            if not sep or not colon or key not in values:
                raise PreconditionError(f"malformed range {part!r}")
            try:
                values[key] = (float(lo), float(hi))
            except ValueError as e:
                raise PreconditionError(f"malformed range {part!r}") from e
        return CostRanges(**values)


@dataclass
class _LoopPlan:
    loop_id: str
    iterations: int
    step_snapshot_bytes: int
    t_snp_write: float
    t_snp_read: float
    entries: List["_Entry"] = field(default_factory=list)


# A planned body entry: a finished segment, the index of a child call, or a loop.
_Entry = Union[Segment, int, _LoopPlan]


class _Sampler:
    def __init__(self, rng: random.Random, ranges: CostRanges):
        self.rng = rng
        self.ranges = ranges
        self.segments = 0

    def real(self, bounds: Range) -> float:
        return round(self.rng.uniform(*bounds), 6)

    def integer(self, bounds: Range) -> int:
        return self.rng.randint(int(bounds[0]), int(bounds[1]))

    def segment(self) -> Segment:
        t_primal = self.real(self.ranges.t_primal)
        label = f"s{self.segments}"
        self.segments += 1
        return Segment(
            label=label,
            t_primal=t_primal,
            t_fwd=round(t_primal * self.real(self.ranges.fwd_factor), 6),
            t_bwd=round(t_primal * self.real(self.ranges.bwd_factor), 6),
            tape_bytes=self.integer(self.ranges.tape_bytes),
        )

    def snapshot(self) -> Tuple[int, float, float]:
        return (
            self.integer(self.ranges.snapshot_bytes),
            self.real(self.ranges.t_snp),
            self.real(self.ranges.t_snp),
        )

    def plan_body(self, children: List[int]) -> List[_Entry]:
        entries: List[_Entry] = []
        for child in children:
            entries += [self.segment() for _ in range(self.integer(self.ranges.gap_segments))]
            entries.append(child)
        entries += [self.segment() for _ in range(self.integer(self.ranges.gap_segments))]
        if not any(isinstance(entry, Segment) for entry in entries):
            entries.append(self.segment())
        return entries


class _Planner:
    def __init__(self, sampler: _Sampler, refs: List[StaticRef], snapshots: List[Tuple[int, float, float]]):
        self.sampler = sampler
        self.refs = refs
        self.snapshots = snapshots
        self.plans: Dict[int, List[_Entry]] = {}

    def wrap_loops(self, n_loops: int) -> None:
        containers = [-1] + sorted(index for index in self.plans if index >= 0)
        rng = self.sampler.rng
        for index in range(n_loops):
            entries = self.plans[rng.choice(containers)]
            start = rng.randrange(len(entries))
            stop = rng.randint(start + 1, len(entries))
            snapshot_bytes, t_write, t_read = self.sampler.snapshot()
            loop = _LoopPlan(
                loop_id=f"loop{index}",
                iterations=self.sampler.integer(self.sampler.ranges.iterations),
                step_snapshot_bytes=snapshot_bytes,
                t_snp_write=t_write,
                t_snp_read=t_read,
                entries=entries[start:stop],
            )
            entries[start:stop] = [loop]

    def build(self, entries: List[_Entry]) -> Tuple[TreeItem, ...]:
        items: List[TreeItem] = []
        for entry in entries:
            if isinstance(entry, Segment):
                items.append(entry)
            elif isinstance(entry, _LoopPlan):
                items.append(
                    LoopNode(
                        loop_id=entry.loop_id,
                        iterations=entry.iterations,
                        step_snapshot_bytes=entry.step_snapshot_bytes,
                        t_snp_write=entry.t_snp_write,
                        t_snp_read=entry.t_snp_read,
                        body=self.build(entry.entries),
                    )
                )
            else:
                snapshot_bytes, t_write, t_read = self.snapshots[entry]
                items.append(
                    CallNode(
                        ref=self.refs[entry],
                        snapshot_bytes=snapshot_bytes,
                        t_snp_write=t_write,
                        t_snp_read=t_read,
                        body=self.build(self.plans[entry]),
                    )
                )
        return tuple(items)


def generate_tree(
    seed: int,
    n_calls: int,
    max_depth: int,
    cost_ranges: CostRanges = CostRanges(),
    n_loops: int = 0,
    time_steps: int = 0,
) -> CallTree:
    """Generate a tree with exactly `n_calls` calls and call nesting <= `max_depth`.

    :param n_loops: loops wrapping random slices of bodies (ids `loop0`, `loop1`, ...).
    :param time_steps: when positive, the program becomes the body of one call
        `timestep@1` iterated by the outer loop `tsteps`; that call counts
        among `n_calls` and its depth among `max_depth`.
    """
    if seed < 0 or n_calls < 1 or max_depth < 1 or n_loops < 0 or time_steps < 0:
        raise PreconditionError(
            f"invalid generator parameters seed={seed} n_calls={n_calls} "
            f"max_depth={max_depth} n_loops={n_loops} time_steps={time_steps}"
        )
    if time_steps and max_depth < 2 and n_calls > 1:
        raise PreconditionError("a time-stepping tree with more than one call needs max_depth >= 2")

    rng = random.Random(seed)
    sampler = _Sampler(rng, cost_ranges)

    inner_calls = n_calls - 1 if time_steps else n_calls
    inner_depth = max_depth - 1 if time_steps else max_depth

    procs = [f"p{k}" for k in range(max(1, (2 * inner_calls + 2) // 3))]
    parents: List[int] = []
    depths: List[int] = []
    for index in range(inner_calls):
        candidates = [-1] + [j for j in range(index) if depths[j] < inner_depth]
        parent = rng.choice(candidates)
        parents.append(parent)
        depths.append(1 if parent < 0 else depths[parent] + 1)

    # Sites are 10*(i+1) + [0, 9]: distinct by construction, procs repeat across sites.
    refs = [StaticRef(rng.choice(procs), 10 * (index + 1) + rng.randint(0, 9)) for index in range(inner_calls)]
    snapshots = [sampler.snapshot() for _ in range(inner_calls)]

    planner = _Planner(sampler, refs, snapshots)
    for container in [-1] + list(range(inner_calls)):
        children = [index for index, owner in enumerate(parents) if owner == container]
        planner.plans[container] = sampler.plan_body(children)
    planner.wrap_loops(n_loops)
    items = planner.build(planner.plans[-1])

    if time_steps:
        snapshot_bytes, t_write, t_read = sampler.snapshot()
        step_call = CallNode(
            ref=TIME_STEP_REF,
            snapshot_bytes=snapshot_bytes,
            t_snp_write=t_write,
            t_snp_read=t_read,
            body=items,
        )
        step_bytes, loop_write, loop_read = sampler.snapshot()
        loop = LoopNode(
            loop_id=TIME_LOOP_ID,
            iterations=time_steps,
            step_snapshot_bytes=step_bytes,
            t_snp_write=loop_write,
            t_snp_read=loop_read,
            body=(step_call,),
        )
        items = (sampler.segment(), loop, sampler.segment())

    return CallTree(name=f"synthetic-{seed}", items=items)
