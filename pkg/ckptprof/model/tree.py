"""Annotated call trees and checkpointing configurations.

All types are frozen: a tree or config can be shared between concurrent
evaluations without copying.
"""
import re
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

PROC_PATTERN = re.compile(r"^[^\s@;]+$")


@dataclass(frozen=True, order=True)
class StaticRef:
    proc: str
    site: Optional[int] = None

    def __post_init__(self):
        if not PROC_PATTERN.match(self.proc):
            raise ValueError(f"invalid procedure name {self.proc!r}")
        if self.site is not None and self.site < 0:
            raise ValueError(f"negative call site {self.site}")

    def __str__(self) -> str:
        if self.site is None:
            return self.proc
        return f"{self.proc}@{self.site}"

    @property
    def proc_wide(self) -> "StaticRef":
        return StaticRef(self.proc)

    def sort_key(self) -> Tuple[str, int]:
        return self.proc, -1 if self.site is None else self.site

    @staticmethod
    def parse(token: str) -> "StaticRef":
        """`C` is every site of C, `C@42` only the call at line 42."""
        proc, sep, site = token.partition("@")
        if not sep:
            return StaticRef(proc)
        if not site.isdigit():
            raise ValueError(f"malformed call site in {token!r}")
        return StaticRef(proc, int(site))


@dataclass(frozen=True)
class Segment:
    label: str
    t_primal: float
    t_fwd: float
    t_bwd: float
    tape_bytes: int


@dataclass(frozen=True)
class CallNode:
    ref: StaticRef
    snapshot_bytes: int
    t_snp_write: float
    t_snp_read: float
    body: Tuple["TreeItem", ...]


@dataclass(frozen=True)
class LoopNode:
    loop_id: str
    iterations: int
    step_snapshot_bytes: int
    t_snp_write: float
    t_snp_read: float
    body: Tuple["TreeItem", ...]


TreeItem = Union[Segment, CallNode, LoopNode]


def walk(items: Iterable[TreeItem]) -> Iterator[TreeItem]:
    """Pre-order traversal of the static tree (loop bodies visited once)."""
    for item in items:
        yield item
        if isinstance(item, (CallNode, LoopNode)):
            yield from walk(item.body)


@dataclass(frozen=True)
class CallTree:
    name: str
    items: Tuple[TreeItem, ...] = ()

    def calls(self) -> List[CallNode]:
        return [item for item in walk(self.items) if isinstance(item, CallNode)]

    def loops(self) -> List[LoopNode]:
        return [item for item in walk(self.items) if isinstance(item, LoopNode)]

    def static_refs(self) -> List[StaticRef]:
        return sorted((call.ref for call in self.calls()), key=StaticRef.sort_key)

    def loop_ids(self) -> List[str]:
        return sorted(loop.loop_id for loop in self.loops())

    def procs_with_many_sites(self) -> FrozenSet[str]:
        sites: Dict[str, int] = {}
        for ref in self.static_refs():
            sites[ref.proc] = sites.get(ref.proc, 0) + 1
        return frozenset(proc for proc, count in sites.items() if count > 1)


@dataclass(frozen=True)
class CheckpointConfig:
    inhibited: FrozenSet[StaticRef] = frozenset()
    binomial: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for loop_id, capacity in self.binomial.items():
            if capacity < 1:
                raise ValueError(f"binomial capacity for {loop_id!r} must be >= 1, got {capacity}")

    def is_active(self, ref: StaticRef) -> bool:
        # A proc-wide entry and a sited entry each suffice to inhibit.
        return ref not in self.inhibited and ref.proc_wide not in self.inhibited

    def capacity(self, loop_id: str) -> Optional[int]:
        return self.binomial.get(loop_id)

    def with_inhibited(self, refs: Iterable[StaticRef]) -> "CheckpointConfig":
        return CheckpointConfig(
            inhibited=self.inhibited | frozenset(refs), binomial=dict(self.binomial)
        )

    def with_binomial(self, loop_id: str, capacity: int) -> "CheckpointConfig":
        binomial = dict(self.binomial)
        binomial[loop_id] = capacity
        return CheckpointConfig(inhibited=self.inhibited, binomial=binomial)

    def active_refs(self, tree: CallTree) -> List[StaticRef]:
        return [ref for ref in tree.static_refs() if self.is_active(ref)]

    @staticmethod
    def all_inhibited(tree: CallTree, binomial: Optional[Mapping[str, int]] = None) -> "CheckpointConfig":
        return CheckpointConfig(
            inhibited=frozenset(tree.static_refs()), binomial=dict(binomial or {})
        )


def format_refs(refs: Iterable[StaticRef]) -> str:
    return ";".join(str(ref) for ref in sorted(refs, key=StaticRef.sort_key))


def parse_refs(text: str) -> FrozenSet[StaticRef]:
    return frozenset(StaticRef.parse(token) for token in text.split(";") if token)
