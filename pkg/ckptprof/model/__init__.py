"""Call-tree data model: types, documents and the synthetic generator."""
from .documents import parse_config, parse_tree, serialize_config, serialize_tree
from .generator import CostRanges, generate_tree
from .tree import (
    CallNode,
    CallTree,
    CheckpointConfig,
    LoopNode,
    Segment,
    StaticRef,
    TreeItem,
    format_refs,
    parse_refs,
)

__all__ = [
    "CallNode",
    "CallTree",
    "CheckpointConfig",
    "CostRanges",
    "LoopNode",
    "Segment",
    "StaticRef",
    "TreeItem",
    "format_refs",
    "generate_tree",
    "parse_config",
    "parse_refs",
    "parse_tree",
    "serialize_config",
    "serialize_tree",
]
