import json
import logging
from typing import Dict, List, Set, Tuple

from pydantic import ValidationError

from ckptprof.misc.errors import (
    CapacityError,
    DuplicateCallSiteError,
    DuplicateLoopIdError,
    MalformedSiteError,
    NegativeValueError,
    TreeSchemaError,
    TreeSyntaxError,
    UnknownDirectiveError,
    ConfigSyntaxError,
)
from ckptprof.model.schema import (
    CallDoc,
    CallFields,
    ItemDoc,
    LoopDoc,
    LoopFields,
    SegmentDoc,
    SegmentFields,
    TreeDoc,
)
from ckptprof.model.tree import (
    CallNode,
    CallTree,
    CheckpointConfig,
    LoopNode,
    Segment,
    StaticRef,
    TreeItem,
)

logger = logging.getLogger(__name__)


def _error_path(loc: Tuple) -> str:
    return ".".join(str(part) for part in loc) or "<root>"


def _raise_validation(exc: ValidationError) -> None:
    errors = exc.errors()
    for error in errors:
        if error["type"] in ("greater_than_equal", "greater_than"):
            bound = error.get("ctx", {}).get("ge", error.get("ctx", {}).get("gt"))
            if bound == 0:
                raise NegativeValueError(
                    f"negative value {error.get('input')!r} at {_error_path(error['loc'])}"
                ) from exc
    first = errors[0]
    raise TreeSchemaError(f"{first['msg']} at {_error_path(first['loc'])}") from exc


class _TreeBuilder:
    def __init__(self):
        self.sites: Set[Tuple[str, int]] = set()
        self.loop_ids: Set[str] = set()

    def items(self, docs: List[ItemDoc]) -> Tuple[TreeItem, ...]:
        return tuple(self.item(doc) for doc in docs)

    def item(self, doc: ItemDoc) -> TreeItem:
        if isinstance(doc, SegmentDoc):
            seg = doc.seg
            return Segment(
                label=seg.label,
                t_primal=seg.t_primal,
                t_fwd=seg.t_fwd,
                t_bwd=seg.t_bwd,
                tape_bytes=seg.tape_bytes,
            )
        if isinstance(doc, CallDoc):
            call = doc.call
            key = (call.proc, call.site)
            if key in self.sites:
                raise DuplicateCallSiteError(f"duplicate call site {call.proc}@{call.site}")
            self.sites.add(key)
            return CallNode(
                ref=StaticRef(call.proc, call.site),
                snapshot_bytes=call.snapshot_bytes,
                t_snp_write=call.t_snp_write,
                t_snp_read=call.t_snp_read,
                body=self.items(call.items),
            )
        loop = doc.loop
        if loop.id in self.loop_ids:
            raise DuplicateLoopIdError(f"duplicate loop id {loop.id!r}")
        self.loop_ids.add(loop.id)
        return LoopNode(
            loop_id=loop.id,
            iterations=loop.iterations,
            step_snapshot_bytes=loop.step_snapshot_bytes,
            t_snp_write=loop.t_snp_write,
            t_snp_read=loop.t_snp_read,
            body=self.items(loop.items),
        )


def parse_tree(doc: str) -> CallTree:
    """Parse a UTF-8 tree document into a `CallTree`, checking every invariant."""
    try:
        json.loads(doc)
    except json.JSONDecodeError as e:
        raise TreeSyntaxError(e.msg, line=e.lineno, column=e.colno) from e

    # Strict JSON mode: no "42" for an integer, no true for bytes, no 8.0 for
    # bytes; JSON integers are still accepted where seconds are expected.
    try:
        tree_doc = TreeDoc.model_validate_json(doc, strict=True)
    except ValidationError as e:
        _raise_validation(e)

    builder = _TreeBuilder()
    return CallTree(name=tree_doc.name, items=builder.items(tree_doc.items))


def _item_doc(item: TreeItem) -> ItemDoc:
    if isinstance(item, Segment):
        return SegmentDoc(
            seg=SegmentFields(
                label=item.label,
                t_primal=item.t_primal,
                t_fwd=item.t_fwd,
                t_bwd=item.t_bwd,
                tape_bytes=item.tape_bytes,
            )
        )
    if isinstance(item, CallNode):
        return CallDoc(
            call=CallFields(
                proc=item.ref.proc,
                site=item.ref.site,
                snapshot_bytes=item.snapshot_bytes,
                t_snp_write=item.t_snp_write,
                t_snp_read=item.t_snp_read,
                items=[_item_doc(child) for child in item.body],
            )
        )
    return LoopDoc(
        loop=LoopFields(
            id=item.loop_id,
            iterations=item.iterations,
            step_snapshot_bytes=item.step_snapshot_bytes,
            t_snp_write=item.t_snp_write,
            t_snp_read=item.t_snp_read,
            items=[_item_doc(child) for child in item.body],
        )
    )


def serialize_tree(tree: CallTree) -> str:
    doc = TreeDoc(name=tree.name, items=[_item_doc(item) for item in tree.items])
    return json.dumps(doc.model_dump(mode="json"), indent=2) + "\n"


def parse_config(doc: str) -> CheckpointConfig:
    """Parse the line-oriented config format.

    Directives: `inhibit NAME`, `inhibit NAME@LINE`, `binomial LOOPID D`.
    `#` starts a comment, blank lines are ignored.
    """
    inhibited: Set[StaticRef] = set()
    binomial: Dict[str, int] = {}

    for lineno, raw_line in enumerate(doc.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        directive, *args = line.split()

        if directive == "inhibit":
            if len(args) != 1:
                raise ConfigSyntaxError("inhibit expects exactly one NAME or NAME@LINE", line=lineno)
            try:
                inhibited.add(StaticRef.parse(args[0]))
            except ValueError as e:
                raise MalformedSiteError(str(e), line=lineno) from e

        elif directive == "binomial":
            if len(args) != 2:
                raise ConfigSyntaxError("binomial expects LOOPID D", line=lineno)
            loop_id, capacity = args
            try:
                d = int(capacity)
            except ValueError as e:
                raise CapacityError(f"capacity {capacity!r} is not an integer", line=lineno) from e
            if d < 1:
                raise CapacityError(f"capacity for {loop_id!r} must be >= 1, got {d}", line=lineno)
            binomial[loop_id] = d

        else:
            raise UnknownDirectiveError(f"unknown directive {directive!r}", line=lineno)

    return CheckpointConfig(inhibited=frozenset(inhibited), binomial=binomial)


def serialize_config(config: CheckpointConfig) -> str:
    lines = [f"inhibit {ref}" for ref in sorted(config.inhibited, key=StaticRef.sort_key)]
    lines += [f"binomial {loop_id} {d}" for loop_id, d in sorted(config.binomial.items())]
    return "".join(f"{line}\n" for line in lines)
