"""Pydantic schema of the tree document.

Each item is a one-key object (`seg`, `call` or `loop`); the key selects the
model through a callable discriminator so validation errors point at the
actual field instead of listing every union member.
"""
from typing import Any, List, Union

from pydantic import BaseModel, ConfigDict, Discriminator, Field, Tag
from typing_extensions import Annotated

Token = Annotated[str, Field(min_length=1, pattern=r"^[^\s@;]+$")]
Seconds = Annotated[float, Field(ge=0, allow_inf_nan=False)]
Bytes = Annotated[int, Field(ge=0)]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SegmentFields(_Strict):
    label: Token
    t_primal: Seconds
    t_fwd: Seconds
    t_bwd: Seconds
    tape_bytes: Bytes


class CallFields(_Strict):
    proc: Token
    site: Bytes
    snapshot_bytes: Bytes
    t_snp_write: Seconds
    t_snp_read: Seconds
    items: List["ItemDoc"]


class LoopFields(_Strict):
    id: Token
    iterations: Annotated[int, Field(ge=1)]
    step_snapshot_bytes: Bytes
    t_snp_write: Seconds
    t_snp_read: Seconds
    items: List["ItemDoc"]


class SegmentDoc(_Strict):
    seg: SegmentFields


class CallDoc(_Strict):
    call: CallFields


class LoopDoc(_Strict):
    loop: LoopFields


def _item_kind(value: Any) -> Union[str, None]:
    if isinstance(value, dict):
        keys = list(value)
        if len(keys) == 1 and keys[0] in ("seg", "call", "loop"):
            return keys[0]
        return None
    for kind in ("seg", "call", "loop"):
        if isinstance(value, BaseModel) and kind in type(value).model_fields:
            return kind
    return None


ItemDoc = Annotated[
    Union[
        Annotated[SegmentDoc, Tag("seg")],
        Annotated[CallDoc, Tag("call")],
        Annotated[LoopDoc, Tag("loop")],
    ],
    Discriminator(
        _item_kind,
        custom_error_type="item_shape",
        custom_error_message="item must be an object with exactly one of 'seg', 'call', 'loop'",
    ),
]


class TreeDoc(_Strict):
    name: Token
    items: List[ItemDoc]


CallFields.model_rebuild()
LoopFields.model_rebuild()
TreeDoc.model_rebuild()
