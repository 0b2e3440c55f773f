from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

from ckptprof.model.tree import StaticRef


class EventKind(str, Enum):
    SNP_WRITE = "SNP_WRITE"
    BEGIN_ADVANCE = "BEGIN_ADVANCE"
    END_ADVANCE = "END_ADVANCE"
    TURN = "TURN"
    SNP_READ = "SNP_READ"
    BEGIN_REVERSE = "BEGIN_REVERSE"
    END_REVERSE = "END_REVERSE"
    # Round trip of one time step during a binomial loop reversal;
    # ref is `loop_id@step_index`.
    BEGIN_STEP = "BEGIN_STEP"
    END_STEP = "END_STEP"


@dataclass(frozen=True)
class TraceEvent:
    kind: EventKind
    ref: Optional[StaticRef]
    clock_s: float
    stack_bytes: int


EventSink = Callable[[TraceEvent], None]
