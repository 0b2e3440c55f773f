"""Error hierarchy. `cli.py` maps each family to a distinct exit code."""
from typing import Optional


class CkptProfError(Exception):
    exit_code = 1


class DocumentError(CkptProfError):
    exit_code = 4

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            where = f" ({where})"
        super().__init__(f"{message}{where}")


class TreeSyntaxError(DocumentError):
    pass


class TreeSchemaError(DocumentError):
    pass


class NegativeValueError(DocumentError):
    pass


class DuplicateCallSiteError(DocumentError):
    pass


class DuplicateLoopIdError(DocumentError):
    pass


class ConfigSyntaxError(DocumentError):
    pass


class UnknownDirectiveError(ConfigSyntaxError):
    pass


class MalformedSiteError(ConfigSyntaxError):
    pass


class CapacityError(ConfigSyntaxError):
    pass


class SimulationError(CkptProfError):
    exit_code = 6


class DanglingLoopError(SimulationError):
    pass


class StackDisciplineError(SimulationError):
    pass


class TraceError(CkptProfError):
    exit_code = 6

    def __init__(self, message: str, index: Optional[int] = None):
        self.index = index
        prefix = f"event #{index}: " if index is not None else ""
        super().__init__(f"{prefix}{message}")


class GuardExceededError(CkptProfError):
    exit_code = 5


class PreconditionError(CkptProfError, ValueError):
    exit_code = 7


class MissingInputError(CkptProfError):
    exit_code = 3


class VerificationError(SimulationError):
    pass
