"""Exception hierarchy shared by every module."""


class PhyloMovesError(Exception):
    pass


class StructuralError(PhyloMovesError, ValueError):
    """Shapes do not line up: residue lengths, column counts, groups."""


class CapacityError(PhyloMovesError):
    """An enumeration would exceed its configured cap."""

    def __init__(self, message, *, size=None, cap=None, signature=None):
        super().__init__(message)
        self.size = size
        self.cap = cap
        self.signature = signature


class ParseError(PhyloMovesError, ValueError):
    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{where}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


class ValidationError(PhyloMovesError, ValueError):
    """A row that should be a flow is not."""


class InvalidMoveError(PhyloMovesError, ValueError):
    pass


class InapplicableMoveError(PhyloMovesError, ValueError):
    pass


class ProgressError(PhyloMovesError):
    """A counting argument that needs large tables failed at this size."""


class ReductionFailure(PhyloMovesError):
    def __init__(self, message, phase=None, diagnostics=None):
        super().__init__(message)
        self.phase = phase
        self.diagnostics = diagnostics or {}


class PreconditionError(PhyloMovesError, ValueError):
    pass
