# exceptions.py
"""
Exception hierarchy shared by every toolkit module
"""

from typing import Optional


class ToolkitError(Exception):
    """Base class for all toolkit failures"""

    kind = "toolkit_error"


class DimensionError(ToolkitError):
    """Width, depth or dimension mismatch between operands"""

    kind = "dimension_error"


class DomainError(ToolkitError):
    """Argument outside the domain of an operation"""

    kind = "domain_error"


class ParseError(ToolkitError):
    """Malformed vector-field expression"""

    kind = "parse_error"

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.detail = message
        self.position = position


class EvaluationError(ToolkitError):
    """Expression could not be evaluated to a finite real"""

    kind = "evaluation_error"


class BlowUpError(ToolkitError):
    """Integration produced a non-finite or huge state"""

    kind = "blow_up"

    def __init__(self, message: str, last_time: float, stage: Optional[int] = None):
        if stage is not None:
            message = f"{message} (stage {stage})"
        super().__init__(f"{message}; last valid time {last_time:.17g}")
        self.last_time = last_time
        self.stage = stage


class EstimationError(ToolkitError):
    """Distribution estimate could not be formed"""

    kind = "estimation_error"


class InputError(ToolkitError):
    """Malformed input file, JSON text or command-line flag"""

    kind = "input_error"

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column
