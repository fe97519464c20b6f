"""
Error kinds raised across the lab
"""

from typing import Optional


class LabError(Exception):
    """Base class untuk semua error di lab"""


class InvalidArgumentError(LabError, ValueError):
    """Argument outside the documented domain of an operation"""


class FormatError(LabError, ValueError):
    """Input file does not conform to the documented format"""


class InternalError(LabError, RuntimeError):
    """Numerical invariant violated; signals a kernel or geometry bug"""


class UndefinedResultError(LabError, ArithmeticError):
    """The requested quantity is undefined for the given inputs"""


class ConfigError(LabError, ValueError):
    """Invalid experiment configuration"""

    def __init__(self, message: str, path: Optional[str] = None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class GridError(InvalidArgumentError):
    """Grid points are malformed or coincide"""
