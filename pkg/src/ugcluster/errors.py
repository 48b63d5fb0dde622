"""Exception types shared across the package.

Each error carries an ``exit_code`` used by the command-line front end.
"""


class UGClusterError(Exception):
    exit_code = 1
    code = "error"


class GraphFormatError(UGClusterError, ValueError):
    """Raised when an edge-list document cannot be parsed."""

    exit_code = 3
    code = "input"

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ParameterError(UGClusterError, ValueError):
    exit_code = 4
    code = "parameter-domain"


class CapExceededError(UGClusterError):
    """Exact enumeration or brute force would exceed its configured cap."""

    exit_code = 5
    code = "cap-exceeded"


class SolverError(UGClusterError, RuntimeError):
    exit_code = 1
    code = "solver"
