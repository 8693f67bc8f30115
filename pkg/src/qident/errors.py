"""Exception hierarchy shared by the engines and the CLI."""


class QidentError(Exception):
    """Base class for every error raised by this package."""


class CircuitSyntaxError(QidentError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class CircuitError(QidentError):
    """Structurally invalid circuit (bad indices, mismatched registers)."""


class SimulationCapError(QidentError):
    """Requested dense simulation exceeds the qubit cap."""


class NonUnitaryError(QidentError):
    pass


class ConvergenceError(QidentError):
    def __init__(self, message: str, iterations: int):
        super().__init__(f"{message} (after {iterations} iterations)")
        self.iterations = iterations


class SubspaceError(QidentError):
    """Membership circuit does not define a clean subspace."""


class NotInvariantError(QidentError):
    """Subspace is not invariant under the compared transformation."""


class StateFormatError(QidentError):
    """Malformed or non-normalized statevector file."""
