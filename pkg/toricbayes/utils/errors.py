from ..config import EXIT_CODES


class ToricBayesError(Exception):
    """Base error; carries the process exit code used by the CLI."""
    exit_code = EXIT_CODES['unexpected']


class TableFormatError(ToricBayesError, ValueError):
    """Malformed table or design document."""
    exit_code = EXIT_CODES['parse']


class CapacityError(ToricBayesError):
    """A Hilbert completion or enumeration budget was exceeded."""
    exit_code = EXIT_CODES['capacity']

    def __init__(self, budget: str, limit: int, message: str):
        super().__init__(f"{message} (budget '{budget}' = {limit})")
        self.budget = budget
        self.limit = limit


class InconsistentInstanceError(ToricBayesError):
    """An instance cannot carry the observed data or the request is ill-posed."""
    exit_code = EXIT_CODES['inconsistent']


class UnsupportedPatternError(InconsistentInstanceError):
    """The quasi-independence block decomposition is not available."""

    def __init__(self, cells, message: str):
        names = ', '.join(f'({c.row},{c.col})' for c in cells)
        super().__init__(f"{message}: {names}")
        self.cells = list(cells)


class NumericError(ToricBayesError, ValueError):
    """Invalid numeric argument or non-finite result."""
    exit_code = EXIT_CODES['numeric']
