"""
HiddenShift — error types
Every failure a command can report maps to one exit code.
"""

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_INPUT = 2
EXIT_INVARIANT = 3


class HiddenShiftError(Exception):
    """Base class; `exit_code` is what the CLI returns."""
    exit_code = EXIT_INPUT


class SizeError(HiddenShiftError):
    pass


class ArgumentError(HiddenShiftError):
    pass


class ConfigError(HiddenShiftError):
    pass


class DimensionError(HiddenShiftError):
    pass


class CapacityError(HiddenShiftError):
    pass


class InsufficientCoverageError(HiddenShiftError):
    pass


class ParseError(HiddenShiftError):
    """Malformed truth-table file. `offset` is the byte offset of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class UnderdeterminedError(HiddenShiftError):
    exit_code = EXIT_SOLVER

    def __init__(self, rank: int, n: int):
        super().__init__(f"system has rank {rank} < {n}; keep sampling")
        self.rank = rank
        self.n = n


class BudgetExceededError(HiddenShiftError):
    exit_code = EXIT_SOLVER

    def __init__(self, queries: int, max_queries: int, rank: int = None, candidates_left: int = None,
                 runs: int = 0, trials_per_rank_step: list[int] = None):
        detail = f"query budget {max_queries} exhausted after {queries} queries"
        if rank is not None:
            detail += f" (basis rank {rank})"
        if candidates_left is not None:
            detail += f" ({candidates_left} shift candidates left)"
        super().__init__(detail)
        self.queries = queries
        self.max_queries = max_queries
        self.rank = rank
        self.candidates_left = candidates_left
        self.runs = runs
        self.trials_per_rank_step = list(trials_per_rank_step or [])


class PromiseViolationError(HiddenShiftError):
    exit_code = EXIT_SOLVER


class AmplificationError(HiddenShiftError):
    exit_code = EXIT_SOLVER
