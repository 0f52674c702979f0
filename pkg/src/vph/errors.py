"""Exception types shared across the package.

The CLI maps these onto its exit-code contract: usage/config problems
exit 2, statistical verdict failures exit 3, resource limits exit 4.
"""


class CloudFormatError(ValueError):
    """Malformed point-cloud or diagram CSV. Carries the offending row."""

    def __init__(self, message: str, row: int | None = None):
        if row is not None:
            message = f"{message} (row {row})"
        super().__init__(message)
        self.row = row


class BudgetExceededError(RuntimeError):
    """Simplex enumeration hit the configured record budget."""

    def __init__(self, dim: int, budget: int):
        super().__init__(
            f"simplex budget of {budget} records exceeded while enumerating "
            f"dimension {dim}"
        )
        self.dim = dim
        self.budget = budget


class ConfigError(ValueError):
    """Invalid experiment configuration. Lists the offending fields."""

    def __init__(self, problems: list[str]):
        super().__init__("invalid configuration: " + "; ".join(problems))
        self.problems = list(problems)
