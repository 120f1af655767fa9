"""Exception hierarchy shared across the pipeline.

The CLI maps these onto process exit codes: ConfigError -> 1,
DataError -> 2, RemoteClassifierError -> 3.
"""


class CorrtextError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(CorrtextError):
    """Invalid run configuration. Carries the offending keys."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid configuration: " + "; ".join(self.problems))


class DataError(CorrtextError):
    """Unusable input data (unreadable file, broken invariant, empty join)."""


class RemoteClassifierError(CorrtextError):
    """The remote entailment service could not produce judgments."""
