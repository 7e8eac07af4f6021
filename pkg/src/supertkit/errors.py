"""Exception types shared across the toolkit."""


class SupertkitError(Exception):
    """Base class for all toolkit errors."""


class CorpusFormatError(SupertkitError):
    """Malformed input file; message names the file and, where known, the line."""

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc = f" [{path}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(message + loc)
        self.path = path
        self.line = line


class ValidationError(SupertkitError):
    """Input violates a documented invariant (duplicate ids, bad dimensions, ...)."""


class CoverageError(ValidationError):
    """An embedding file does not cover every corpus sentence."""

    def __init__(self, message, missing_keys=()):
        super().__init__(message)
        self.missing_keys = list(missing_keys)


class BudgetError(ValidationError):
    """An extraction action would push the summary past the word budget."""


class DegenerateInputError(SupertkitError):
    """Input is structurally valid but numerically unusable (empty bag, zero vector, zero variance)."""


class ConvergenceError(SupertkitError):
    """Iterative solver hit its iteration cap; carries the last iterate."""

    def __init__(self, message, last_iterate=None, iterations=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.iterations = iterations


class TrainingError(SupertkitError):
    """Value-function training diverged; carries the episode index."""

    def __init__(self, message, episode=None):
        super().__init__(message)
        self.episode = episode
