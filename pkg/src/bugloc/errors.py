"""Exception types shared across the package."""


class BugLocError(Exception):
    """Base class for all package-specific failures."""


class CorpusError(BugLocError):
    """Benchmark or project data could not be loaded or validated."""


class TrainingError(BugLocError):
    """Embedding training diverged or was misconfigured."""
