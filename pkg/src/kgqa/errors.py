"""Exception hierarchy shared across the pipeline.

Every error carries an ``exit_code`` used by the CLI: 2 for configuration
problems, 3 for data problems, 4 for remote-service problems.
"""


class KgqaError(Exception):
    exit_code = 1


class ConfigError(KgqaError):
    exit_code = 2


class DataError(KgqaError):
    exit_code = 3


class LoadError(DataError):
    """Raised when an input file cannot be loaded; lists the first offenders."""

    def __init__(self, message, offenders=(), total=None):
        self.offenders = list(offenders)
        self.total = len(self.offenders) if total is None else total
        lines = [message]
        for where, lineno, detail in self.offenders[:10]:
            lines.append(f"  {where}:{lineno}: {detail}")
        if self.total > 10:
            lines.append(f"  ... and {self.total - 10} more")
        super().__init__("\n".join(lines))


class NotFoundError(DataError):
    pass


class IndexBuildError(DataError):
    pass


class QueryParseError(DataError):
    """SPARQL text rejected; ``kind`` distinguishes out-of-grammar constructs."""

    def __init__(self, message, kind="syntax-error", offset=None):
        self.kind = kind
        self.offset = offset
        where = f" at offset {offset}" if offset is not None else ""
        super().__init__(f"{kind}: {message}{where}")


class ExecutionError(DataError):
    pass


class RemoteServiceError(KgqaError):
    exit_code = 4


class TransportError(RemoteServiceError):
    pass


class RemoteExecutionError(ExecutionError):
    exit_code = 4


class DisambiguationError(RemoteServiceError):
    pass


class GenerationError(KgqaError):
    pass


class SelectionParseError(KgqaError):
    """Model response lacked the answer markers."""
