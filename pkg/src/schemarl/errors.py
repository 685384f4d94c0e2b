"""Exception types shared across the package."""


class SchemarlError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SchemarlError):
    """A source file does not match its expected grammar."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None,
                 offset: int | None = None):
        self.path = path
        self.line = line
        self.offset = offset
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        if offset is not None:
            where += f":{offset}"
        super().__init__(f"{where}: {message}" if where else message)


class IngestError(SchemarlError):
    """A source file parses but violates an ingestion contract."""


class ConstraintError(SchemarlError):
    """A semantic-constraint declaration is malformed or inconsistent."""


class WorkloadError(SchemarlError):
    """A workload document is malformed or references unknown attributes."""


class UnanswerableQueryError(SchemarlError):
    """A query's attributes cannot be connected in the given schema state."""

    def __init__(self, query_name: str, message: str):
        self.query_name = query_name
        super().__init__(message)


class InvalidActionError(SchemarlError):
    """A join action was rejected by the constraint pool or the state."""


class StateError(SchemarlError):
    """Internal consistency violation between catalog, facts and states."""
