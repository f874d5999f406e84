"""Exception types shared across the package."""


class TelecgError(Exception):
    """Base class for package errors."""


class InvalidRecordError(TelecgError, ValueError):
    """A record violates structural invariants and cannot be processed."""


class CodecError(TelecgError, ValueError):
    """A tag-value batch cannot be encoded or decoded."""


class DemographicsForbiddenError(CodecError):
    """A batch carries a forbidden patient-demographics tag."""

    def __init__(self, tag: str):
        super().__init__(f"demographics forbidden: tag {tag}")
        self.tag = tag


class UnmeasurableRecordError(TelecgError):
    """No QRS activity found; the record cannot be delineated."""


class TransportError(TelecgError):
    """Upload failed after exhausting retries."""


class PermanentRejectionError(TransportError):
    """The server rejected the upload with a 4xx status."""

    def __init__(self, status: int, message: str):
        super().__init__(f"rejected with status {status}: {message}")
        self.status = status
        self.server_message = message


class RecordNotFoundError(TelecgError, KeyError):
    """No stored record with the requested id."""
