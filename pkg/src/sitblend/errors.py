"""Exception types shared across the pipeline."""


class SitblendError(Exception):
    """Base class for all package errors."""


class SpecError(SitblendError):
    """Chart-spec document is malformed or semantically invalid.

    ``position`` carries (line, column) when the failure came from the
    underlying document syntax, else None.
    """

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class LayoutError(SitblendError):
    """Chart cannot be laid out (canvas too small, bad tree, ...)."""


class RasterError(SitblendError):
    """PNG decode/encode or rendering failure."""


class ControlParamError(SitblendError):
    """Invalid parameters for a control-map operator."""


class PlacementError(SitblendError):
    """Chart cannot be placed into the background at any positive scale."""


class RequestError(SitblendError):
    """Generation request violates the wire contract (dims, ranges)."""


class BackendConnectError(SitblendError):
    """Diffusion backend unreachable after the configured retries."""


class BackendError(SitblendError):
    """Backend returned an error payload; the payload text is surfaced verbatim."""

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload


class GenerationTimeout(SitblendError):
    """Generation did not reach a terminal state within the deadline.

    The submitted job id is retained so the result can be fetched later.
    """

    def __init__(self, message, job_id=None):
        super().__init__(message)
        self.job_id = job_id


class TilePlanError(SitblendError):
    """Tile grid cannot cover the image (zero-area tile, bad factor)."""


class TileFnError(SitblendError):
    """A per-tile transform returned wrong dimensions or raised; carries the tile index."""

    def __init__(self, message, tile_index=None):
        super().__init__(message)
        self.tile_index = tile_index


class StageError(SitblendError):
    """A pipeline stage failed; ``stage`` names it, ``__cause__`` keeps the original."""

    def __init__(self, stage, message):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.message = message


class SessionBusy(SitblendError):
    """A mutating job is already in flight for this session (409-style rejection)."""


class SessionNotFound(SitblendError):
    """No session with the given id (404-style rejection)."""
