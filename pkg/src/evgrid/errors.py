"""Exception hierarchy shared by all evgrid modules.

Everything raised on bad data derives from :class:`EvgridError` so the CLI
can map it to a stable exit code.
"""


class EvgridError(Exception):
    """Base class for all evgrid data and usage errors."""


class InsufficientEvents(EvgridError):
    """A fixed-event-number window was requested past the end of the stream."""


class InvalidInterval(EvgridError):
    """A fixed-interval-time window was requested with a non-positive span."""


class EmptyWindow(EvgridError):
    """An operation that needs at least one event received none."""


class NonPositiveIntensity(EvgridError):
    """The event simulator saw an intensity <= 0, whose log is undefined."""


class ZeroDim(EvgridError):
    """A grid dimension of zero was requested."""


class TooFewPoints(EvgridError):
    """Farthest-point sampling asked for more centers than points exist."""


class EmptyCloud(EvgridError):
    """A neighbor search ran against a cloud with no points."""


class ShapeMismatch(EvgridError):
    """Array arguments disagree on row/column counts."""


class DimMismatch(EvgridError):
    """Grid tensors with different spatial dimensions cannot be concatenated."""


class UnsupportedOp(EvgridError):
    """An unknown operation id was passed to the autodiff dispatcher."""


class InvalidDepths(EvgridError):
    """Frustum construction needs 0 < near < far."""


class NotARotation(EvgridError):
    """A matrix failed the orthonormality / determinant check."""


class KeyMismatch(EvgridError):
    """Ground-truth and predicted pose files disagree on timestamp keys."""


class FormatError(EvgridError):
    """A file failed to parse; the message names the offending byte or line."""


class ConfigError(EvgridError):
    """A configuration value is out of range or malformed."""
