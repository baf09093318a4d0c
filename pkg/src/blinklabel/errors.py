"""Exception types raised across the library.

Everything derives from BlinkLabelError so callers can catch broadly;
the CLI maps these to exit code 1 with a one-line message.
"""


class BlinkLabelError(Exception):
    """Base class for all library errors."""


# --- event stream I/O ---

class MalformedHeader(BlinkLabelError):
    """Stream header is missing, truncated, or internally inconsistent."""


class OutOfBoundsEvent(BlinkLabelError):
    """Event coordinates fall outside the declared sensor geometry."""


class UnsortedStream(BlinkLabelError):
    """Event timestamps regress within a stream."""


class ZeroWindow(BlinkLabelError):
    """Frame partition window must be at least 1 microsecond."""


# --- simulation ---

class TrajectoryOutOfBounds(BlinkLabelError):
    """A marker trajectory leaves the sensor area."""


class UnknownScenario(BlinkLabelError):
    """Requested scenario preset does not exist."""


# --- clustering / signatures ---

class EmptyCluster(BlinkLabelError):
    """Operation requires a cluster with at least one event."""


class EmptyInput(BlinkLabelError):
    """Operation requires a non-empty event sequence."""


class InsufficientTransitions(BlinkLabelError):
    """Too few polarity changes to estimate a blink signature."""


class EmptyLedTable(BlinkLabelError):
    """An LED table with at least one entry is required."""


# --- matching ---

class BothWeightsZero(BlinkLabelError):
    """At least one of the distance weights must be positive."""


# --- labels / corrections ---

class UnknownLed(BlinkLabelError):
    """Correction references an LED id absent from the table."""


class TickOutOfRange(BlinkLabelError):
    """Correction targets a millisecond tick outside the labeled span."""


class UnknownCluster(BlinkLabelError):
    """Reassign correction references a cluster that does not exist."""


# --- evaluation ---

class NoCrossing(BlinkLabelError):
    """Trajectory never crosses the query line after the start time."""


class DegenerateLine(BlinkLabelError):
    """Line endpoints coincide."""


class EmptyOverlap(BlinkLabelError):
    """Prediction and ground-truth tick ranges do not overlap."""
