"""Exception types shared across the toolkit.

Geometry errors are caught by the tracker to downgrade a frame to a
memory-carry; dataio errors are the only exceptions file readers are
allowed to raise on malformed input.
"""


class Ego3DTrackError(Exception):
    """Base class for all toolkit errors."""


class GeometryError(Ego3DTrackError):
    """Base class for camera-geometry failures."""


class InvalidDepthError(GeometryError):
    """Depth value is zero, negative, or otherwise unusable."""


class OutOfBoundsError(GeometryError):
    """Pixel coordinate falls outside the image."""


class BehindCameraError(GeometryError):
    """World point projects to non-positive camera-frame depth."""


class DegenerateRayError(GeometryError):
    """Viewing ray has (near-)zero length; angle is undefined."""


class TrackingError(Ego3DTrackError):
    """Base class for matching/filtering failures."""


class DimensionMismatchError(TrackingError):
    """Embedding dimensions disagree between template and proposals."""


class DegenerateTemplateError(TrackingError):
    """Averaged enrollment embeddings cancel to the zero vector."""


class EvaluationError(Ego3DTrackError):
    """Invalid input to the scoring protocol (duplicate ids, frame
    mismatch, oracle size limit)."""


class SceneSpecError(Ego3DTrackError):
    """Scene specification violates its invariants."""


class DataIOError(Ego3DTrackError):
    """Base class for file format errors. Readers raise only this."""


class FormatError(DataIOError):
    """Structurally malformed file (bad magic, unparsable line, ...)."""

    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}: "
        if line is not None:
            where += f"line {line}: "
        super().__init__(where + message)


class DataValidationError(DataIOError):
    """File parsed but violates a semantic invariant (non-unit
    quaternion, overlapping intervals, ...)."""

    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}: "
        if line is not None:
            where += f"line {line}: "
        super().__init__(where + message)
