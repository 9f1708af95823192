"""Error and warning types raised by the exporter."""


class ExportError(Exception):
    """Base class for everything the exporter raises on purpose."""


class UnknownCodec(ExportError):
    """The requested codec id is not in the registry."""


class CheckpointMissing(ExportError):
    """No loadable checkpoint; the message carries fetch instructions."""


class ExportShapeError(ExportError):
    """Captured tensors are inconsistent with each other."""


class CodecRateMismatch(UserWarning):
    """Input sample rate differs from the codec rate; the input was resampled."""
