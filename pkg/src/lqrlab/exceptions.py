"""Exception hierarchy shared across the package.

Everything raised on purpose derives from :class:`LqrLabError`, so callers
can catch one base class at pipeline boundaries (the evaluation harness
relies on this to isolate per-item failures).
"""


class LqrLabError(Exception):
    """Base class for all errors raised by lqrlab."""


# --- audio ingestion ---------------------------------------------------------

class MalformedHeader(LqrLabError):
    """File is not a RIFF/WAVE container or a chunk is truncated/inconsistent."""


class UnsupportedEncoding(LqrLabError):
    """WAV encoding other than PCM-16, PCM-24, or IEEE float-32."""


class EmptyAudio(LqrLabError):
    """Audio holds zero samples."""


class SignalTooShort(LqrLabError):
    """Signal shorter than one analysis frame."""


class SampleRateMismatch(LqrLabError, ValueError):
    """Clip sample rate differs from the configured rate."""


# --- binary containers -------------------------------------------------------

class BadMagic(LqrLabError):
    """Container does not start with the expected magic bytes."""


class VersionUnsupported(LqrLabError):
    """Container version not understood by this reader."""


class TruncatedFile(LqrLabError):
    """File ends before the declared payload."""


class TruncatedTensor(TruncatedFile):
    """Tensor record ends before its declared element count."""


class InconsistentDims(LqrLabError):
    """Tensors in one container disagree on their dimensions."""


# --- quantization ------------------------------------------------------------

class TooFewVectors(LqrLabError, ValueError):
    """Fewer training vectors than requested codewords."""


class NonFiniteInput(LqrLabError, ValueError):
    """Input contains NaN or infinity."""


class DimensionMismatch(LqrLabError, ValueError):
    """Operands disagree on vector dimension."""


class DimensionTooSmall(LqrLabError, ValueError):
    """Vector dimension too small for the requested statistic."""


class IndexOutOfRange(LqrLabError, IndexError):
    """Stage index outside the valid range."""


# --- degradation -------------------------------------------------------------

class ZeroPowerSignal(LqrLabError, ValueError):
    """Signal power is zero, SNR is undefined."""


class CutoffOutOfRange(LqrLabError, ValueError):
    """Filter cutoff outside (0, Nyquist)."""


# --- statistics --------------------------------------------------------------

class DegenerateVariance(LqrLabError, ValueError):
    """A sequence has zero variance, correlation is undefined."""


class LengthMismatch(LqrLabError, ValueError):
    """Paired signals or sequences differ in length."""


class TooFewPoints(LqrLabError, ValueError):
    """Not enough data points for the statistic."""


# --- manifests and reports ---------------------------------------------------

class MissingPathColumn(LqrLabError):
    """Manifest CSV lacks the required ``path`` column."""


class BadRow(LqrLabError):
    """Manifest row holds an unparseable value."""

    def __init__(self, row_no: int, message: str):
        super().__init__(f"row {row_no}: {message}")
        self.row_no = row_no


class EmptyManifest(LqrLabError):
    """Manifest holds no entries."""


class IoFailure(LqrLabError, OSError):
    """Report or model file could not be written."""
