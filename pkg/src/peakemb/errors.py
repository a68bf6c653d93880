"""Exception types raised across the package.

Everything derives from :class:`PeakembError` so callers (and the CLI)
can distinguish data/contract violations from genuine bugs.
"""


class PeakembError(Exception):
    """Base class for all errors raised by this package."""


# --- audio ingestion ---

class NotWav(PeakembError):
    """File is not a RIFF/WAVE container."""


class UnsupportedFormat(PeakembError):
    """WAV file uses a codec, channel count or bit depth we do not read."""


class EmptyAudio(PeakembError):
    """Audio contains zero samples."""


class TooShort(PeakembError):
    """Audio is shorter than a single analysis frame."""


class InvalidConfig(PeakembError):
    """A configuration value violates its documented constraints."""


# --- descriptor tracks and embeddings ---

class EmptyTrack(PeakembError):
    """Descriptor track has no frames."""


class NoVoicedFrames(PeakembError):
    """Pitch track is entirely unvoiced; voiced-only normalization undefined."""


class TooFewFrames(PeakembError):
    """Track has fewer frames than the requested chunk count."""


class ShapeMismatch(PeakembError):
    """Embeddings cannot be combined because their shapes differ."""


class LengthMismatch(PeakembError):
    """Tracks from the same utterance differ in frame count."""


# --- cluster metrics ---

class DimensionMismatch(PeakembError):
    """Points in a set do not share a common dimensionality."""


class SingleLabel(PeakembError):
    """Metric requires at least two distinct group labels."""


# --- projection ---

class TooFewPoints(PeakembError):
    """Projection requires more input points."""


class PerplexityTooHigh(PeakembError):
    """Perplexity must be below (n - 1) / 3 for n input points."""


# --- harness ---

class MalformedManifest(PeakembError):
    """Manifest CSV is missing columns or violates basic constraints."""


class DuplicateId(PeakembError):
    """Two manifest rows share an utterance id."""


class MissingAudio(PeakembError):
    """A manifest row points at a file that does not exist."""


class NoPartitions(PeakembError):
    """Word experiment requested but no row carries a partition tag."""


class SingleClassPartition(PeakembError):
    """A partition holds only one rhythm class; metrics are undefined."""


class EmptyResults(PeakembError):
    """Report aggregation received no evaluated pairs or partitions."""


class InvalidProfile(PeakembError):
    """Synthetic corpus profile is not a strictly increasing sequence in (0, 1)."""
