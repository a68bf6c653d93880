"""Fixed-length peak embeddings of descriptor tracks.

A peak embedding compresses a variable-length descriptor track into one
value per temporal chunk: normalize, smooth with a moving average, split
into ``chunk_count`` equal spans, and keep each span's maximum. The
result has the same length for every utterance, so embeddings of
utterances spoken at different rates compare position-for-position.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .audio import Descriptor, LldTrack
from .errors import (
    EmptyTrack,
    InvalidConfig,
    NoVoicedFrames,
    ShapeMismatch,
    TooFewFrames,
)


class Normalization(Enum):
    MINMAX = "minmax"
    ZSCORE = "zscore"


class PitchScope(Enum):
    """Which frames define the pitch normalization statistics."""

    VOICED_ONLY = "voiced"
    ALL_FRAMES = "all"


class CombineMode(Enum):
    CONCAT = "concat"
    SUM = "sum"


@dataclass(frozen=True)
class PeConfig:
    """Peak-embedding extraction parameters."""

    chunk_count: int = 10
    smooth_window_frames: int = 5
    normalization: Normalization = Normalization.MINMAX
    pitch_scope: PitchScope = PitchScope.VOICED_ONLY

    def __post_init__(self):
        if self.chunk_count < 1:
            raise InvalidConfig("chunk_count must be >= 1")
        if self.smooth_window_frames < 1 or self.smooth_window_frames % 2 == 0:
            raise InvalidConfig("smooth_window_frames must be odd and >= 1")


@dataclass(frozen=True)
class PeakEmbedding:
    """Fixed-length embedding: ``chunk_count`` values per descriptor."""

    values: np.ndarray
    descriptors: tuple[str, ...]
    chunk_count: int

    def __post_init__(self):
        if self.values.size != self.chunk_count * len(self.descriptors):
            raise ShapeMismatch(
                f"{self.values.size} values cannot hold {len(self.descriptors)} "
                f"descriptors of {self.chunk_count} chunks"
            )


def moving_average(values: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average with window shrinkage at the edges.

    Positions near the boundary average only the in-range portion of the
    window, so output length equals input length.
    """
    if window < 1 or window % 2 == 0:
        raise InvalidConfig("window must be odd and >= 1")
    if window == 1:
        return np.asarray(values, dtype=np.float64).copy()
    x = np.asarray(values, dtype=np.float64)
    half = window // 2
    csum = np.concatenate(([0.0], np.cumsum(x)))
    idx = np.arange(x.size)
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half + 1, x.size)
    return (csum[hi] - csum[lo]) / (hi - lo)


def preprocess_track(track: LldTrack, cfg: PeConfig | None = None) -> np.ndarray:
    """Normalize and smooth a track, returning a plain value sequence.

    Min-max maps the normalization population onto [0, 1]; a constant
    population maps to all 0.5. Z-score divides by the population standard
    deviation (constant population maps to all 0). For pitch tracks under
    ``PitchScope.VOICED_ONLY`` the statistics come from voiced frames only
    and unvoiced frames are pinned to 0 after normalization, before
    smoothing.
    """
    cfg = cfg or PeConfig()
    if len(track) == 0:
        raise EmptyTrack("cannot preprocess an empty track")
    values = np.asarray(track.values, dtype=np.float64)

    voiced_only = (
        track.descriptor is Descriptor.PITCH
        and cfg.pitch_scope is PitchScope.VOICED_ONLY
    )
    if voiced_only:
        if not np.any(track.voiced):
            raise NoVoicedFrames("pitch track has no voiced frames")
        population = values[track.voiced]
    else:
        population = values

    if cfg.normalization is Normalization.MINMAX:
        lo = population.min()
        span = population.max() - lo
        if span == 0.0:
            normalized = np.full_like(values, 0.5)
        else:
            normalized = (values - lo) / span
    else:
        mean = population.mean()
        std = population.std()
        if std == 0.0:
            normalized = np.zeros_like(values)
        else:
            normalized = (values - mean) / std

    if voiced_only:
        normalized = np.where(track.voiced, normalized, 0.0)
    return moving_average(normalized, cfg.smooth_window_frames)


def peak_embed(
    preprocessed: np.ndarray, cfg: PeConfig | None = None, descriptor: str = "lld"
) -> PeakEmbedding:
    """Max-pool a preprocessed sequence into ``chunk_count`` chunk maxima.

    Chunk ``i`` covers indices [floor(i*N/K), floor((i+1)*N/K)), so every
    frame belongs to exactly one chunk and the output length is always K.
    """
    cfg = cfg or PeConfig()
    x = np.asarray(preprocessed, dtype=np.float64)
    n = x.size
    k = cfg.chunk_count
    if n < k:
        raise TooFewFrames(f"{n} frames cannot fill {k} chunks")
    starts = (np.arange(k) * n) // k
    pooled = np.maximum.reduceat(x, starts)
    return PeakEmbedding(values=pooled, descriptors=(descriptor,), chunk_count=k)


def combine(a: PeakEmbedding, b: PeakEmbedding, mode: CombineMode) -> PeakEmbedding:
    """Merge two embeddings by concatenation or element-wise sum."""
    if a.chunk_count != b.chunk_count:
        raise ShapeMismatch(
            f"chunk counts differ: {a.chunk_count} vs {b.chunk_count}"
        )
    if mode is CombineMode.CONCAT:
        return PeakEmbedding(
            values=np.concatenate([a.values, b.values]),
            descriptors=a.descriptors + b.descriptors,
            chunk_count=a.chunk_count,
        )
    if len(a.descriptors) != len(b.descriptors):
        raise ShapeMismatch(
            f"sum needs equal descriptor counts: {len(a.descriptors)} vs "
            f"{len(b.descriptors)}"
        )
    fused = tuple(f"{da}+{db}" for da, db in zip(a.descriptors, b.descriptors))
    return PeakEmbedding(
        values=a.values + b.values,
        descriptors=fused,
        chunk_count=a.chunk_count,
    )


def embed_track(track: LldTrack, cfg: PeConfig | None = None) -> PeakEmbedding:
    """Preprocess and embed a track in one step."""
    cfg = cfg or PeConfig()
    return peak_embed(preprocess_track(track, cfg), cfg, track.descriptor.value)
