"""Six temporal functionals per utterance, used as the comparison baseline.

Each functional is a single global value: rate of loudness peaks, mean
and standard deviation of continuously voiced region lengths, the same
for unvoiced regions, and the number of voiced regions per second
(pseudo-syllable rate). Being global averages, these features carry no
information about where in the utterance the peaks sit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .audio import LldTrack
from .embedding import moving_average
from .errors import EmptyTrack, InvalidConfig, LengthMismatch


@dataclass(frozen=True)
class PeakPicking:
    """Loudness peak-picking parameters.

    A peak must exceed the smoothed track mean by ``threshold_db`` and be
    at least ``min_separation_ms`` away from any larger peak.
    """

    threshold_db: float = 1.0
    min_separation_ms: float = 100.0
    smooth_window_frames: int = 5

    def __post_init__(self):
        if self.min_separation_ms <= 0:
            raise InvalidConfig("min_separation_ms must be positive")
        if self.smooth_window_frames < 1 or self.smooth_window_frames % 2 == 0:
            raise InvalidConfig("smooth_window_frames must be odd and >= 1")


@dataclass(frozen=True)
class TemporalFunctionals:
    loudness_peak_rate: float
    voiced_len_mean: float
    voiced_len_std: float
    unvoiced_len_mean: float
    unvoiced_len_std: float
    pseudo_syllable_rate: float

    def as_vector(self) -> np.ndarray:
        return np.array(
            [
                self.loudness_peak_rate,
                self.voiced_len_mean,
                self.voiced_len_std,
                self.unvoiced_len_mean,
                self.unvoiced_len_std,
                self.pseudo_syllable_rate,
            ],
            dtype=np.float64,
        )


def segment_voiced_regions(track: LldTrack) -> tuple[np.ndarray, np.ndarray]:
    """Split a track into maximal voiced / unvoiced runs.

    Returns two arrays of region durations in seconds (voiced, unvoiced),
    in temporal order. Leading and trailing unvoiced runs are included.
    """
    if len(track) == 0:
        raise EmptyTrack("cannot segment an empty track")
    flags = np.asarray(track.voiced, dtype=bool)
    boundaries = np.flatnonzero(np.diff(flags)) + 1
    edges = np.concatenate(([0], boundaries, [flags.size]))
    run_lengths = np.diff(edges)
    run_voiced = flags[edges[:-1]]
    durations = run_lengths * track.hop_s
    return durations[run_voiced], durations[~run_voiced]


def _region_stats(durations: np.ndarray) -> tuple[float, float]:
    if durations.size == 0:
        return 0.0, 0.0
    # population std: a single region has spread 0
    return float(durations.mean()), float(durations.std())


def count_loudness_peaks(
    loudness: LldTrack, picking: PeakPicking | None = None
) -> int:
    """Count local maxima of the smoothed loudness track above threshold."""
    picking = picking or PeakPicking()
    smoothed = moving_average(loudness.values, picking.smooth_window_frames)
    min_dist = max(1, int(round(picking.min_separation_ms / 1000.0 / loudness.hop_s)))
    peaks, _ = find_peaks(
        smoothed,
        height=smoothed.mean() + picking.threshold_db,
        distance=min_dist,
    )
    return int(peaks.size)


def compute_functionals(
    pitch: LldTrack,
    loudness: LldTrack,
    picking: PeakPicking | None = None,
) -> TemporalFunctionals:
    """Compute the six-value baseline vector for one utterance.

    Voiced/unvoiced segmentation uses the pitch track's voicing flags;
    peak picking uses the loudness track. Rates are counts divided by the
    total track duration.
    """
    if len(pitch) == 0 or len(loudness) == 0:
        raise EmptyTrack("functionals need non-empty tracks")
    if len(pitch) != len(loudness):
        raise LengthMismatch(
            f"pitch has {len(pitch)} frames, loudness has {len(loudness)}"
        )
    duration = pitch.duration_s
    voiced_durs, unvoiced_durs = segment_voiced_regions(pitch)
    v_mean, v_std = _region_stats(voiced_durs)
    uv_mean, uv_std = _region_stats(unvoiced_durs)
    n_peaks = count_loudness_peaks(loudness, picking)
    return TemporalFunctionals(
        loudness_peak_rate=n_peaks / duration,
        voiced_len_mean=v_mean,
        voiced_len_std=v_std,
        unvoiced_len_mean=uv_mean,
        unvoiced_len_std=uv_std,
        pseudo_syllable_rate=voiced_durs.size / duration,
    )
