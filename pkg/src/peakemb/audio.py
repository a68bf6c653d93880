"""WAV ingestion, framing, and the two low-level descriptor tracks.

The two descriptors everything downstream consumes are a fundamental
frequency track (with per-frame voicing decisions) and an RMS loudness
track in dB. Both are computed on the same frame grid so they can be
aligned frame-for-frame.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import (
    EmptyAudio,
    InvalidConfig,
    MissingAudio,
    NotWav,
    TooShort,
    UnsupportedFormat,
)

# RMS floor: digital silence maps to 20*log10(1e-7) = -140 dB.
LOUDNESS_FLOOR_RMS = 1e-7

# Earliest autocorrelation candidate within this factor of the strongest
# candidate wins; suppresses subharmonic (octave-down) picks on strongly
# periodic frames.
_CANDIDATE_MARGIN = 0.9


class Descriptor(Enum):
    """Which low-level descriptor a track holds."""

    PITCH = "pitch"
    LOUDNESS = "loudness"


@dataclass(frozen=True)
class AudioBuffer:
    """Mono audio with samples normalized to [-1, 1].

    Attributes
    ----------
    samples : np.ndarray
        1-D float64 array of normalized amplitudes.
    sample_rate : int
        Sampling rate in Hz.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise InvalidConfig(f"sample_rate must be positive, got {self.sample_rate}")
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise EmptyAudio("audio buffer must hold at least one sample")
        peak = float(np.max(np.abs(self.samples)))
        if peak > 1.0 + 1e-9:
            raise InvalidConfig(f"samples exceed [-1, 1] (peak {peak:.6g})")

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class FrameConfig:
    """Framing and pitch-search parameters.

    The frame must fit at least two periods of ``f0_floor_hz`` so the
    autocorrelation search covers the lowest lag; ``validate_for``
    enforces that against a concrete sample rate.
    """

    frame_length_ms: float = 40.0
    hop_ms: float = 10.0
    f0_floor_hz: float = 60.0
    f0_ceil_hz: float = 500.0
    voicing_threshold: float = 0.45

    def __post_init__(self):
        if self.frame_length_ms <= 0 or self.hop_ms <= 0:
            raise InvalidConfig("frame_length_ms and hop_ms must be positive")
        if self.hop_ms > self.frame_length_ms:
            raise InvalidConfig("hop_ms must not exceed frame_length_ms")
        if not (0 < self.f0_floor_hz < self.f0_ceil_hz):
            raise InvalidConfig("need 0 < f0_floor_hz < f0_ceil_hz")
        if not (0.0 < self.voicing_threshold < 1.0):
            raise InvalidConfig("voicing_threshold must lie in (0, 1)")

    def frame_length(self, sample_rate: int) -> int:
        return int(round(self.frame_length_ms * sample_rate / 1000.0))

    def hop(self, sample_rate: int) -> int:
        return int(round(self.hop_ms * sample_rate / 1000.0))

    def validate_for(self, sample_rate: int) -> None:
        frame_len = self.frame_length(sample_rate)
        need = 2.0 * sample_rate / self.f0_floor_hz
        if frame_len < need:
            raise InvalidConfig(
                f"frame of {frame_len} samples cannot hold two periods of "
                f"{self.f0_floor_hz} Hz (needs {need:.0f})"
            )


@dataclass(frozen=True)
class LldTrack:
    """Per-frame time series of one descriptor.

    Pitch values are Hz on voiced frames and exactly 0 on unvoiced ones;
    loudness values are dB. ``voiced`` always has the same length as
    ``values``.
    """

    descriptor: Descriptor
    hop_s: float
    values: np.ndarray
    voiced: np.ndarray

    def __post_init__(self):
        if self.values.size == 0 or self.values.shape != self.voiced.shape:
            raise InvalidConfig("values and voiced must be equal-length, non-empty")
        if self.hop_s <= 0:
            raise InvalidConfig("hop_s must be positive")
        if self.descriptor is Descriptor.PITCH:
            unvoiced = ~self.voiced
            if np.any(self.values[unvoiced] != 0.0):
                raise InvalidConfig("pitch must be 0 on unvoiced frames")

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def duration_s(self) -> float:
        return self.values.size * self.hop_s


def load_wav(path) -> AudioBuffer:
    """Read a mono RIFF/WAVE file (16-bit PCM or 32-bit float).

    Parameters
    ----------
    path : str or Path
        File to read.

    Returns
    -------
    AudioBuffer
        Samples scaled to [-1, 1]; int16 data is divided by 32768.

    Raises
    ------
    NotWav
        The file does not start with a RIFF/WAVE header.
    UnsupportedFormat
        Multi-channel audio, compressed codecs, or other bit depths.
    EmptyAudio
        The data chunk holds no samples.
    """
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise MissingAudio(f"{path}: {exc}") from exc
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise NotWav(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (chunk_size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + chunk_size]
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise UnsupportedFormat(f"{path}: truncated fmt chunk")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            payload = body
        pos += 8 + chunk_size + (chunk_size & 1)  # chunks are word-aligned

    if fmt is None or payload is None:
        raise UnsupportedFormat(f"{path}: missing fmt or data chunk")
    audio_format, channels, sample_rate, _, _, bits = fmt
    if channels != 1:
        raise UnsupportedFormat(f"{path}: {channels} channels, expected mono")
    if audio_format == 1 and bits == 16:
        raw = np.frombuffer(payload[: len(payload) - len(payload) % 2], dtype="<i2")
        samples = raw.astype(np.float64) / 32768.0
    elif audio_format == 3 and bits == 32:
        raw = np.frombuffer(payload[: len(payload) - len(payload) % 4], dtype="<f4")
        samples = raw.astype(np.float64)
    else:
        raise UnsupportedFormat(
            f"{path}: format tag {audio_format} with {bits}-bit samples"
        )
    if samples.size == 0:
        raise EmptyAudio(f"{path}: data chunk holds no samples")
    return AudioBuffer(samples=samples, sample_rate=sample_rate)


def frame_signal(audio: AudioBuffer, cfg: FrameConfig) -> np.ndarray:
    """Slice audio into overlapping frames.

    Returns a (n_frames, frame_length) array with
    ``n_frames = floor((n_samples - frame_length) / hop) + 1``. A trailing
    partial frame is dropped, never zero-padded.
    """
    frame_len = cfg.frame_length(audio.sample_rate)
    hop = cfg.hop(audio.sample_rate)
    x = audio.samples
    if x.size < frame_len:
        raise TooShort(
            f"audio of {x.size} samples is shorter than one frame ({frame_len})"
        )
    windows = np.lib.stride_tricks.sliding_window_view(x, frame_len)
    return windows[::hop].copy()


def _autocorr_candidates(frames: np.ndarray, sample_rate: int, cfg: FrameConfig):
    """Taper-compensated normalized autocorrelation peak picking.

    Frames are mean-subtracted, Hann-windowed and autocorrelated via FFT.
    Dividing the normalized autocorrelation by the window's own normalized
    autocorrelation undoes the taper so a perfectly periodic frame scores
    ~1 at its period regardless of lag. Candidate peaks are refined by
    parabolic interpolation; the earliest candidate within
    ``_CANDIDATE_MARGIN`` of the strongest one wins.

    Returns (lag, strength, has_candidate) arrays, one entry per frame.
    """
    n_frames, frame_len = frames.shape
    centered = frames - frames.mean(axis=1, keepdims=True)
    window = np.hanning(frame_len)
    nfft = 1 << int(np.ceil(np.log2(2 * frame_len)))

    spec = np.fft.rfft(centered * window, nfft)
    acf = np.fft.irfft(spec.real ** 2 + spec.imag ** 2, nfft)[:, :frame_len]
    r0 = acf[:, 0]
    has_energy = r0 > 0.0

    wspec = np.fft.rfft(window, nfft)
    wacf = np.fft.irfft(wspec.real ** 2 + wspec.imag ** 2, nfft)[:frame_len]
    taper = wacf / wacf[0]

    norm = np.where(
        has_energy[:, None], acf / np.maximum(r0[:, None], 1e-300), 0.0
    )
    corrected = norm / taper[None, :]

    lag_min = max(2, int(np.ceil(sample_rate / cfg.f0_ceil_hz)))
    lag_max = min(int(np.floor(sample_rate / cfg.f0_floor_hz)), frame_len - 2)
    if lag_min >= lag_max:
        raise InvalidConfig("pitch search range is empty for this sample rate")

    left = corrected[:, lag_min - 1:lag_max]
    mid = corrected[:, lag_min:lag_max + 1]
    right = corrected[:, lag_min + 1:lag_max + 2]

    curvature = left - 2.0 * mid + right
    safe = np.where(np.abs(curvature) > 1e-30, curvature, 1.0)
    delta = np.where(
        np.abs(curvature) > 1e-30,
        np.clip(0.5 * (left - right) / safe, -0.5, 0.5),
        0.0,
    )
    refined = mid + 0.25 * (right - left) * delta
    is_peak = (mid > left) & (mid >= right)

    peak_vals = np.where(is_peak, refined, -np.inf)
    strongest = peak_vals.max(axis=1)
    adequate = is_peak & (refined >= _CANDIDATE_MARGIN * strongest[:, None])
    first = np.argmax(adequate, axis=1)
    rows = np.arange(n_frames)
    has_candidate = adequate[rows, first] & has_energy

    lag = (lag_min + first) + np.where(has_candidate, delta[rows, first], 0.0)
    strength = np.where(has_candidate, refined[rows, first], 0.0)
    return lag, strength, has_candidate


def estimate_f0(audio: AudioBuffer, cfg: FrameConfig | None = None) -> LldTrack:
    """Estimate a fundamental frequency track with voicing decisions.

    A frame is voiced when its strongest taper-compensated normalized
    autocorrelation peak reaches ``cfg.voicing_threshold``; its f0 is the
    sample rate over the parabolic-refined peak lag, clamped to
    [f0_floor_hz, f0_ceil_hz]. Unvoiced frames carry 0.
    """
    cfg = cfg or FrameConfig()
    cfg.validate_for(audio.sample_rate)
    frames = frame_signal(audio, cfg)
    lag, strength, has_candidate = _autocorr_candidates(
        frames, audio.sample_rate, cfg
    )
    voiced = has_candidate & (strength >= cfg.voicing_threshold)
    f0 = np.where(
        voiced,
        np.clip(audio.sample_rate / lag, cfg.f0_floor_hz, cfg.f0_ceil_hz),
        0.0,
    )
    return LldTrack(
        descriptor=Descriptor.PITCH,
        hop_s=cfg.hop(audio.sample_rate) / audio.sample_rate,
        values=f0,
        voiced=voiced,
    )


def estimate_loudness(
    audio: AudioBuffer,
    cfg: FrameConfig | None = None,
    voiced: np.ndarray | None = None,
) -> LldTrack:
    """Per-frame RMS level in dB with a -140 dB silence floor.

    ``voiced`` flags may be copied in from a co-computed pitch track;
    otherwise every frame is marked voiced.
    """
    cfg = cfg or FrameConfig()
    frames = frame_signal(audio, cfg)
    rms = np.sqrt(np.mean(frames ** 2, axis=1))
    values = 20.0 * np.log10(np.maximum(rms, LOUDNESS_FLOOR_RMS))
    if voiced is None:
        voiced = np.ones(values.size, dtype=bool)
    else:
        voiced = np.asarray(voiced, dtype=bool)
        if voiced.size != values.size:
            raise InvalidConfig(
                f"voiced flags ({voiced.size}) do not match frame count ({values.size})"
            )
    return LldTrack(
        descriptor=Descriptor.LOUDNESS,
        hop_s=cfg.hop(audio.sample_rate) / audio.sample_rate,
        values=values,
        voiced=voiced,
    )


def extract_tracks(
    audio: AudioBuffer, cfg: FrameConfig | None = None
) -> tuple[LldTrack, LldTrack]:
    """Compute aligned pitch and loudness tracks for one utterance.

    The loudness track inherits the pitch track's voicing flags.
    """
    cfg = cfg or FrameConfig()
    pitch = estimate_f0(audio, cfg)
    loudness = estimate_loudness(audio, cfg, voiced=pitch.voiced)
    return pitch, loudness


def write_track_csv(pitch: LldTrack, loudness: LldTrack, path) -> None:
    """Dump aligned tracks as `frame_index,time_s,pitch_hz,voiced,loudness_db`."""
    if len(pitch) != len(loudness):
        raise InvalidConfig("pitch and loudness tracks differ in length")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("frame_index,time_s,pitch_hz,voiced,loudness_db\n")
        for i in range(len(pitch)):
            fh.write(
                f"{i},{i * pitch.hop_s:.6f},{pitch.values[i]:.6f},"
                f"{int(pitch.voiced[i])},{loudness.values[i]:.6f}\n"
            )
