"""Deterministic synthetic rhythm corpus generation.

Each utterance is a sawtooth carrier shaped by raised-cosine loudness
bumps placed at class-specific proportional positions. Because the bump
geometry scales with the sampled duration, two utterances of the same
class share their loudness contour as a function of proportional time no
matter how long they are.
"""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np

from .errors import InvalidProfile
from .harness import DatasetManifest, ManifestEntry, write_manifest

DEFAULT_SAMPLE_RATE = 16000
# bump half-width as a fraction of utterance duration
BUMP_HALFWIDTH_FRAC = 0.06
FLOOR_AMPLITUDE = 0.01
PEAK_AMPLITUDE = 0.85
# relative f0 rise at each loudness bump, mimicking stressed syllables
F0_EXCURSION = 0.1
CARRIER_F0_RANGE = (100.0, 140.0)


def _validate_profile(profile) -> tuple[float, ...]:
    positions = tuple(float(p) for p in profile)
    if not positions:
        raise InvalidProfile("profile needs at least one peak position")
    if any(not (0.0 < p < 1.0) for p in positions):
        raise InvalidProfile(f"positions must lie strictly inside (0, 1): {positions}")
    if any(b <= a for a, b in zip(positions, positions[1:])):
        raise InvalidProfile(f"positions must be strictly increasing: {positions}")
    return positions


def render_utterance(
    positions,
    duration_s: float,
    sample_rate: int = DEFAULT_SAMPLE_RATE,
    carrier_f0: float = 120.0,
) -> np.ndarray:
    """Render one utterance with loudness bumps at proportional positions.

    Pure function of its arguments: the same inputs always produce the
    same samples.
    """
    positions = _validate_profile(positions)
    n = int(round(duration_s * sample_rate))
    u = np.arange(n) / n  # proportional time in [0, 1)

    bumps = np.zeros(n)
    for c in positions:
        inside = np.abs(u - c) <= BUMP_HALFWIDTH_FRAC
        bumps[inside] += 0.5 * (
            1.0 + np.cos(np.pi * (u[inside] - c) / BUMP_HALFWIDTH_FRAC)
        )
    bumps = np.clip(bumps, 0.0, 1.0)

    envelope = FLOOR_AMPLITUDE + PEAK_AMPLITUDE * bumps
    f0_contour = carrier_f0 * (1.0 + F0_EXCURSION * bumps)
    phase = np.cumsum(f0_contour) / sample_rate
    carrier = 2.0 * (phase % 1.0) - 1.0
    return envelope * carrier


def write_wav(path, samples: np.ndarray, sample_rate: int) -> None:
    """Write mono 16-bit PCM."""
    pcm = np.clip(np.round(samples * 32767.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(sample_rate)
        wf.writeframes(pcm.tobytes())


def synthesize_rhythm_corpus(
    class_profiles,
    n_per_class: int,
    duration_range_s: tuple[float, float],
    jitter_frac: float,
    seed: int,
    out_dir,
    sample_rate: int = DEFAULT_SAMPLE_RATE,
    class_labels=None,
    partition_tag: str = "",
) -> DatasetManifest:
    """Generate WAV files plus a manifest for one synthetic corpus.

    Parameters
    ----------
    class_profiles : sequence of sequences
        One profile per class: strictly increasing peak positions as
        fractions of the utterance duration.
    n_per_class : int
        Utterances per class (>= 2).
    duration_range_s : (float, float)
        Durations are sampled uniformly from this range.
    jitter_frac : float
        Each peak position is perturbed by uniform(-jitter, +jitter).
    seed : int
        Everything is drawn from one seeded generator, so the same seed
        reproduces identical WAV bytes.
    class_labels : sequence of str, optional
        Group labels; defaults to c0, c1, ...
    partition_tag : str
        Stamped on every entry (used by word-experiment corpora).
    """
    profiles = [_validate_profile(p) for p in class_profiles]
    if n_per_class < 2:
        raise InvalidProfile(f"n_per_class must be >= 2, got {n_per_class}")
    lo, hi = duration_range_s
    if not (0 < lo <= hi):
        raise InvalidProfile(f"bad duration range: {duration_range_s}")
    if class_labels is None:
        class_labels = [f"c{i}" for i in range(len(profiles))]
    elif len(class_labels) != len(profiles):
        raise InvalidProfile("one label per class profile required")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    entries = []
    id_prefix = f"{partition_tag}_" if partition_tag else ""
    for label, profile in zip(class_labels, profiles):
        base = np.array(profile)
        for k in range(n_per_class):
            duration = float(rng.uniform(lo, hi))
            jitter = rng.uniform(-jitter_frac, jitter_frac, size=base.size)
            positions = np.sort(np.clip(base + jitter, 0.02, 0.98))
            carrier_f0 = float(rng.uniform(*CARRIER_F0_RANGE))
            samples = render_utterance(
                positions, duration, sample_rate, carrier_f0
            )
            uid = f"{id_prefix}{label}_{k:03d}"
            wav_path = out_dir / f"{uid}.wav"
            write_wav(wav_path, samples, sample_rate)
            entries.append(
                ManifestEntry(
                    audio_path=wav_path,
                    utterance_id=uid,
                    speaker_id=f"spk{k:03d}",
                    group_label=label,
                    partition_tag=partition_tag,
                )
            )

    manifest = DatasetManifest(entries=entries)
    write_manifest(manifest, out_dir / "manifest.csv", relative_to=out_dir)
    return manifest
