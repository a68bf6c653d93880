"""Shared helpers for building WAV files and descriptor tracks."""

import struct
import wave

import numpy as np
import pytest

from peakemb import Descriptor, LldTrack


def write_pcm16(path, samples, sample_rate=16000, channels=1):
    pcm = np.clip(np.round(np.asarray(samples) * 32767.0), -32768, 32767)
    pcm = pcm.astype("<i2")
    if channels > 1:
        pcm = np.repeat(pcm[:, None], channels, axis=1).ravel()
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(channels)
        wf.setsampwidth(2)
        wf.setframerate(sample_rate)
        wf.writeframes(pcm.tobytes())
    return path


def write_float32(path, samples, sample_rate=16000):
    data = np.asarray(samples, dtype="<f4").tobytes()
    header = b"RIFF" + struct.pack("<I", 4 + 26 + 8 + len(data)) + b"WAVE"
    fmt = struct.pack("<HHIIHH", 3, 1, sample_rate, sample_rate * 4, 4, 32)
    body = b"fmt " + struct.pack("<I", len(fmt)) + fmt
    body += b"data" + struct.pack("<I", len(data)) + data
    path.write_bytes(header + body)
    return path


def sine(freq, duration_s=1.0, sample_rate=16000, amplitude=0.5):
    t = np.arange(int(duration_s * sample_rate)) / sample_rate
    return amplitude * np.sin(2 * np.pi * freq * t)


def sawtooth(freq, duration_s=1.0, sample_rate=16000, amplitude=0.4):
    t = np.arange(int(duration_s * sample_rate)) / sample_rate
    return amplitude * (2.0 * ((freq * t) % 1.0) - 1.0)


def make_track(values, voiced=None, descriptor=Descriptor.LOUDNESS, hop_s=0.01):
    values = np.asarray(values, dtype=np.float64)
    if voiced is None:
        voiced = np.ones(values.size, dtype=bool)
    return LldTrack(
        descriptor=descriptor,
        hop_s=hop_s,
        values=values,
        voiced=np.asarray(voiced, dtype=bool),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240801)
