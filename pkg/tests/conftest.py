"""Pytest configuration for front-end tests.

Ensures the repo root is importable and provides synthetic audio fixtures.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

_REPO_ROOT = Path(__file__).resolve().parents[1]
_REPO_ROOT_STR = str(_REPO_ROOT)
if _REPO_ROOT_STR not in sys.path:
    sys.path.insert(0, _REPO_ROOT_STR)

from hifr_frontend.audio import write_wav  # noqa: E402
from hifr_frontend.data_types import AudioBuffer  # noqa: E402

SAMPLE_RATE = 16000


def sine(freq: float, seconds: float = 1.0, sample_rate: int = SAMPLE_RATE, amp: float = 0.5) -> np.ndarray:
    """Pure tone starting at phase 0."""
    t = np.arange(int(round(seconds * sample_rate))) / sample_rate
    return amp * np.sin(2 * np.pi * freq * t)


def dominant_frequency(signal: np.ndarray, sample_rate: int = SAMPLE_RATE) -> float:
    """Frequency of the largest zero-padded DFT bin (0.25 Hz resolution at 16 kHz)."""
    nfft = 1 << 16
    spectrum = np.abs(np.fft.rfft(signal * np.hanning(len(signal)), n=nfft))
    return float(np.argmax(spectrum) * sample_rate / nfft)


@pytest.fixture
def rng():
    """Seeded generator shared by a test."""
    return np.random.default_rng(1234)


@pytest.fixture
def tone_buffer():
    """One second of a 440 Hz tone at 16 kHz."""
    return AudioBuffer(sine(440.0), SAMPLE_RATE)


@pytest.fixture
def corpus(tmp_path):
    """Two recordings with four segments, written as wav.scp and segments."""
    gen = np.random.default_rng(7)
    wav_dir = tmp_path / "audio"
    wav_dir.mkdir()
    wav_lines = []
    for index, rec_id in enumerate(["recA", "recB"]):
        samples = sine(150.0 + 100 * index, seconds=3.0) + 0.01 * gen.standard_normal(3 * SAMPLE_RATE)
        path = wav_dir / f"{rec_id}.wav"
        write_wav(AudioBuffer(samples, SAMPLE_RATE), path)
        wav_lines.append(f"{rec_id} {path}\n")
    wav_scp = tmp_path / "wav.scp"
    wav_scp.write_text("".join(wav_lines))
    segments = tmp_path / "segments"
    segments.write_text(
        "recA-u1 recA 0.00 1.00\n"
        "recA-u2 recA 1.50 2.75\n"
        "recB-u1 recB 0.25 1.25\n"
        "recB-u2 recB 2.00 3.00\n"
    )
    return wav_scp, segments
