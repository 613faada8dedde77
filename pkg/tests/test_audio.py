"""Unit tests for WAV I/O and resampling."""

import struct

import numpy as np
import pytest
import soundfile as sf

from hifr_frontend.audio import (
    probe_wav,
    read_wav,
    resample,
    resample_by_ratio,
    round_half_away,
    write_wav,
)
from hifr_frontend.data_types import AudioBuffer
from hifr_frontend.enums import WavEncoding
from hifr_frontend.errors import WavCodecError, WavHeaderError, WavTruncatedError

from .conftest import dominant_frequency, sine


def _wav_bytes(fmt_tag=1, bits=16, channels=1, rate=16000, payload=b"\x00\x00" * 4, data_size=None):
    block = channels * bits // 8
    fmt = struct.pack("<HHIIHH", fmt_tag, channels, rate, rate * block, block, bits)
    size = len(payload) if data_size is None else data_size
    body = b"WAVE" + b"fmt " + struct.pack("<I", 16) + fmt + b"data" + struct.pack("<I", size) + payload
    return b"RIFF" + struct.pack("<I", len(body)) + body


class TestRoundHalfAway:
    """Tests for round_half_away."""

    def test_halves(self):
        """Test halves round away from zero."""
        assert round_half_away(0.5) == 1
        assert round_half_away(2.5) == 3
        assert round_half_away(-2.5) == -3
        assert round_half_away(14545.45) == 14545


class TestWavIO:
    """Tests for read_wav, write_wav and probe_wav."""

    def test_pcm16_round_trip(self, tmp_path):
        """Test PCM16 values survive within one quantization step."""
        samples = np.linspace(-0.9, 0.9, 1000)
        path = tmp_path / "a.wav"
        assert write_wav(AudioBuffer(samples, 16000), path) == 0
        back = read_wav(path)
        assert back.sample_rate == 16000
        assert np.max(np.abs(back.mono - samples)) <= 1 / 32768

    def test_float32_multichannel_round_trip(self, tmp_path):
        """Test float32 stereo files keep channel order."""
        samples = np.vstack([np.linspace(-1, 1, 50), np.linspace(1, -1, 50)])
        path = tmp_path / "b.wav"
        write_wav(AudioBuffer(samples, 8000), path, WavEncoding.FLOAT32)
        back = read_wav(path)
        assert back.channels == 2
        assert np.allclose(back.samples, samples, atol=1e-7)
        info = probe_wav(path)
        assert info.encoding is WavEncoding.FLOAT32
        assert info.num_samples == 50
        assert info.duration == pytest.approx(50 / 8000)

    def test_clipping_reported(self, tmp_path, caplog):
        """Test out-of-range samples are clipped and counted."""
        path = tmp_path / "c.wav"
        clipped = write_wav(AudioBuffer(np.array([0.0, 1.5, -1.5, 0.2]), 16000), path)
        assert clipped == 2
        assert "Clipped 2 samples" in caplog.text
        assert read_wav(path).mono[1] == pytest.approx(32767 / 32768)

    def test_pcm16_scaling(self, tmp_path):
        """Test int16 samples map to value / 32768."""
        path = tmp_path / "d.wav"
        path.write_bytes(_wav_bytes(payload=struct.pack("<4h", 0, 16384, -32768, 32767)))
        assert np.array_equal(read_wav(path).mono, [0.0, 0.5, -1.0, 32767 / 32768])

    def test_not_riff(self, tmp_path):
        """Test non-RIFF files raise WavHeaderError at offset 0."""
        path = tmp_path / "bad.wav"
        path.write_bytes(b"garbage" * 10)
        with pytest.raises(WavHeaderError) as exc:
            read_wav(path)
        assert exc.value.offset == 0

    def test_unsupported_codec(self, tmp_path):
        """Test 24-bit PCM raises WavCodecError at the fmt chunk."""
        path = tmp_path / "e.wav"
        path.write_bytes(_wav_bytes(bits=24, payload=b"\x00" * 6))
        with pytest.raises(WavCodecError) as exc:
            read_wav(path)
        assert exc.value.offset == 12

    def test_truncated_data(self, tmp_path):
        """Test a data chunk longer than the file raises WavTruncatedError."""
        path = tmp_path / "f.wav"
        path.write_bytes(_wav_bytes(data_size=100))
        with pytest.raises(WavTruncatedError) as exc:
            read_wav(path)
        assert exc.value.offset == 36

    def test_skips_unknown_chunks(self, tmp_path):
        """Test LIST chunks before data are skipped."""
        raw = _wav_bytes(payload=struct.pack("<2h", 100, -100))
        list_chunk = b"LIST" + struct.pack("<I", 3) + b"abc" + b"\x00"
        data_at = raw.index(b"data")
        patched = raw[:data_at] + list_chunk + raw[data_at:]
        patched = patched[:4] + struct.pack("<I", len(patched) - 8) + patched[8:]
        path = tmp_path / "g.wav"
        path.write_bytes(patched)
        assert read_wav(path).num_samples == 2


class TestResample:
    """Tests for resample and resample_by_ratio."""

    def test_equal_rates_identity(self, tone_buffer):
        """Test resampling to the same rate returns an identical copy."""
        out = resample(tone_buffer, 16000)
        assert np.array_equal(out.samples, tone_buffer.samples)
        assert out.samples is not tone_buffer.samples

    @pytest.mark.parametrize("out_rate,length", [(8000, 8000), (22050, 22050), (44100, 44100)])
    def test_output_length(self, tone_buffer, out_rate, length):
        """Test output length is round(L * out / in)."""
        out = resample(tone_buffer, out_rate)
        assert out.num_samples == length
        assert out.sample_rate == out_rate

    def test_preserves_tone_frequency(self, tone_buffer):
        """Test a 440 Hz tone stays at 440 Hz after 16k -> 8k."""
        out = resample(tone_buffer, 8000)
        assert dominant_frequency(out.mono[200:-200], 8000) == pytest.approx(440, abs=1)

    def test_downsampling_rejects_above_nyquist(self):
        """Test a 6 kHz tone is suppressed when resampling to 8 kHz."""
        buf = AudioBuffer(sine(6000.0), 16000)
        out = resample(buf, 8000)
        interior = out.mono[500:-500]
        assert np.sqrt(np.mean(interior**2)) < 0.01

    def test_interior_accuracy(self):
        """Test an in-band tone is reproduced closely away from the edges."""
        buf = AudioBuffer(sine(300.0), 16000)
        out = resample(buf, 24000)
        expected = sine(300.0, sample_rate=24000)
        assert np.max(np.abs(out.mono[200:-200] - expected[200:-200])) < 0.01

    def test_ratio_with_explicit_length(self, tone_buffer):
        """Test resample_by_ratio honours num_samples."""
        out = resample_by_ratio(tone_buffer, 0.5, num_samples=123)
        assert out.shape == (1, 123)

    def test_rejects_bad_rates(self, tone_buffer):
        """Test non-positive rates and ratios raise ValueError."""
        with pytest.raises(ValueError):
            resample(tone_buffer, 0)
        with pytest.raises(ValueError):
            resample_by_ratio(tone_buffer, -1.0)

    def test_rate_change_length(self, tone_buffer):
        """Test 16000 samples at 16 kHz become 17600 at 17.6 kHz."""
        assert resample(tone_buffer, 17600).num_samples == 17600

    def test_linearity(self, rng):
        """Test resampling commutes with linear combinations."""
        x, y = rng.standard_normal(4000), rng.standard_normal(4000)
        rx = resample(AudioBuffer(x, 16000), 11025).mono
        ry = resample(AudioBuffer(y, 16000), 11025).mono
        rxy = resample(AudioBuffer(2.0 * x - 0.5 * y, 16000), 11025).mono
        assert np.allclose(rxy, 2.0 * rx - 0.5 * ry, rtol=1e-6, atol=1e-9)

    def test_empty_wav_round_trip(self, tmp_path):
        """Test a zero-length buffer writes a valid WAV."""
        path = tmp_path / "empty.wav"
        write_wav(AudioBuffer(np.zeros(0), 16000), path)
        back = read_wav(path)
        assert back.num_samples == 0
        assert back.sample_rate == 16000


class TestSoundfileInterop:
    """Files written by soundfile and by write_wav are mutually readable."""

    def test_reads_soundfile_pcm16(self, tmp_path):
        """Test a stereo PCM16 file from soundfile reads back as value / 32768."""
        ints = np.array([[0, 100], [-32768, 32767], [16384, -16384]], dtype=np.int16)
        path = tmp_path / "sf.wav"
        sf.write(str(path), ints, 16000, subtype="PCM_16")
        back = read_wav(path)
        assert back.channels == 2
        assert np.array_equal(back.samples, ints.T / 32768.0)

    def test_header_of_soundfile_float(self, tmp_path):
        """Test the header walk accepts soundfile's float WAV layout."""
        path = tmp_path / "sf_float.wav"
        sf.write(str(path), np.zeros((25, 3), dtype=np.float32), 8000, subtype="FLOAT")
        info = probe_wav(path)
        assert info.encoding is WavEncoding.FLOAT32
        assert info.channels == 3
        assert info.num_samples == 25

    def test_write_wav_decodes_with_soundfile(self, tmp_path):
        """Test float32 output decodes to the same values with soundfile."""
        samples = np.linspace(-0.5, 0.5, 64)
        path = tmp_path / "ours.wav"
        write_wav(AudioBuffer(samples, 22050), path, WavEncoding.FLOAT32)
        data, rate = sf.read(str(path), dtype="float32")
        assert rate == 22050
        assert np.array_equal(data, samples.astype(np.float32))
