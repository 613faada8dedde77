"""Unit tests for speed perturbation."""

import numpy as np
import pytest

from hifr_frontend.audio import probe_wav, write_wav
from hifr_frontend.augment import augment_manifest, perturb_speed, rescale_segments, shift_segments
from hifr_frontend.data_types import (
    AudioBuffer,
    FramingConfig,
    Manifest,
    SegmentRecord,
    SpeedPerturbSpec,
    WavEntry,
)
from hifr_frontend.enums import WavEncoding
from hifr_frontend.errors import AugmentError
from hifr_frontend.framing import num_frames
from hifr_frontend.kio import parse_manifest

from .conftest import dominant_frequency


@pytest.fixture
def ten_utterances(corpus, tmp_path):
    """The two-recording corpus cut into five utterances each."""
    wav_scp, _ = corpus
    segments = tmp_path / "segments10"
    lines = []
    for rec_id in ("recA", "recB"):
        for i in range(5):
            lines.append(f"{rec_id}-s{i} {rec_id} {i * 0.6:.2f} {i * 0.6 + 0.5:.2f}\n")
    segments.write_text("".join(lines))
    return parse_manifest(wav_scp, segments)


class TestPerturbSpeed:
    """Tests for perturb_speed."""

    @pytest.mark.parametrize("speed,length", [(1.1, 14545), (0.9, 17778), (1.0, 16000)])
    def test_output_length(self, tone_buffer, speed, length):
        """Test the output has round(L / s) samples at the same rate."""
        out = perturb_speed(tone_buffer, speed)
        assert out.num_samples == length
        assert out.sample_rate == 16000

    @pytest.mark.parametrize("speed,freq", [(1.1, 484.0), (0.9, 396.0)])
    def test_frequency_scaling(self, tone_buffer, speed, freq):
        """Test a 440 Hz tone moves to 440 * s."""
        out = perturb_speed(tone_buffer, speed)
        assert dominant_frequency(out.mono) == pytest.approx(freq, abs=1.0)

    def test_identity_is_copy(self, tone_buffer):
        """Test speed 1.0 returns equal samples in a new array."""
        out = perturb_speed(tone_buffer, 1.0)
        assert np.array_equal(out.samples, tone_buffer.samples)
        assert out.samples is not tone_buffer.samples

    def test_slower_copy_has_more_frames(self, tone_buffer):
        """Test 98 frames at speed 1.0 become 109 at speed 0.9."""
        cfg = FramingConfig()
        assert num_frames(tone_buffer.num_samples, cfg, 16000) == 98
        assert num_frames(perturb_speed(tone_buffer, 0.9).num_samples, cfg, 16000) == 109

    def test_rejects_non_positive(self, tone_buffer):
        """Test zero and negative factors raise ValueError."""
        with pytest.raises(ValueError):
            perturb_speed(tone_buffer, 0.0)
        with pytest.raises(ValueError):
            perturb_speed(tone_buffer, -1.1)


class TestSegmentTimes:
    """Tests for rescale_segments and shift_segments."""

    def test_rescale(self):
        """Test 10.0-12.5 s at speed 1.1 becomes 9.0909-11.3636 s."""
        seg = SegmentRecord("u", "r", 10.0, 12.5)
        (out,) = rescale_segments([seg], 1.1)
        assert out.start == pytest.approx(9.090909, abs=1e-6)
        assert out.end == pytest.approx(11.363636, abs=1e-6)

    def test_rescale_inverse(self):
        """Test rescaling by s then 1/s restores the times."""
        segs = [SegmentRecord(f"u{i}", "r", 0.3 * i, 0.3 * i + 1.7) for i in range(20)]
        back = rescale_segments(rescale_segments(segs, 0.9), 1 / 0.9)
        for a, b in zip(segs, back):
            assert abs(a.start - b.start) < 1e-9
            assert abs(a.end - b.end) < 1e-9

    def test_shift(self):
        """Test a constant offset moves both ends."""
        (out,) = shift_segments([SegmentRecord("u", "r", 1.0, 2.0)], 0.5)
        assert (out.start, out.end) == (1.5, 2.5)

    def test_shift_before_zero(self):
        """Test shifting a segment before time 0 raises ValueError."""
        with pytest.raises(ValueError):
            shift_segments([SegmentRecord("u", "r", 0.2, 1.0)], -0.5)


class TestAugmentManifest:
    """Tests for augment_manifest."""

    def test_three_way_perturbation(self, ten_utterances, tmp_path):
        """Test speeds 0.9/1.0/1.1 triple the utterances with prefixed ids."""
        out_dir = tmp_path / "aug"
        result = augment_manifest(ten_utterances, SpeedPerturbSpec(), out_dir)
        assert result.ok
        assert result.files_written == 4
        assert result.manifest.num_utterances == 30
        ids = {seg.utt_id for seg in result.manifest.segments}
        assert {"recA-s1", "sp0.9-recA-s1", "sp1.1-recA-s1"} <= ids
        assert (out_dir / "wav" / "sp0.9-recB.wav").exists()

        seg = result.manifest.segment("sp1.1-recA-s1")
        assert seg.recording_id == "sp1.1-recA"
        assert seg.start == pytest.approx(0.6 / 1.1)
        assert seg.end == pytest.approx(1.1 / 1.1)

    def test_written_manifest_reloads(self, ten_utterances, tmp_path):
        """Test the combined manifest passes validation when read back from disk."""
        out_dir = tmp_path / "aug"
        result = augment_manifest(ten_utterances, SpeedPerturbSpec(speeds=(0.9, 1.1)), out_dir)
        result.manifest.write(out_dir / "wav.scp", out_dir / "segments")
        reloaded = parse_manifest(out_dir / "wav.scp", out_dir / "segments")
        assert reloaded.num_utterances == 20
        assert reloaded.durations["sp0.9-recA"] == pytest.approx(3.0 / 0.9, abs=1e-4)

    def test_identity_only(self, ten_utterances, tmp_path):
        """Test speeds [1.0] leave the manifest unchanged and write nothing."""
        out_dir = tmp_path / "aug"
        result = augment_manifest(ten_utterances, SpeedPerturbSpec(speeds=(1.0,)), out_dir)
        assert result.files_written == 0
        assert result.manifest.wav_entries == ten_utterances.wav_entries
        assert result.manifest.segments == sorted(ten_utterances.segments, key=lambda s: s.utt_id)
        assert not (out_dir / "wav").exists()

    def test_id_collision(self, tmp_path):
        """Test a generated id clashing with an existing one raises AugmentError."""
        entries = {
            "recA": WavEntry("recA", str(tmp_path / "a.wav")),
            "sp0.9-recA": WavEntry("sp0.9-recA", str(tmp_path / "b.wav")),
        }
        manifest = Manifest(entries, [], has_segments=True)
        with pytest.raises(AugmentError):
            augment_manifest(manifest, SpeedPerturbSpec(), tmp_path / "aug")
        assert not (tmp_path / "aug").exists()

    def test_failed_recording_is_reported(self, corpus, tmp_path):
        """Test an unreadable recording is reported while the rest succeed."""
        wav_scp, _ = corpus
        wav_scp.write_text(wav_scp.read_text() + f"recZ {tmp_path / 'missing.wav'}\n")
        segments = tmp_path / "segs"
        segments.write_text("a1 recA 0 1\nz1 recZ 0 1\n")
        manifest = parse_manifest(wav_scp, segments)

        result = augment_manifest(manifest, SpeedPerturbSpec(), tmp_path / "aug")
        assert [item for item, _ in result.failures] == ["recZ"]
        ids = {seg.utt_id for seg in result.manifest.segments}
        assert ids == {"a1", "sp0.9-a1", "sp1.1-a1", "z1"}

    def test_source_encoding_kept(self, tmp_path):
        """Test float32 sources produce float32 perturbed files."""
        path = tmp_path / "f.wav"
        write_wav(AudioBuffer(np.zeros(8000), 16000), path, WavEncoding.FLOAT32)
        manifest = Manifest(
            {"f": WavEntry("f", str(path))},
            [SegmentRecord("f", "f", 0.0, 0.5)],
            has_segments=False,
        )
        augment_manifest(manifest, SpeedPerturbSpec(speeds=(1.1,)), tmp_path / "aug")
        assert probe_wav(tmp_path / "aug" / "wav" / "sp1.1-f.wav").encoding is WavEncoding.FLOAT32

    def test_segment_past_perturbed_end(self, tmp_path):
        """Test a tail segment that no longer fits a faster copy is reported, not fatal."""
        path = tmp_path / "t.wav"
        write_wav(AudioBuffer(np.zeros(16000), 16000), path)
        manifest = Manifest(
            {"t": WavEntry("t", str(path))},
            [SegmentRecord("t-head", "t", 0.0, 0.5), SegmentRecord("t-tail", "t", 0.99999, 1.0)],
            has_segments=True,
        )
        result = augment_manifest(manifest, SpeedPerturbSpec(speeds=(1.0, 1.1)), tmp_path / "aug")
        assert [item for item, _ in result.failures] == ["sp1.1-t-tail"]
        ids = [seg.utt_id for seg in result.manifest.segments]
        assert ids == ["sp1.1-t-head", "t-head", "t-tail"]
        assert result.files_written == 1
