"""Unit tests for encoder temporal shape arithmetic."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hifr_frontend.data_types import EncoderSpec, FramingConfig, LayerGeometry
from hifr_frontend.enums import LayerKind, PoolRounding
from hifr_frontend.shapes import (
    encoder_output_length,
    frame_rate_table,
    layer_out_len,
    total_subsample_factor,
)


def _simulate_layer(seq, layer, rounding):
    """Slide the window over an explicit padded index list and max-pool it."""
    padded = [None] * layer.padding + list(seq) + [None] * layer.padding
    overhang = layer.stride - 1 if rounding is PoolRounding.CEIL and layer.kind is LayerKind.POOL else 0
    out = []
    start = 0
    while start + layer.kernel <= len(padded) + overhang:
        window = [x for x in padded[start : start + layer.kernel] if x is not None]
        out.append(max(window) if window else None)
        start += layer.stride
    return out


def _simulate(length, spec):
    seq = list(range(length))
    for layer in spec.layers:
        seq = _simulate_layer(seq, layer, spec.pool_rounding)
    for factor in spec.pblstm_subsample:
        seq = [seq[i : i + factor] for i in range(0, len(seq), factor)]
    return len(seq)


class TestLayerOutLen:
    """Tests for layer_out_len."""

    def test_length_preserving_conv(self):
        """Test k3 s1 p1 keeps the length."""
        assert layer_out_len(100, 3, 1, 1) == 100

    def test_ceil_pooling(self):
        """Test k3 s2 p0 ceil pooling halves with rounding up."""
        assert layer_out_len(100, 3, 2, 0, PoolRounding.CEIL) == 50
        assert layer_out_len(50, 3, 2, 0, "ceil") == 25

    def test_floor_pooling(self):
        """Test floor pooling drops the incomplete last window."""
        assert layer_out_len(100, 3, 2, 0, PoolRounding.FLOOR) == 49

    def test_degenerate_inputs(self):
        """Test inputs shorter than the kernel give 0 windows."""
        assert layer_out_len(1, 3, 2, 0, PoolRounding.CEIL) == 0
        assert layer_out_len(0, 3, 1, 1) == 0
        assert layer_out_len(2, 3, 2, 0, PoolRounding.FLOOR) == 0

    def test_rejects_negative(self):
        """Test negative lengths raise ValueError."""
        with pytest.raises(ValueError):
            layer_out_len(-1, 3, 1, 1)


class TestEncoderOutputLength:
    """Tests for encoder_output_length."""

    @pytest.mark.parametrize(
        "frames,expected", [(100, 7), (200, 13), (400, 25), (98, 6), (196, 13), (391, 25), (0, 0)]
    )
    def test_vgg_pblstm(self, frames, expected):
        """Test the default encoder on the 1 s utterance frame counts."""
        assert encoder_output_length(frames, EncoderSpec.vgg_pblstm()) == expected

    def test_pblstm_only(self):
        """Test the pBLSTM-only encoder: 98 -> 49 -> 25 -> 25."""
        assert encoder_output_length(98, EncoderSpec.pblstm()) == 25

    @pytest.mark.parametrize(
        "spec",
        [
            EncoderSpec.vgg_pblstm(),
            EncoderSpec.vgg_pblstm(PoolRounding.FLOOR),
            EncoderSpec.pblstm(),
            EncoderSpec(layers=(LayerGeometry.pool(2, 2, 1),), pblstm_subsample=(3,)),
        ],
    )
    def test_matches_brute_force(self, spec):
        """Test closed-form lengths equal an explicit simulation for T in [0, 2000]."""
        for frames in range(2001):
            assert encoder_output_length(frames, spec) == _simulate(frames, spec), frames

    @given(a=st.integers(min_value=0, max_value=5000), b=st.integers(min_value=0, max_value=5000))
    @settings(max_examples=300, deadline=None)
    def test_monotone(self, a, b):
        """Test longer inputs never give fewer encoder frames."""
        lo, hi = sorted((a, b))
        spec = EncoderSpec.vgg_pblstm()
        assert encoder_output_length(lo, spec) <= encoder_output_length(hi, spec)

    @given(frames=st.integers(min_value=16, max_value=20000))
    @settings(max_examples=300, deadline=None)
    def test_doubling_frame_rate_doubles_output(self, frames):
        """Test out(2T) is within 2 of 2 * out(T)."""
        spec = EncoderSpec.vgg_pblstm()
        single = encoder_output_length(frames, spec)
        double = encoder_output_length(2 * frames, spec)
        assert 2 * single - 2 <= double <= 2 * single + 2


class TestTotalSubsampleFactor:
    """Tests for total_subsample_factor."""

    def test_presets(self):
        """Test 16 for VGG + pBLSTM and 4 for pBLSTM only."""
        assert total_subsample_factor(EncoderSpec.vgg_pblstm()) == 16
        assert total_subsample_factor(EncoderSpec.pblstm()) == 4

    def test_empty_spec(self):
        """Test an encoder without subsampling has factor 1."""
        assert total_subsample_factor(EncoderSpec(layers=(), pblstm_subsample=())) == 1


class TestFrameRateTable:
    """Tests for frame_rate_table."""

    def test_one_second(self):
        """Test nominal and extracted counts for 1 s at 100/200/400 fps."""
        rows = frame_rate_table([1.0], [100, 200, 400], EncoderSpec.vgg_pblstm(), FramingConfig())
        assert [r.input_frames for r in rows] == [100, 200, 400]
        assert [r.encoder_frames for r in rows] == [7, 13, 25]
        assert [r.extracted_frames for r in rows] == [98, 196, 391]
        assert [r.extracted_encoder_frames for r in rows] == [6, 13, 25]

    def test_zero_duration(self):
        """Test 0 s gives 0 everywhere."""
        rows = frame_rate_table([0.0], [100, 400], EncoderSpec.vgg_pblstm(), FramingConfig())
        for row in rows:
            assert (row.input_frames, row.encoder_frames, row.extracted_frames) == (0, 0, 0)
            assert row.extracted_encoder_frames == 0

    def test_rejects_negative_duration(self):
        """Test negative durations raise ValueError."""
        with pytest.raises(ValueError):
            frame_rate_table([-1.0], [100], EncoderSpec.pblstm(), FramingConfig())
