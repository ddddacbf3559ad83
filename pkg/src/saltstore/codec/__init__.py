"""Layered residual video codec."""

from .autoencoder import (AutoencoderWeights, ConvExtractor, default_extractor,
                          extract_features, loss_and_grad, prepare_clip,
                          reconstruct_clip, train_autoencoder)
from .frames import Frame, MotionVectorField, ResidualFrame
from .gop import (CodecParams, EncodedGop, FrameRecord, decode_gop, decode_sequence,
                  encode_gop, encode_sequence)
from .layers import LayeredBitstream, decode_layers, encode_layers, layer_steps
from .motion import apply_residual, estimate_motion, predict, residual

__all__ = [
    "AutoencoderWeights", "CodecParams", "ConvExtractor", "EncodedGop", "Frame",
    "FrameRecord", "LayeredBitstream", "MotionVectorField", "ResidualFrame",
    "apply_residual", "decode_gop", "decode_layers", "decode_sequence",
    "default_extractor", "encode_gop", "encode_layers", "encode_sequence",
    "estimate_motion", "extract_features", "layer_steps", "loss_and_grad",
    "predict", "prepare_clip", "reconstruct_clip", "residual", "train_autoencoder",
]
