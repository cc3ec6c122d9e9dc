# SPDX-License-Identifier: Apache-2.0
"""Symbolic scene encoding toolkit."""

from ._symscene import (
    ENCODING_DIM,
    BoundingBox,
    Detection,
    EmbeddingTable,
    FrameError,
    FrameStatus,
    Inversion,
    NormalizedBox,
    ParseError,
    PrivacyTier,
    SceneEncoding,
    Vocabulary,
    average_precision,
    decode_frame,
    decode_frames,
    encode_frame,
    encode_raw,
    encode_symbolic,
    invert_symbolic,
    iou,
    nms,
    send,
)

__all__ = [
    "ENCODING_DIM",
    "BoundingBox",
    "Detection",
    "EmbeddingTable",
    "FrameError",
    "FrameStatus",
    "Inversion",
    "NormalizedBox",
    "ParseError",
    "PrivacyTier",
    "SceneEncoding",
    "Vocabulary",
    "average_precision",
    "decode_frame",
    "decode_frames",
    "encode_frame",
    "encode_raw",
    "encode_symbolic",
    "invert_symbolic",
    "iou",
    "nms",
    "send",
]
