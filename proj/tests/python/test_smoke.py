# SPDX-License-Identifier: Apache-2.0
import socket
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

import symscene as ss

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def toy():
    names = ["dog", "cat", "car", "tree", "sky", "red", "furry", "tall"]
    rng = np.random.default_rng(3)
    table = ss.EmbeddingTable.from_entries([(n, list(rng.standard_normal(16))) for n in names])
    vocab = ss.Vocabulary(names[:5], names[5:])
    return table, vocab


def test_geometry():
    a = ss.BoundingBox(0, 0, 10, 10)
    b = ss.BoundingBox(5, 0, 15, 10)
    assert ss.iou(a, b) == pytest.approx(50 / 150)
    assert ss.nms([a, b, ss.BoundingBox(0, 0, 10, 9)], [0.5, 0.9, 0.8], 0.5) == [1, 2]
    with pytest.raises(ValueError):
        ss.iou(ss.BoundingBox(2, 0, 1, 1), a)


def test_symbolic_layout_and_inversion():
    table, vocab = toy()
    det = ss.Detection(ss.BoundingBox(10, 20, 50, 80), [0.1, 0.9, 0.3, 0.2, 0.05], [0.2, 0.7, 0.1])
    vec = ss.encode_symbolic(det, ss.BoundingBox(0, 0, 100, 100), 200, 100, vocab, table, k=3)
    assert vec.shape == (ss.ENCODING_DIM,)
    assert np.all(vec[3 * 16 + 16 + 8:] == 0)
    np.testing.assert_array_equal(vec[:16], table.get("cat"))
    inv = ss.invert_symbolic(list(vec), vocab, table, k=3)
    assert inv.class_names == ["cat", "car", "tree"]
    assert inv.attribute_ranking[0][0] == 1
    assert inv.global_box.as_tuple() == pytest.approx((0.05, 0.2, 0.25, 0.8))


def test_raw_layout():
    det = ss.Detection(ss.BoundingBox(0, 0, 10, 10), [0.5, 0.25], [1.0])
    vec = ss.encode_raw(det, ss.BoundingBox(0, 0, 10, 10), 20, 20)
    assert list(vec[:3]) == [0.5, 0.25, 1.0]
    assert list(vec[3:11]) == [0, 0, 0.5, 0.5, 0, 0, 1, 1]
    assert not vec[11:].any()


def test_frame_round_trip_and_errors():
    rows = np.arange(2 * ss.ENCODING_DIM, dtype=np.float64).reshape(2, -1)
    enc = ss.SceneEncoding("park", ss.PrivacyTier.PRIVATE, rows, ["a dog"])
    data = ss.encode_frame(enc)
    back = ss.decode_frame(data)
    assert back.scene_id == "park" and back.tier == ss.PrivacyTier.PRIVATE
    assert back.captions == ["a dog"]
    np.testing.assert_array_equal(back.rows, rows)
    assert len(ss.decode_frames(data + data)) == 2
    with pytest.raises(ss.FrameError):
        ss.decode_frame(b"XYMV" + data[4:])
    empty = ss.SceneEncoding("a", ss.PrivacyTier.PRIVATE, np.zeros((0, ss.ENCODING_DIM)))
    assert len(ss.encode_frame(empty)) == 21


def test_average_precision():
    g = ss.BoundingBox(0, 0, 10, 10)
    fp = ss.BoundingBox(50, 50, 60, 60)
    assert ss.average_precision([([(g, 0.9)], [g])]) == 1.0
    assert ss.average_precision([([(fp, 0.9), (g, 0.8)], [g])]) == pytest.approx(0.5)


def test_fixture_files_load():
    vocab = ss.Vocabulary.load(FIXTURES / "classes.txt", FIXTURES / "attributes.txt")
    table = ss.EmbeddingTable.load(FIXTURES / "embeddings.txt")
    assert "traffic light" in vocab.class_names
    assert table.dim == 300
    frames = ss.decode_frames((FIXTURES / "golden_symbolic.symv").read_bytes())
    assert [f.scene_id for f in frames] == ["park", "street", "kitchen"]
    inv = ss.invert_symbolic(list(frames[1].rows[1]), vocab, table)
    assert inv.class_names[0] == "traffic light"


def test_send_without_server_raises():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    enc = ss.SceneEncoding("a", ss.PrivacyTier.PRIVATE, np.zeros((0, ss.ENCODING_DIM)))
    with pytest.raises(RuntimeError, match="frame 0"):
        ss.send(f"127.0.0.1:{port}", [enc])
