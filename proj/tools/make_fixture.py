#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Regenerates the small bundled fixture under tests/fixtures/.

The fixture uses a 24-class / 16-attribute vocabulary with 300-d pseudo-random
word vectors so the default symbolic layout (5 x 300 + 300 + 8) applies.
"""
import json
import random
from pathlib import Path

CLASSES = [
    "dog", "cat", "car", "tree", "sky", "man", "woman", "building",
    "grass", "table", "chair", "window", "person", "road", "water", "cloud",
    "shirt", "sign", "plate", "bus", "horse", "boat", "traffic light", "wall",
]
ATTRIBUTES = [
    "white", "black", "blue", "green", "red", "brown", "yellow", "small",
    "large", "wooden", "tall", "metal", "open", "parked", "cloudy", "young",
]
DIM = 300


def ranked_scores(n, ranked, scores, floor=0.0):
    """Dense score vector with ranked[i] scoring scores[i]."""
    out = [floor] * n
    for name_idx, s in zip(ranked, scores):
        out[name_idx] = s
    return out


def sparse(vec):
    return [[i, round(v, 4)] for i, v in enumerate(vec) if v > 0]


def cls(*names):
    return [CLASSES.index(n) for n in names]


def attr(*names):
    return [ATTRIBUTES.index(n) for n in names]


def detection(box, classes, class_scores, attrs, attr_scores):
    return {
        "box": box,
        "class_scores_sparse": sparse(ranked_scores(len(CLASSES), classes, class_scores)),
        "attribute_scores_sparse": sparse(ranked_scores(len(ATTRIBUTES), attrs, attr_scores)),
    }


def main():
    out = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20211)

    tokens = sorted({t for name in CLASSES + ATTRIBUTES for t in name.split()})
    with open(out / "embeddings.txt", "w") as f:
        for tok in tokens:
            vec = " ".join(f"{rng.gauss(0.0, 0.4):.5f}" for _ in range(DIM))
            f.write(f"{tok} {vec}\n")
    (out / "classes.txt").write_text("\n".join(CLASSES) + "\n")
    (out / "attributes.txt").write_text("\n".join(ATTRIBUTES) + "\n")
    (out / "fixture.conf").write_text(
        "# bundled fixture vocabulary sizes\n"
        f"num_classes={len(CLASSES)}\nnum_attributes={len(ATTRIBUTES)}\n"
        "embedding_dim=300\ntop_k=5\nscore_threshold=0.2\niou_threshold=0.5\n")

    # Per selected object: top-5 classes in the intended order.
    scenes = [
        {
            "image_id": "park",
            "image_w": 640, "image_h": 480,
            "detections": [
                detection([40, 200, 260, 440], cls("dog", "cat", "horse", "man", "grass"),
                          [0.81, 0.09, 0.05, 0.03, 0.02], attr("brown", "small", "young", "white", "black"),
                          [0.7, 0.55, 0.3, 0.1, 0.05]),
                # near duplicate of the dog box, suppressed by NMS
                detection([45, 205, 262, 445], cls("cat", "dog", "horse", "man", "grass"),
                          [0.6, 0.3, 0.05, 0.03, 0.02], attr("black", "small", "brown", "young", "white"),
                          [0.6, 0.4, 0.2, 0.1, 0.05]),
                detection([0, 0, 640, 150], cls("sky", "cloud", "water", "building", "tree"),
                          [0.92, 0.6, 0.2, 0.1, 0.05], attr("blue", "cloudy", "white", "large", "open"),
                          [0.9, 0.4, 0.3, 0.2, 0.1]),
                detection([300, 60, 520, 400], cls("tree", "grass", "building", "wall", "sky"),
                          [0.66, 0.3, 0.2, 0.1, 0.05], attr("green", "tall", "large", "brown", "young"),
                          [0.8, 0.5, 0.3, 0.2, 0.1]),
                # below the score threshold
                detection([500, 300, 560, 360], cls("plate", "table", "sign", "chair", "window"),
                          [0.15, 0.1, 0.08, 0.05, 0.01], attr("white", "small", "metal", "red", "open"),
                          [0.3, 0.2, 0.1, 0.05, 0.01]),
            ],
            "captions": ["a brown dog sitting on the grass under a tree"],
        },
        {
            "image_id": "street",
            "image_w": 800, "image_h": 600,
            "detections": [
                detection([100, 300, 420, 520], cls("car", "bus", "boat", "road", "sign"),
                          [0.88, 0.2, 0.05, 0.04, 0.02], attr("red", "parked", "metal", "large", "small"),
                          [0.85, 0.6, 0.35, 0.2, 0.1]),
                detection([600, 40, 650, 160], cls("traffic light", "sign", "window", "building", "wall"),
                          [0.74, 0.4, 0.1, 0.05, 0.03], attr("yellow", "metal", "tall", "open", "black"),
                          [0.5, 0.45, 0.4, 0.2, 0.1]),
                detection([450, 250, 540, 560], cls("woman", "person", "man", "shirt", "sign"),
                          [0.7, 0.5, 0.3, 0.1, 0.05], attr("young", "tall", "white", "blue", "black"),
                          [0.65, 0.3, 0.2, 0.15, 0.1]),
            ],
        },
        {
            "image_id": "kitchen",
            "image_w": 512, "image_h": 512,
            "detections": [
                detection([60, 260, 460, 500], cls("table", "chair", "plate", "wall", "window"),
                          [0.77, 0.3, 0.2, 0.1, 0.05], attr("wooden", "brown", "large", "white", "small"),
                          [0.9, 0.7, 0.3, 0.2, 0.1]),
                detection([200, 220, 300, 280], cls("plate", "table", "sign", "window", "cat"),
                          [0.58, 0.25, 0.1, 0.05, 0.02], attr("white", "small", "metal", "open", "blue"),
                          [0.75, 0.5, 0.1, 0.05, 0.02]),
            ],
            "captions": ["a wooden table with a white plate", "kitchen table"],
        },
    ]
    with open(out / "scenes.jsonl", "w") as f:
        for s in scenes:
            f.write(json.dumps(s) + "\n")

    # Expected top-5 class names per transmitted object, in transmission order
    # (confidence descending after threshold + NMS).
    expected = {
        "park": [["sky", "cloud", "water", "building", "tree"],
                 ["dog", "cat", "horse", "man", "grass"],
                 ["tree", "grass", "building", "wall", "sky"]],
        "street": [["car", "bus", "boat", "road", "sign"],
                   ["traffic light", "sign", "window", "building", "wall"],
                   ["woman", "person", "man", "shirt", "sign"]],
        "kitchen": [["table", "chair", "plate", "wall", "window"],
                    ["plate", "table", "sign", "window", "cat"]],
    }
    (out / "expected_top5.json").write_text(json.dumps(expected, indent=1) + "\n")

    # Ground truth that the selected predictions match exactly.
    gt = [
        {"image_id": "park", "objects": [
            {"box": [40, 200, 260, 440], "class_index": CLASSES.index("dog"), "attribute_indices": attr("brown", "small")},
            {"box": [0, 0, 640, 150], "class_index": CLASSES.index("sky"), "attribute_indices": attr("blue")},
            {"box": [300, 60, 520, 400], "class_index": CLASSES.index("tree"), "attribute_indices": attr("green", "tall")},
        ]},
        {"image_id": "street", "objects": [
            {"box": [100, 300, 420, 520], "class_index": CLASSES.index("car"), "attribute_indices": attr("red", "parked")},
            {"box": [600, 40, 650, 160], "class_index": CLASSES.index("traffic light"), "attribute_indices": attr("yellow")},
            {"box": [450, 250, 540, 560], "class_index": CLASSES.index("woman"), "attribute_indices": attr("young")},
        ]},
        {"image_id": "kitchen", "objects": [
            {"box": [60, 260, 460, 500], "class_index": CLASSES.index("table"), "attribute_indices": attr("wooden", "brown")},
            {"box": [200, 220, 300, 280], "class_index": CLASSES.index("plate"), "attribute_indices": attr("white", "small")},
        ]},
    ]
    with open(out / "ground_truth.jsonl", "w") as f:
        for g in gt:
            f.write(json.dumps(g) + "\n")


if __name__ == "__main__":
    main()
