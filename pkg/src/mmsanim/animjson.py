"""JSON animation dump: a machine-friendly export of skeleton + sampled poses.

Schema (``"format": "mms-anim/1"``)::

    {
      "format": "mms-anim/1",
      "fps": 30.0,
      "skeleton": {"bones": [{"name": str, "parent": int (-1 for root),
                              "offset": [x, y, z],
                              "rest_rotation": [x, y, z, w]}, ...]},
      "frames": [{"root_translation": [x, y, z],
                  "rotations": [[x, y, z, w], ...]}, ...]
    }
"""

from __future__ import annotations

import json

import numpy as np

from .anim import AnimationClip, Pose, Skeleton

FORMAT_TAG = "mms-anim/1"


def animation_to_dict(skeleton: Skeleton, clip: AnimationClip) -> dict:
    bones = [
        {
            "name": skeleton.names[i],
            "parent": skeleton.parents[i],
            "offset": [float(x) for x in skeleton.rest_offsets[i]],
            "rest_rotation": [float(x) for x in skeleton.rest_rotations[i]],
        }
        for i in range(skeleton.num_bones)
    ]
    frames = [
        {
            "root_translation": [float(x) for x in pose.root_translation],
            "rotations": [[float(x) for x in q] for q in pose.local_rotations],
        }
        for pose in clip.frames
    ]
    return {"format": FORMAT_TAG, "fps": clip.fps, "skeleton": {"bones": bones}, "frames": frames}


def save_animation_json(skeleton: Skeleton, clip: AnimationClip) -> bytes:
    return json.dumps(animation_to_dict(skeleton, clip)).encode("utf-8")


def load_animation_json(data) -> tuple[Skeleton, AnimationClip]:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    doc = json.loads(text)
    if doc.get("format") != FORMAT_TAG:
        raise ValueError(f"unsupported animation format tag {doc.get('format')!r}")
    bones = doc["skeleton"]["bones"]
    skeleton = Skeleton(
        tuple(b["name"] for b in bones),
        tuple(int(b["parent"]) for b in bones),
        np.array([b["offset"] for b in bones], dtype=float),
        np.array([b["rest_rotation"] for b in bones], dtype=float),
    )
    frames = tuple(
        Pose(np.array(f["root_translation"], dtype=float), np.array(f["rotations"], dtype=float))
        for f in doc["frames"]
    )
    return skeleton, AnimationClip(float(doc["fps"]), frames)
