"""BVH motion-capture file reader and writer.

The reader accepts any rotation channel order and optional position channels.
Root position channels add on top of the root OFFSET; constant non-root
position channels are folded into the rest offsets, animated ones are
rejected. The writer emits a canonical layout: the root gets six channels
(translation plus ZXY rotation), every other joint gets ZXY rotation, numbers
are printed with six decimals.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.transform import Rotation as _ScipyRotation

from . import quat
from .anim import AnimationClip, Pose, Skeleton

_POSITION_CHANNELS = {"Xposition": 0, "Yposition": 1, "Zposition": 2}
_ROTATION_CHANNELS = {"Xrotation": "x", "Yrotation": "y", "Zrotation": "z"}


class BvhError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class _Lines:
    def __init__(self, text: str):
        self.items = [
            (no, stripped)
            for no, raw in enumerate(text.splitlines(), start=1)
            if (stripped := raw.strip())
        ]
        self.pos = 0

    def peek(self) -> tuple[int, str] | None:
        return self.items[self.pos] if self.pos < len(self.items) else None

    def next(self, expect: str | None = None) -> tuple[int, str]:
        if self.pos >= len(self.items):
            raise BvhError(f"unexpected end of file (expected {expect or 'more input'})")
        no, line = self.items[self.pos]
        self.pos += 1
        if expect is not None and not line.startswith(expect):
            raise BvhError(f"expected {expect!r}, got {line!r}", no)
        return no, line


def _parse_offset(lines: _Lines) -> np.ndarray:
    no, line = lines.next("OFFSET")
    parts = line.split()
    if len(parts) != 4:
        raise BvhError("OFFSET needs three values", no)
    try:
        return np.array([float(p) for p in parts[1:]])
    except ValueError:
        raise BvhError("malformed OFFSET value", no) from None


def _parse_channels(lines: _Lines) -> list[str]:
    no, line = lines.next("CHANNELS")
    parts = line.split()
    try:
        count = int(parts[1])
    except (IndexError, ValueError):
        raise BvhError("malformed CHANNELS line", no) from None
    names = parts[2:]
    if len(names) != count:
        raise BvhError("CHANNELS count does not match channel names", no)
    for name in names:
        if name not in _POSITION_CHANNELS and name not in _ROTATION_CHANNELS:
            raise BvhError(f"unknown channel {name!r}", no)
    rotations = [n for n in names if n in _ROTATION_CHANNELS]
    if len(rotations) not in (0, 3):
        raise BvhError("expected zero or three rotation channels", no)
    return names


def _parse_joint(lines: _Lines, parent: int, bones: list, keyword: str) -> None:
    no, line = lines.next(keyword)
    name = "_".join(line.split()[1:])
    if not name:
        raise BvhError(f"{keyword} requires a name", no)
    lines.next("{")
    offset = _parse_offset(lines)
    channels = _parse_channels(lines)
    index = len(bones)
    bones.append({"name": name, "parent": parent, "offset": offset, "channels": channels})
    while True:
        peeked = lines.peek()
        if peeked is None:
            raise BvhError("unexpected end of file in joint block")
        _, text = peeked
        if text.startswith("JOINT"):
            _parse_joint(lines, index, bones, "JOINT")
        elif text.startswith("End Site"):
            lines.next("End Site")
            lines.next("{")
            _parse_offset(lines)
            lines.next("}")
        elif text.startswith("}"):
            lines.next("}")
            return
        else:
            raise BvhError(f"unexpected line {text!r}", peeked[0])


def load_bvh(data) -> tuple[Skeleton, AnimationClip]:
    """Parse BVH bytes or text into a skeleton and clip (fps = 1 / frame time)."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = _Lines(text)
    lines.next("HIERARCHY")
    bones: list[dict] = []
    _parse_joint(lines, -1, bones, "ROOT")
    peeked = lines.peek()
    if peeked is not None and peeked[1].startswith("ROOT"):
        raise BvhError("multiple ROOT joints are not supported", peeked[0])
    lines.next("MOTION")

    no, line = lines.next("Frames:")
    try:
        frame_count = int(line.split(":", 1)[1])
    except (IndexError, ValueError):
        raise BvhError("malformed Frames line", no) from None
    if frame_count <= 0:
        raise BvhError("zero frames", no)
    no, line = lines.next("Frame Time:")
    try:
        frame_time = float(line.split(":", 1)[1])
    except (IndexError, ValueError):
        raise BvhError("malformed Frame Time line", no) from None
    if frame_time <= 0:
        raise BvhError("frame time must be positive", no)

    names = [b["name"] for b in bones]
    if len(set(names)) != len(names):
        raise BvhError("duplicate joint names")
    total_channels = sum(len(b["channels"]) for b in bones)
    values = np.zeros((frame_count, total_channels))
    for f in range(frame_count):
        no, line = lines.next()
        parts = line.split()
        if len(parts) != total_channels:
            raise BvhError(
                f"expected {total_channels} values in frame, got {len(parts)}", no
            )
        try:
            values[f] = [float(p) for p in parts]
        except ValueError:
            raise BvhError("malformed number in frame data", no) from None
    if lines.peek() is not None:
        raise BvhError("trailing content after the declared frame count", lines.peek()[0])

    offsets = np.array([b["offset"] for b in bones])
    rotations = np.empty((frame_count, len(bones), 4))
    root_translations = np.zeros((frame_count, 3))
    cursor = 0
    for j, bone in enumerate(bones):
        channels = bone["channels"]
        block = values[:, cursor : cursor + len(channels)]
        cursor += len(channels)
        positions = np.zeros((frame_count, 3))
        has_position = False
        rot_order = ""
        rot_cols: list[int] = []
        for c, channel in enumerate(channels):
            if channel in _POSITION_CHANNELS:
                positions[:, _POSITION_CHANNELS[channel]] = block[:, c]
                has_position = True
            else:
                rot_order += _ROTATION_CHANNELS[channel]
                rot_cols.append(c)
        if has_position:
            if j == 0:
                root_translations = positions
            elif np.max(np.abs(positions - positions[0])) > 1e-9:
                raise BvhError(f"animated translation on non-root joint {bone['name']!r}")
            else:
                offsets[j] = offsets[j] + positions[0]
        if rot_order:
            for f in range(frame_count):
                rotations[f, j] = quat.from_euler_channels(rot_order, block[f, rot_cols])
        else:
            rotations[:, j] = quat.identity()

    skeleton = Skeleton(
        tuple(names),
        tuple(b["parent"] for b in bones),
        offsets,
        np.tile(quat.identity(), (len(bones), 1)),
    )
    frames = tuple(
        Pose(root_translations[f], rotations[f]) for f in range(frame_count)
    )
    # Frame times carry six decimals, so integer rates arrive as e.g.
    # 30.00003; snap them back to keep nominal durations exact.
    fps = 1.0 / frame_time
    if abs(fps - round(fps)) < 1e-3:
        fps = float(round(fps))
    return skeleton, AnimationClip(fps, frames)


def _write_joint(out: list[str], skeleton: Skeleton, children, index: int, depth: int, order: list[int]):
    label = "ROOT" if index == 0 else "JOINT"
    indent = "\t" * depth
    order.append(index)
    off = skeleton.rest_offsets[index]
    out.append(f"{indent}{label} {skeleton.names[index]}")
    out.append(indent + "{")
    out.append(f"{indent}\tOFFSET {off[0]:.6f} {off[1]:.6f} {off[2]:.6f}")
    if index == 0:
        out.append(
            f"{indent}\tCHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation"
        )
    else:
        out.append(f"{indent}\tCHANNELS 3 Zrotation Xrotation Yrotation")
    if children[index]:
        for child in children[index]:
            _write_joint(out, skeleton, children, child, depth + 1, order)
    else:
        out.append(f"{indent}\tEnd Site")
        out.append(f"{indent}\t{{")
        out.append(f"{indent}\t\tOFFSET 0.000000 0.000000 0.000000")
        out.append(f"{indent}\t}}")
    out.append(indent + "}")


def save_bvh(skeleton: Skeleton, clip: AnimationClip) -> bytes:
    """Serialize a clip to canonical BVH."""
    out: list[str] = ["HIERARCHY"]
    order: list[int] = []
    _write_joint(out, skeleton, skeleton.children(), 0, 0, order)
    out.append("MOTION")
    out.append(f"Frames: {clip.num_frames}")
    out.append(f"Frame Time: {1.0 / clip.fps:.6f}")

    # Total local rotation (rest ∘ pose) per bone, extracted as intrinsic ZXY.
    totals = np.empty((clip.num_frames, skeleton.num_bones, 4))
    for f, pose in enumerate(clip.frames):
        for j in range(skeleton.num_bones):
            totals[f, j] = quat.mul(skeleton.rest_rotations[j], pose.local_rotations[j])
    eulers = _ScipyRotation.from_quat(totals.reshape(-1, 4)).as_euler("ZXY", degrees=True)
    eulers = eulers.reshape(clip.num_frames, skeleton.num_bones, 3)

    for f, pose in enumerate(clip.frames):
        t = pose.root_translation
        numbers = [t[0], t[1], t[2]]
        for j in order:
            numbers.extend(eulers[f, j])
        out.append(" ".join(f"{x:.6f}" for x in numbers))
    return ("\n".join(out) + "\n").encode("utf-8")
