"""Skeletons, poses, clips, and the kinematic operations on them.

Conventions: right-handed coordinates, Y up, lengths in the skeleton's native
unit (meters for the bundled demo avatar). Rotations are quaternions
everywhere; Euler angles only appear at I/O boundaries. Only the root bone
carries a per-frame translation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quat


def _as_vec3(v) -> np.ndarray:
    return np.asarray(v, dtype=float).reshape(3)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """Rigid motion: rotate by ``rotation``, then translate by ``translation``."""

    translation: np.ndarray
    rotation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "translation", _as_vec3(self.translation))
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float).reshape(4))
        if not quat.is_unit(self.rotation):
            raise ValueError("rotation quaternion is not unit-norm")

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform(np.zeros(3), quat.identity())

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """Return ``self`` applied after ``other`` (``self ∘ other``)."""
        return RigidTransform(
            self.translation + quat.apply(self.rotation, other.translation),
            quat.normalize(quat.mul(self.rotation, other.rotation)),
        )

    def inverse(self) -> "RigidTransform":
        r = quat.conjugate(self.rotation)
        return RigidTransform(-quat.apply(r, self.translation), r)

    def apply_point(self, p) -> np.ndarray:
        return self.translation + quat.apply(self.rotation, p)


@dataclass(frozen=True, eq=False)
class Skeleton:
    """Named bone hierarchy in topological order (each parent precedes its children).

    ``rest_offsets[i]`` is bone i's offset in its parent's frame;
    ``rest_rotations[i]`` its rest orientation relative to the parent.
    """

    names: tuple[str, ...]
    parents: tuple[int, ...]
    rest_offsets: np.ndarray
    rest_rotations: np.ndarray

    def __post_init__(self):
        names = tuple(self.names)
        parents = tuple(int(p) for p in self.parents)
        offsets = np.asarray(self.rest_offsets, dtype=float).reshape(len(names), 3)
        rots = np.asarray(self.rest_rotations, dtype=float).reshape(len(names), 4)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "rest_offsets", offsets)
        object.__setattr__(self, "rest_rotations", rots)
        if not names:
            raise ValueError("skeleton needs at least one bone")
        if len(set(names)) != len(names):
            raise ValueError("bone names must be unique")
        if parents[0] != -1 or any(p == -1 for p in parents[1:]):
            raise ValueError("exactly one root bone (index 0) is required")
        for i, p in enumerate(parents[1:], start=1):
            if not 0 <= p < i:
                raise ValueError(f"parent of bone {names[i]!r} must precede it")
        for i in range(len(names)):
            if not quat.is_unit(rots[i]):
                raise ValueError(f"rest rotation of bone {names[i]!r} is not unit-norm")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

    @classmethod
    def from_bones(cls, bones) -> "Skeleton":
        """Build from an iterable of ``(name, parent_index_or_None, offset[, rest_rotation])``."""
        names, parents, offsets, rots = [], [], [], []
        for bone in bones:
            name, parent, offset = bone[0], bone[1], bone[2]
            names.append(name)
            parents.append(-1 if parent is None else int(parent))
            offsets.append(_as_vec3(offset))
            rots.append(np.asarray(bone[3], dtype=float) if len(bone) > 3 else quat.identity())
        return cls(tuple(names), tuple(parents), np.array(offsets), np.array(rots))

    @property
    def num_bones(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown bone {name!r}") from None

    def children(self) -> tuple[tuple[int, ...], ...]:
        kids: list[list[int]] = [[] for _ in self.names]
        for i, p in enumerate(self.parents):
            if p >= 0:
                kids[p].append(i)
        return tuple(tuple(k) for k in kids)


@dataclass(frozen=True, eq=False)
class Pose:
    """Per-frame root translation plus one bone-local rotation per bone."""

    root_translation: np.ndarray
    local_rotations: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "root_translation", _as_vec3(self.root_translation))
        rots = np.asarray(self.local_rotations, dtype=float)
        if rots.ndim != 2 or rots.shape[1] != 4:
            raise ValueError("local_rotations must have shape (num_bones, 4)")
        object.__setattr__(self, "local_rotations", rots)

    @property
    def num_bones(self) -> int:
        return self.local_rotations.shape[0]


def identity_pose(skeleton: Skeleton) -> Pose:
    rots = np.tile(quat.identity(), (skeleton.num_bones, 1))
    return Pose(np.zeros(3), rots)


@dataclass(frozen=True, eq=False)
class AnimationClip:
    """Uniformly sampled pose sequence; nominal duration is ``(frames - 1) / fps``."""

    fps: float
    frames: tuple[Pose, ...]

    def __post_init__(self):
        object.__setattr__(self, "fps", float(self.fps))
        object.__setattr__(self, "frames", tuple(self.frames))
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        if not self.frames:
            raise ValueError("clip needs at least one frame")
        n = self.frames[0].num_bones
        if any(f.num_bones != n for f in self.frames):
            raise ValueError("all frames must have the same bone count")

    @property
    def num_frames(self) -> int:
        return len(self.frames)

    @property
    def nominal_duration(self) -> float:
        return (self.num_frames - 1) / self.fps


def fk_all(skeleton: Skeleton, pose: Pose) -> tuple[np.ndarray, np.ndarray]:
    """World positions (J, 3) and world rotations (J, 4) of every bone."""
    if pose.num_bones != skeleton.num_bones:
        raise ValueError("pose bone count does not match skeleton")
    n = skeleton.num_bones
    pos = np.empty((n, 3))
    rot = np.empty((n, 4))
    offsets = skeleton.rest_offsets
    rests = skeleton.rest_rotations
    locals_ = pose.local_rotations
    pos[0] = offsets[0] + pose.root_translation
    rot[0] = quat.mul(rests[0], locals_[0])
    for i in range(1, n):
        p = skeleton.parents[i]
        rot[i] = quat.mul(rot[p], quat.mul(rests[i], locals_[i]))
        pos[i] = pos[p] + quat.apply(rot[p], offsets[i])
    return pos, rot


def fk_global(skeleton: Skeleton, pose: Pose, bone: str) -> RigidTransform:
    """World transform of ``bone``: ancestor locals composed root-down."""
    i = skeleton.index(bone)
    pos, rot = fk_all(skeleton, pose)
    return RigidTransform(pos[i], quat.normalize(rot[i]))


def relative_transform(skeleton: Skeleton, pose: Pose, bone: str, root_bone: str) -> RigidTransform:
    """Transform of ``bone`` expressed in ``root_bone``'s frame."""
    i = skeleton.index(bone)
    r = skeleton.index(root_bone)
    pos, rot = fk_all(skeleton, pose)
    root = RigidTransform(pos[r], quat.normalize(rot[r]))
    return root.inverse().compose(RigidTransform(pos[i], quat.normalize(rot[i])))


def blend_poses(a: Pose, b: Pose, weight: float) -> Pose:
    """Interpolate two poses: linear root translation, shortest-arc slerp per bone."""
    if a.num_bones != b.num_bones:
        raise ValueError("poses have different bone counts")
    rots = np.empty_like(a.local_rotations)
    for j in range(a.num_bones):
        rots[j] = quat.slerp(a.local_rotations[j], b.local_rotations[j], weight)
    root = a.root_translation + weight * (b.root_translation - a.root_translation)
    return Pose(root, rots)


def sample_clip(clip: AnimationClip, t: float) -> Pose:
    """Pose at time ``t`` seconds; exact stored frames at sample instants."""
    if t < -1e-9 or t > clip.nominal_duration + 1e-9:
        raise ValueError(f"sample time {t} outside [0, {clip.nominal_duration}]")
    x = t * clip.fps
    nearest = _round_half_up(x)
    if abs(x - nearest) < 1e-9 and 0 <= nearest < clip.num_frames:
        return clip.frames[nearest]
    i0 = min(max(int(math.floor(x)), 0), clip.num_frames - 2)
    return blend_poses(clip.frames[i0], clip.frames[i0 + 1], x - i0)


def retime_clip(clip: AnimationClip, target_duration: float, target_fps: float) -> AnimationClip:
    """Resample to ``target_duration`` seconds at ``target_fps``.

    Output frame i samples the source at ``i / (n - 1) * nominal_duration``, so
    the first and last poses are preserved exactly and time mapping is monotone.
    """
    if target_duration <= 0:
        raise ValueError("target duration must be positive")
    if target_fps <= 0:
        raise ValueError("target fps must be positive")
    n_out = max(_round_half_up(target_duration * target_fps) + 1, 2)
    src = clip.nominal_duration
    frames = tuple(sample_clip(clip, (i / (n_out - 1)) * src) for i in range(n_out))
    return AnimationClip(float(target_fps), frames)
