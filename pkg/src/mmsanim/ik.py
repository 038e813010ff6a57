"""Controller baking and inverse kinematics.

A controller track records, per frame, the rigid transform of a controlled
bone expressed in a reference bone's frame. Motion editing happens on tracks;
``bake_back`` converts an edited track back into joint rotations with a damped
cyclic-coordinate-descent solve per frame, warm-started from that frame's
original pose so frames stay reproducible in isolation. The solver is
deterministic: fixed iteration order, no randomness, no joint limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quat
from .anim import AnimationClip, Pose, RigidTransform, Skeleton, fk_all, fk_global, relative_transform


@dataclass(frozen=True)
class IkChain:
    """Ancestor chain from chain root (exclusive) to end effector (inclusive).

    The position phase rotates every chain bone except the end effector; the
    end effector's own rotation is set by the orientation alignment step.
    """

    bones: tuple[str, ...]
    position_weight: float = 1.0
    orientation_weight: float = 1.0
    tolerance: float = 1e-3
    max_iterations: int = 64
    damping: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "bones", tuple(self.bones))
        if not self.bones:
            raise ValueError("chain needs at least one bone")
        if not 0.0 <= self.position_weight <= 1.0 or not 0.0 <= self.orientation_weight <= 1.0:
            raise ValueError("weights must lie in [0, 1]")
        if self.tolerance <= 0 or self.max_iterations <= 0:
            raise ValueError("tolerance and max_iterations must be positive")

    @property
    def end_effector(self) -> str:
        return self.bones[-1]


@dataclass(frozen=True, eq=False)
class ControllerTrack:
    """Per-frame rigid transform of ``controlled_bone`` in ``root_bone``'s frame."""

    controlled_bone: str
    root_bone: str
    samples: tuple[RigidTransform, ...]

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        if not self.samples:
            raise ValueError("controller track needs at least one sample")

    @property
    def num_samples(self) -> int:
        return len(self.samples)


def check_chain(skeleton: Skeleton, chain: IkChain) -> list[int]:
    """Resolve chain bones to indices, verifying parent-to-child connectivity."""
    idx = [skeleton.index(b) for b in chain.bones]
    for k in range(1, len(idx)):
        if skeleton.parents[idx[k]] != idx[k - 1]:
            raise ValueError(
                f"chain bone {chain.bones[k]!r} is not a child of {chain.bones[k - 1]!r}"
            )
    return idx


def bake_controller(
    skeleton: Skeleton, clip: AnimationClip, controlled_bone: str, root_bone: str
) -> ControllerTrack:
    """Record the controlled bone's trajectory relative to the root bone."""
    skeleton.index(controlled_bone)
    skeleton.index(root_bone)
    samples = tuple(
        relative_transform(skeleton, frame, controlled_bone, root_bone) for frame in clip.frames
    )
    return ControllerTrack(controlled_bone, root_bone, samples)


def solve_frame(
    skeleton: Skeleton, pose: Pose, chain: IkChain, target: RigidTransform
) -> tuple[Pose, float]:
    """Solve one frame toward a world-space target; returns (pose, position residual).

    The input pose is the warm start. Unreachable targets converge to the
    closest attainable point, reflected in the returned residual. Bones outside
    the chain and the root translation are never modified.
    """
    idx = check_chain(skeleton, chain)
    parents = skeleton.parents
    offsets = skeleton.rest_offsets
    rests = skeleton.rest_rotations
    rotations = pose.local_rotations.copy()
    pos, rot = fk_all(skeleton, pose)
    end = idx[-1]
    target_pos = target.translation

    def refresh(from_k: int) -> None:
        for m in range(from_k, len(idx)):
            j = idx[m]
            p = parents[j]
            if p < 0:
                rot[j] = quat.mul(rests[j], rotations[j])
                pos[j] = offsets[j] + pose.root_translation
            else:
                rot[j] = quat.mul(rot[p], quat.mul(rests[j], rotations[j]))
                pos[j] = pos[p] + quat.apply(rot[p], offsets[j])

    def apply_world_correction(k: int, correction) -> None:
        j = idx[k]
        parent_rot = rot[parents[j]] if parents[j] >= 0 else quat.identity()
        rotations[j] = quat.normalize(
            quat.mul(
                quat.conjugate(quat.mul(parent_rot, rests[j])),
                quat.mul(correction, rot[j]),
            )
        )
        refresh(k)

    if chain.position_weight > 0.0 and len(idx) > 1:
        base = pos[idx[0]]
        reach = sum(float(np.linalg.norm(offsets[j])) for j in idx[1:])
        to_target = target_pos - base
        if float(np.linalg.norm(to_target)) >= reach * (1.0 - 1e-12):
            # At or beyond full reach CCD stalls against the straight-chain
            # singularity; the closest solution is known: every link aligned
            # from the chain base toward the target.
            direction = to_target / float(np.linalg.norm(to_target))
            for k in range(len(idx) - 1):
                child_offset = offsets[idx[k + 1]]
                if float(np.linalg.norm(child_offset)) < 1e-12:
                    continue
                link = quat.apply(rot[idx[k]], child_offset)
                correction = quat.rotation_between(link, direction)
                correction = quat.slerp(quat.identity(), correction, chain.position_weight)
                apply_world_correction(k, correction)
        else:
            for sweep in range(chain.max_iterations):
                if float(np.linalg.norm(pos[end] - target_pos)) <= chain.tolerance:
                    break
                # Damping relaxes toward full steps: the first sweep applies
                # the configured fraction (keeps warm-started solves smooth),
                # later sweeps take larger steps so near-extension targets
                # still converge within the iteration budget.
                step = (1.0 - (1.0 - chain.damping) ** (sweep + 1)) * chain.position_weight
                for k in range(len(idx) - 2, -1, -1):
                    j = idx[k]
                    correction = quat.rotation_between(pos[end] - pos[j], target_pos - pos[j])
                    apply_world_correction(k, quat.slerp(quat.identity(), correction, step))
    residual = float(np.linalg.norm(pos[end] - target_pos)) if chain.position_weight > 0.0 else 0.0

    if chain.orientation_weight > 0.0:
        p = parents[end]
        parent_rot = rot[p] if p >= 0 else quat.identity()
        frame_rot = quat.mul(parent_rot, rests[end])
        if chain.orientation_weight >= 1.0:
            desired = target.rotation
        else:
            desired = quat.slerp(quat.normalize(rot[end]), target.rotation, chain.orientation_weight)
        rotations[end] = quat.normalize(quat.mul(quat.conjugate(frame_rot), desired))

    return Pose(pose.root_translation.copy(), rotations), residual


def bake_back(
    skeleton: Skeleton, clip: AnimationClip, track: ControllerTrack, chain: IkChain
) -> tuple[AnimationClip, float]:
    """Re-solve every frame so the chain follows the track; returns (clip, max residual).

    World targets are rebuilt from the clip's current (possibly already edited)
    root-bone transform composed with the stored sample, so tracks expressed in
    a moved reference frame ride along with it.
    """
    if track.num_samples != clip.num_frames:
        raise ValueError(
            f"track has {track.num_samples} samples for {clip.num_frames} frames"
        )
    if chain.end_effector != track.controlled_bone:
        raise ValueError(
            f"chain ends at {chain.end_effector!r} but track controls {track.controlled_bone!r}"
        )
    check_chain(skeleton, chain)
    skeleton.index(track.root_bone)
    frames = []
    worst = 0.0
    for frame, sample in zip(clip.frames, track.samples):
        root_world = fk_global(skeleton, frame, track.root_bone)
        solved, residual = solve_frame(skeleton, frame, chain, root_world.compose(sample))
        worst = max(worst, residual)
        frames.append(solved)
    return AnimationClip(clip.fps, tuple(frames)), worst
