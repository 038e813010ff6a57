"""Bundled demo avatar and procedural sign-like motion generators.

The avatar is a 19-bone humanoid (meters, Y up, facing +Z) whose bone names
match the default profile. Clip generators are closed-form sinusoid motions,
deterministic by construction, used by the example scripts and the test suite
to synthesize gloss dictionaries.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from . import quat
from .anim import AnimationClip, Pose, Skeleton, identity_pose
from .bvh import save_bvh


def demo_skeleton() -> Skeleton:
    return Skeleton.from_bones(
        [
            ("Bone_Pelvis", None, (0.0, 1.0, 0.0)),
            ("Bone_Spine", 0, (0.0, 0.12, 0.0)),
            ("Bone_Spine1", 1, (0.0, 0.14, 0.0)),
            ("Bone_Spine2", 2, (0.0, 0.14, 0.0)),
            ("Bone_Neck", 3, (0.0, 0.12, 0.0)),
            ("Bone_Head", 4, (0.0, 0.10, 0.0)),
            ("Bone_R_Clavicle", 3, (-0.05, 0.08, 0.0)),
            ("Bone_R_UpperArm", 6, (-0.13, 0.0, 0.0)),
            ("Bone_R_Forearm", 7, (-0.26, 0.0, 0.0)),
            ("Bone_R_Hand", 8, (-0.25, 0.0, 0.0)),
            ("Bone_L_Clavicle", 3, (0.05, 0.08, 0.0)),
            ("Bone_L_UpperArm", 10, (0.13, 0.0, 0.0)),
            ("Bone_L_Forearm", 11, (0.26, 0.0, 0.0)),
            ("Bone_L_Hand", 12, (0.25, 0.0, 0.0)),
            ("Bone_R_Thigh", 0, (-0.09, -0.05, 0.0)),
            ("Bone_R_Calf", 14, (0.0, -0.42, 0.0)),
            ("Bone_R_Foot", 15, (0.0, -0.40, 0.0)),
            ("Bone_L_Thigh", 0, (0.09, -0.05, 0.0)),
            ("Bone_L_Calf", 17, (0.0, -0.42, 0.0)),
            ("Bone_L_Foot", 18, (0.0, -0.40, 0.0)),
        ]
    )


def _signing_pose(
    skeleton: Skeleton,
    *,
    r_shoulder: float,
    r_drop: float,
    r_elbow: float,
    l_shoulder: float,
    l_drop: float,
    l_elbow: float,
    torso_sway: float = 0.0,
    head_turn: float = 0.0,
) -> Pose:
    """Build a pose from arm swing/drop/elbow angles (degrees).

    Positive shoulder swing brings an arm forward from the T pose; drop lowers
    it toward the body; the elbow bends inward across the chest.
    """
    pose = identity_pose(skeleton)
    rots = pose.local_rotations
    rots[skeleton.index("Bone_R_UpperArm")] = quat.mul(
        quat.axis_rotation_deg("y", r_shoulder), quat.axis_rotation_deg("z", r_drop)
    )
    rots[skeleton.index("Bone_R_Forearm")] = quat.axis_rotation_deg("y", r_elbow)
    rots[skeleton.index("Bone_L_UpperArm")] = quat.mul(
        quat.axis_rotation_deg("y", -l_shoulder), quat.axis_rotation_deg("z", -l_drop)
    )
    rots[skeleton.index("Bone_L_Forearm")] = quat.axis_rotation_deg("y", -l_elbow)
    if torso_sway:
        rots[skeleton.index("Bone_Spine1")] = quat.axis_rotation_deg("z", torso_sway)
    if head_turn:
        rots[skeleton.index("Bone_Head")] = quat.axis_rotation_deg("y", head_turn)
    return Pose(pose.root_translation, rots)


def make_sign_clip(
    skeleton: Skeleton,
    *,
    duration: float = 2.0,
    fps: float = 30.0,
    swing: float = 18.0,
    cycles: float = 1.0,
    phase: float = 0.0,
    two_handed: bool = False,
    sway: float = 2.0,
) -> AnimationClip:
    """Generic sign-like motion: the dominant arm draws an arc in front of the chest."""
    n = int(round(duration * fps)) + 1
    frames = []
    for i in range(n):
        u = i / (n - 1) if n > 1 else 0.0
        wave = math.sin(2.0 * math.pi * cycles * u + phase)
        ramp = math.sin(math.pi * min(max(u, 0.0), 1.0))
        frames.append(
            _signing_pose(
                skeleton,
                r_shoulder=56.0 + swing * wave * ramp,
                r_drop=20.0 + 0.35 * swing * math.cos(2.0 * math.pi * cycles * u + phase) * ramp,
                r_elbow=56.0 + 0.4 * swing * wave * ramp,
                l_shoulder=(56.0 + swing * -wave * ramp) if two_handed else 20.0,
                l_drop=(20.0 + 6.0 * ramp) if two_handed else 30.0,
                l_elbow=(56.0 + 0.4 * swing * -wave * ramp) if two_handed else 25.0,
                torso_sway=sway * wave * ramp,
            )
        )
    return AnimationClip(fps, tuple(frames))


def make_pointing_clip(
    skeleton: Skeleton, *, duration: float = 1.5, fps: float = 30.0
) -> AnimationClip:
    """Pointing gesture: the dominant hand extends straight forward from the chest.

    Authored through the IK solver so the hand tracks a straight line in front
    of the shoulder, with the hand orientation following the motion direction.
    """
    from .anim import RigidTransform, fk_all
    from .ik import IkChain, solve_frame

    chain = IkChain(
        ("Bone_R_UpperArm", "Bone_R_Forearm", "Bone_R_Hand"),
        tolerance=1e-4,
        max_iterations=256,
    )
    shoulder_x = -0.18
    start = np.array([shoulder_x, 1.30, 0.22])
    extent = np.array([0.0, 0.08, 0.24])
    aim = extent / np.linalg.norm(extent)
    # Hand rest direction is -X for the right arm; orient it along the motion.
    hand_rot = quat.rotation_between(np.array([-1.0, 0.0, 0.0]), aim)

    n = int(round(duration * fps)) + 1
    pose = _signing_pose(
        skeleton,
        r_shoulder=40.0,
        r_drop=20.0,
        r_elbow=80.0,
        l_shoulder=18.0,
        l_drop=32.0,
        l_elbow=30.0,
    )
    frames = []
    for i in range(n):
        u = i / (n - 1) if n > 1 else 0.0
        ease = u * u * (3.0 - 2.0 * u)
        target = RigidTransform(start + ease * extent, hand_rot)
        pose, _ = solve_frame(skeleton, pose, chain, target)
        frames.append(pose)
    return AnimationClip(fps, tuple(frames))


DEMO_GLOSSES = {
    "NICHT": dict(duration=1.6, swing=16.0, cycles=2.0, sway=3.0),
    "INDEX": None,  # pointing gesture
    "BALL": dict(duration=2.0, swing=22.0, cycles=1.0, two_handed=True, sway=1.5),
    "HAUS": dict(duration=1.8, swing=14.0, cycles=1.0, phase=0.8, two_handed=True),
    "GUT": dict(duration=1.2, swing=12.0, cycles=1.5, phase=0.3),
}


def make_gloss_clip(skeleton: Skeleton, gloss: str, fps: float = 30.0) -> AnimationClip:
    spec = DEMO_GLOSSES[gloss]
    if spec is None:
        return make_pointing_clip(skeleton, fps=fps)
    return make_sign_clip(skeleton, fps=fps, **spec)


def write_demo_dictionary(directory, fps: float = 30.0, glosses=None) -> list[str]:
    """Write the demo glosses as BVH files named ``<GLOSS>.bvh``; returns the IDs."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    skeleton = demo_skeleton()
    written = []
    for gloss in glosses or sorted(DEMO_GLOSSES):
        clip = make_gloss_clip(skeleton, gloss, fps=fps)
        (directory / f"{gloss}.bvh").write_bytes(save_bvh(skeleton, clip))
        written.append(gloss)
    return written
