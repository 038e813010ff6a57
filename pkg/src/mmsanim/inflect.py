"""Inflection strategies: programmatic edits of controller tracks and rotations.

Five column families map onto four editing strategies. Hand trajectory cells
drive a full rigid transform plus non-uniform scale of the hand's controller
track about its first sample; torso / shoulder / head cells add deltas to the
respective controller in its reference bone's frame; hand rotation cells add a
bone-local delta with no IK at all. All angles arrive in degrees and are
converted here.

``apply_row_inflections`` runs a whole row: bake the needed controllers from
the incoming clip, edit them, bake back in hierarchy order (torso, shoulders,
head, hands), each solve using the already-updated parent chain, then add the
hand-local rotation deltas. Controllers for the hands and head live in the
torso's frame while the torso controller lives in the pelvis frame, so torso
edits carry the signing space along with them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quat
from .anim import AnimationClip, Pose, RigidTransform, Skeleton
from .ik import ControllerTrack, IkChain, bake_back, bake_controller
from .mms import InflectionSet, LocRotParams, RotationTriple, TrajectoryParams, TranslationTriple
from .profile import SkeletonProfile


def inflect_trajectory(track: ControllerTrack, params: TrajectoryParams) -> ControllerTrack:
    """Scale, rotate, then translate all samples about the first sample's position.

    With first position p0, rotation R, scale S, and translation T:
    ``p' = p0 + T + R (S (p - p0))``; orientations co-rotate: ``q' = R q``.
    """
    if params.is_identity:
        return track
    p0 = track.samples[0].translation
    rotated = params.ax != 0.0 or params.ay != 0.0 or params.az != 0.0
    rot = quat.from_euler_xyz_deg(params.ax, params.ay, params.az) if rotated else None
    scale = np.array([params.sx, params.sy, params.sz])
    shift = np.array([params.x, params.y, params.z])
    samples = []
    for s in track.samples:
        local = scale * (s.translation - p0)
        if rotated:
            local = quat.apply(rot, local)
        orientation = quat.normalize(quat.mul(rot, s.rotation)) if rotated else s.rotation
        samples.append(RigidTransform(p0 + shift + local, orientation))
    return ControllerTrack(track.controlled_bone, track.root_bone, tuple(samples))


def inflect_relative(
    track: ControllerTrack,
    delta_translation=None,
    delta_rotation: RotationTriple | None = None,
) -> ControllerTrack:
    """Add a translation and/or rotation delta to every sample, in the root bone's frame."""
    shift = None
    if delta_translation is not None:
        shift = np.asarray(
            [delta_translation.x, delta_translation.y, delta_translation.z]
            if isinstance(delta_translation, TranslationTriple)
            else delta_translation,
            dtype=float,
        )
        if not shift.any():
            shift = None
    rot = None
    if delta_rotation is not None and not delta_rotation.is_identity:
        rot = quat.from_euler_xyz_deg(delta_rotation.x, delta_rotation.y, delta_rotation.z)
    if shift is None and rot is None:
        return track
    samples = tuple(
        RigidTransform(
            s.translation + shift if shift is not None else s.translation,
            quat.normalize(quat.mul(rot, s.rotation)) if rot is not None else s.rotation,
        )
        for s in track.samples
    )
    return ControllerTrack(track.controlled_bone, track.root_bone, samples)


def inflect_local_rotation(
    skeleton: Skeleton, clip: AnimationClip, bone: str, delta: RotationTriple
) -> AnimationClip:
    """Compose a bone-local rotation delta onto every frame (no IK involved)."""
    if delta.is_identity:
        return clip
    j = skeleton.index(bone)
    dq = quat.from_euler_xyz_deg(delta.x, delta.y, delta.z)
    frames = []
    for pose in clip.frames:
        rots = pose.local_rotations.copy()
        rots[j] = quat.normalize(quat.mul(rots[j], dq))
        frames.append(Pose(pose.root_translation, rots))
    return AnimationClip(clip.fps, tuple(frames))


class Inflector:
    """Base of the strategy hierarchy; concrete strategies implement ``inflect``."""

    __slots__ = ()


@dataclass(frozen=True)
class LocalRotationTarget(Inflector):
    """Bone-local rotation delta; the only strategy that bypasses controllers."""

    bone: str
    delta: RotationTriple

    @property
    def is_identity(self) -> bool:
        return self.delta.is_identity

    def inflect(self, skeleton: Skeleton, clip: AnimationClip) -> AnimationClip:
        return inflect_local_rotation(skeleton, clip, self.bone, self.delta)


@dataclass(frozen=True)
class RelativeLocRotTarget(Inflector):
    """Translation and rotation deltas on a controller, relative to its root bone."""

    translation: TranslationTriple
    rotation: RotationTriple

    @property
    def is_identity(self) -> bool:
        return self.translation.is_identity and self.rotation.is_identity

    def inflect(self, track: ControllerTrack) -> ControllerTrack:
        return inflect_relative(track, self.translation, self.rotation)

    @classmethod
    def from_locrot(cls, params: LocRotParams) -> "RelativeLocRotTarget":
        return cls(
            TranslationTriple(params.x, params.y, params.z),
            RotationTriple(params.ax, params.ay, params.az),
        )


@dataclass(frozen=True)
class RelativeRotTarget(Inflector):
    """Rotation-only delta on a controller."""

    rotation: RotationTriple

    @property
    def is_identity(self) -> bool:
        return self.rotation.is_identity

    def inflect(self, track: ControllerTrack) -> ControllerTrack:
        return inflect_relative(track, None, self.rotation)


@dataclass(frozen=True)
class RelativeLocTarget(Inflector):
    """Translation-only delta on a controller (shoulder relocation)."""

    translation: TranslationTriple

    @property
    def is_identity(self) -> bool:
        return self.translation.is_identity

    def inflect(self, track: ControllerTrack) -> ControllerTrack:
        return inflect_relative(track, self.translation, None)


@dataclass(frozen=True)
class TrajectoryTarget(Inflector):
    """Full rigid transform + non-uniform scale of a controller trajectory."""

    params: TrajectoryParams

    @property
    def is_identity(self) -> bool:
        return self.params.is_identity

    def inflect(self, track: ControllerTrack) -> ControllerTrack:
        return inflect_trajectory(track, self.params)


@dataclass(frozen=True)
class InflectionBinding:
    """One column family bound to its strategy and bones for a given profile."""

    family: str
    side: str | None
    strategy: type
    controlled_bone: str
    relative_bone: str
    chain: IkChain | None


def row_bindings(profile: SkeletonProfile) -> tuple[InflectionBinding, ...]:
    """The column-family -> strategy -> bone mapping as data."""
    return (
        InflectionBinding(
            "hand_reloc", "dominant", TrajectoryTarget,
            profile.dominant_hand, profile.torso, profile.dominant_arm_chain,
        ),
        InflectionBinding(
            "hand_reloc", "nondominant", TrajectoryTarget,
            profile.nondominant_hand, profile.torso, profile.nondominant_arm_chain,
        ),
        InflectionBinding(
            "hand_rot", "dominant", LocalRotationTarget, profile.dominant_hand, profile.torso, None,
        ),
        InflectionBinding(
            "hand_rot", "nondominant", LocalRotationTarget,
            profile.nondominant_hand, profile.torso, None,
        ),
        InflectionBinding(
            "shoulder_reloc", "dominant", RelativeLocTarget,
            profile.dominant_clavicle, profile.torso, profile.dominant_clavicle_chain,
        ),
        InflectionBinding(
            "shoulder_reloc", "nondominant", RelativeLocTarget,
            profile.nondominant_clavicle, profile.torso, profile.nondominant_clavicle_chain,
        ),
        InflectionBinding(
            "torso_reloc", None, RelativeLocRotTarget, profile.torso, profile.pelvis, profile.spine_chain,
        ),
        InflectionBinding(
            "head_rot", None, RelativeRotTarget, profile.head, profile.torso, profile.neck_chain,
        ),
    )


@dataclass(frozen=True)
class _Stage:
    name: str
    track_bone: str  # bone whose transform the controller records
    root_bone: str
    chain: IkChain
    editor: Inflector


def _plan_stages(inflections: InflectionSet, profile: SkeletonProfile) -> list[_Stage]:
    torso = RelativeLocRotTarget.from_locrot(inflections.torso_reloc)
    dom_sh = RelativeLocTarget(inflections.dom_shoulder_reloc)
    ndom_sh = RelativeLocTarget(inflections.ndom_shoulder_reloc)
    head = RelativeRotTarget(inflections.head_rot)
    dom_hand = TrajectoryTarget(inflections.dom_hand_reloc)
    ndom_hand = TrajectoryTarget(inflections.ndom_hand_reloc)

    run_torso = not torso.is_identity
    run_dom_sh = not dom_sh.is_identity or run_torso
    run_ndom_sh = not ndom_sh.is_identity or run_torso
    run_head = not head.is_identity or run_torso
    run_dom_hand = not dom_hand.is_identity or run_dom_sh
    run_ndom_hand = not ndom_hand.is_identity or run_ndom_sh

    stages: list[_Stage] = []
    if run_torso:
        stages.append(_Stage("torso", profile.torso, profile.pelvis, profile.spine_chain, torso))
    if run_dom_sh:
        chain = profile.dominant_clavicle_chain
        stages.append(_Stage("dominant_shoulder", chain.end_effector, profile.torso, chain, dom_sh))
    if run_ndom_sh:
        chain = profile.nondominant_clavicle_chain
        stages.append(_Stage("nondominant_shoulder", chain.end_effector, profile.torso, chain, ndom_sh))
    if run_head:
        stages.append(_Stage("head", profile.head, profile.torso, profile.neck_chain, head))
    if run_dom_hand:
        stages.append(
            _Stage("dominant_hand", profile.dominant_hand, profile.torso, profile.dominant_arm_chain, dom_hand)
        )
    if run_ndom_hand:
        stages.append(
            _Stage(
                "nondominant_hand",
                profile.nondominant_hand,
                profile.torso,
                profile.nondominant_arm_chain,
                ndom_hand,
            )
        )
    return stages


def apply_row_inflections(
    skeleton: Skeleton,
    clip: AnimationClip,
    inflections: InflectionSet,
    profile: SkeletonProfile,
) -> tuple[AnimationClip, float]:
    """Apply one row's inflection set; returns (clip, max solver residual).

    All controller tracks are baked from the incoming clip before any edit, so
    only one bake pass and one bake-back pass happen per row regardless of how
    many inflections are active.
    """
    stages = _plan_stages(inflections, profile)
    current = clip
    worst = 0.0
    if stages:
        tracks = {
            stage.name: stage.editor.inflect(
                bake_controller(skeleton, clip, stage.track_bone, stage.root_bone)
            )
            for stage in stages
        }
        for stage in stages:
            current, residual = bake_back(skeleton, current, tracks[stage.name], stage.chain)
            worst = max(worst, residual)
    for bone, delta in (
        (profile.dominant_hand, inflections.dom_hand_rot),
        (profile.nondominant_hand, inflections.ndom_hand_rot),
    ):
        current = inflect_local_rotation(skeleton, current, bone, delta)
    return current, worst
