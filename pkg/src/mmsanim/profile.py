"""Skeleton profiles: binding semantic body roles and IK chains to bone names.

A profile tells the engine which concrete bones play which role (dominant
hand, torso, pelvis, head, clavicles), which ancestor chains the solver may
bend for each controller, and which bone set makes up each arm for
parallel-gloss overrides. Profiles are declarative JSON documents; the default
matches the bundled avatar naming (``Bone_R_Hand``, ``Bone_Spine2``,
``Bone_Pelvis``, ...).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .anim import Skeleton
from .ik import IkChain, check_chain

PROFILE_FORMAT_TAG = "mms-anim-profile/1"


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class SkeletonProfile:
    dominant_side: str = "Right"
    dominant_hand: str = "Bone_R_Hand"
    nondominant_hand: str = "Bone_L_Hand"
    dominant_clavicle: str = "Bone_R_Clavicle"
    nondominant_clavicle: str = "Bone_L_Clavicle"
    torso: str = "Bone_Spine2"
    pelvis: str = "Bone_Pelvis"
    head: str = "Bone_Head"
    spine_chain: IkChain = field(
        default_factory=lambda: IkChain(("Bone_Spine", "Bone_Spine1", "Bone_Spine2"))
    )
    neck_chain: IkChain = field(
        default_factory=lambda: IkChain(("Bone_Neck", "Bone_Head"), position_weight=0.0)
    )
    dominant_arm_chain: IkChain = field(
        default_factory=lambda: IkChain(("Bone_R_UpperArm", "Bone_R_Forearm", "Bone_R_Hand"))
    )
    nondominant_arm_chain: IkChain = field(
        default_factory=lambda: IkChain(("Bone_L_UpperArm", "Bone_L_Forearm", "Bone_L_Hand"))
    )
    dominant_clavicle_chain: IkChain = field(
        default_factory=lambda: IkChain(("Bone_R_Clavicle", "Bone_R_UpperArm"), orientation_weight=0.0)
    )
    nondominant_clavicle_chain: IkChain = field(
        default_factory=lambda: IkChain(("Bone_L_Clavicle", "Bone_L_UpperArm"), orientation_weight=0.0)
    )
    dominant_arm_bones: tuple[str, ...] = (
        "Bone_R_Clavicle",
        "Bone_R_UpperArm",
        "Bone_R_Forearm",
        "Bone_R_Hand",
    )
    nondominant_arm_bones: tuple[str, ...] = (
        "Bone_L_Clavicle",
        "Bone_L_UpperArm",
        "Bone_L_Forearm",
        "Bone_L_Hand",
    )

    def roles(self) -> dict[str, str]:
        return {
            "dominant_hand": self.dominant_hand,
            "nondominant_hand": self.nondominant_hand,
            "dominant_clavicle": self.dominant_clavicle,
            "nondominant_clavicle": self.nondominant_clavicle,
            "torso": self.torso,
            "pelvis": self.pelvis,
            "head": self.head,
        }

    def hand(self, dominant: bool) -> str:
        return self.dominant_hand if dominant else self.nondominant_hand

    def arm_chain(self, dominant: bool) -> IkChain:
        return self.dominant_arm_chain if dominant else self.nondominant_arm_chain

    def clavicle_chain(self, dominant: bool) -> IkChain:
        return self.dominant_clavicle_chain if dominant else self.nondominant_clavicle_chain

    def arm_bones(self, dominant: bool) -> tuple[str, ...]:
        return self.dominant_arm_bones if dominant else self.nondominant_arm_bones


def default_profile() -> SkeletonProfile:
    return SkeletonProfile()


def validate_profile(profile: SkeletonProfile, skeleton: Skeleton) -> None:
    """Check that every role, chain, and arm set resolves against the skeleton."""
    for role, bone in profile.roles().items():
        try:
            skeleton.index(bone)
        except KeyError:
            raise ProfileError(f"profile role {role!r} names unknown bone {bone!r}") from None
    for label, chain, expected_end in (
        ("spine_chain", profile.spine_chain, profile.torso),
        ("neck_chain", profile.neck_chain, profile.head),
        ("dominant_arm_chain", profile.dominant_arm_chain, profile.dominant_hand),
        ("nondominant_arm_chain", profile.nondominant_arm_chain, profile.nondominant_hand),
    ):
        _check_profile_chain(skeleton, label, chain)
        if chain.end_effector != expected_end:
            raise ProfileError(f"{label} must end at {expected_end!r}")
    for label, chain, clavicle in (
        ("dominant_clavicle_chain", profile.dominant_clavicle_chain, profile.dominant_clavicle),
        ("nondominant_clavicle_chain", profile.nondominant_clavicle_chain, profile.nondominant_clavicle),
    ):
        _check_profile_chain(skeleton, label, chain)
        # The target point is the clavicle's end: the chain starts at the
        # clavicle and its last bone marks where the clavicle ends.
        if chain.bones[0] != clavicle:
            raise ProfileError(f"{label} must start at {clavicle!r}")
    for label, bones in (
        ("dominant_arm_bones", profile.dominant_arm_bones),
        ("nondominant_arm_bones", profile.nondominant_arm_bones),
    ):
        for bone in bones:
            try:
                skeleton.index(bone)
            except KeyError:
                raise ProfileError(f"{label} names unknown bone {bone!r}") from None
    if profile.dominant_side not in ("Right", "Left"):
        raise ProfileError(f"dominant_side must be 'Right' or 'Left', got {profile.dominant_side!r}")


def _check_profile_chain(skeleton: Skeleton, label: str, chain: IkChain) -> None:
    try:
        check_chain(skeleton, chain)
    except (KeyError, ValueError) as exc:
        raise ProfileError(f"{label}: {exc}") from None


def _chain_to_dict(chain: IkChain) -> dict:
    return {
        "bones": list(chain.bones),
        "position_weight": chain.position_weight,
        "orientation_weight": chain.orientation_weight,
        "tolerance": chain.tolerance,
        "max_iterations": chain.max_iterations,
        "damping": chain.damping,
    }


def _chain_from_dict(data: dict) -> IkChain:
    return IkChain(
        tuple(data["bones"]),
        position_weight=float(data.get("position_weight", 1.0)),
        orientation_weight=float(data.get("orientation_weight", 1.0)),
        tolerance=float(data.get("tolerance", 1e-3)),
        max_iterations=int(data.get("max_iterations", 64)),
        damping=float(data.get("damping", 0.5)),
    )


def profile_to_dict(profile: SkeletonProfile) -> dict:
    return {
        "format": PROFILE_FORMAT_TAG,
        "dominant_side": profile.dominant_side,
        "roles": profile.roles(),
        "chains": {
            "spine": _chain_to_dict(profile.spine_chain),
            "neck": _chain_to_dict(profile.neck_chain),
            "dominant_arm": _chain_to_dict(profile.dominant_arm_chain),
            "nondominant_arm": _chain_to_dict(profile.nondominant_arm_chain),
            "dominant_clavicle": _chain_to_dict(profile.dominant_clavicle_chain),
            "nondominant_clavicle": _chain_to_dict(profile.nondominant_clavicle_chain),
        },
        "arm_bones": {
            "dominant": list(profile.dominant_arm_bones),
            "nondominant": list(profile.nondominant_arm_bones),
        },
    }


def profile_from_dict(data: dict) -> SkeletonProfile:
    if data.get("format") != PROFILE_FORMAT_TAG:
        raise ProfileError(f"unsupported profile format tag {data.get('format')!r}")
    try:
        roles = data["roles"]
        chains = data["chains"]
        arms = data["arm_bones"]
        return SkeletonProfile(
            dominant_side=data.get("dominant_side", "Right"),
            dominant_hand=roles["dominant_hand"],
            nondominant_hand=roles["nondominant_hand"],
            dominant_clavicle=roles["dominant_clavicle"],
            nondominant_clavicle=roles["nondominant_clavicle"],
            torso=roles["torso"],
            pelvis=roles["pelvis"],
            head=roles["head"],
            spine_chain=_chain_from_dict(chains["spine"]),
            neck_chain=_chain_from_dict(chains["neck"]),
            dominant_arm_chain=_chain_from_dict(chains["dominant_arm"]),
            nondominant_arm_chain=_chain_from_dict(chains["nondominant_arm"]),
            dominant_clavicle_chain=_chain_from_dict(chains["dominant_clavicle"]),
            nondominant_clavicle_chain=_chain_from_dict(chains["nondominant_clavicle"]),
            dominant_arm_bones=tuple(arms["dominant"]),
            nondominant_arm_bones=tuple(arms["nondominant"]),
        )
    except KeyError as exc:
        raise ProfileError(f"profile document is missing key {exc}") from None


def load_profile(path) -> SkeletonProfile:
    return profile_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def save_profile(profile: SkeletonProfile, path) -> None:
    Path(path).write_text(json.dumps(profile_to_dict(profile), indent=2) + "\n", encoding="utf-8")
