import math

import numpy as np
import pytest

from conftest import max_fk_orientation_error_deg, max_fk_position_error
from mmsanim import anim, quat
from mmsanim.anim import RigidTransform
from mmsanim.ik import bake_controller
from mmsanim.inflect import (
    InflectionBinding,
    LocalRotationTarget,
    RelativeLocRotTarget,
    RelativeLocTarget,
    RelativeRotTarget,
    TrajectoryTarget,
    apply_row_inflections,
    inflect_local_rotation,
    inflect_relative,
    inflect_trajectory,
    row_bindings,
)
from mmsanim.mms import (
    InflectionSet,
    LocRotParams,
    RotationTriple,
    TrajectoryParams,
    TranslationTriple,
)


@pytest.fixture(scope="module")
def hand_track(skeleton, sign_clip):
    return bake_controller(skeleton, sign_clip, "Bone_R_Hand", "Bone_Spine2")


class TestTrajectory:
    def test_identity_params_bit_exact(self, hand_track):
        assert inflect_trajectory(hand_track, TrajectoryParams()) is hand_track

    def test_translation_shifts_every_sample(self, hand_track):
        out = inflect_trajectory(hand_track, TrajectoryParams(x=0.1))
        for before, after in zip(hand_track.samples, out.samples):
            assert np.allclose(
                after.translation, before.translation + [0.1, 0.0, 0.0], atol=1e-12
            )
            assert np.array_equal(after.rotation, before.rotation)

    def test_zero_scale_collapses_to_first_point(self, hand_track):
        out = inflect_trajectory(hand_track, TrajectoryParams(x=0.05, sx=0.0, sy=0.0, sz=0.0))
        p0 = hand_track.samples[0].translation
        for s in out.samples:
            assert np.allclose(s.translation, p0 + [0.05, 0.0, 0.0], atol=1e-12)

    def test_scale_rotate_translate_order_matrix_oracle(self, hand_track):
        # Oracle: explicit matrix application in the pinned S-then-R-then-T order.
        params = TrajectoryParams(x=0.05, y=-0.02, z=0.01, ax=20.0, ay=-35.0, az=10.0,
                                  sx=1.4, sy=0.7, sz=1.1)
        from scipy.spatial.transform import Rotation as R

        rot = R.from_euler("XYZ", [params.ax, params.ay, params.az], degrees=True)
        scale = np.diag([params.sx, params.sy, params.sz])
        shift = np.array([params.x, params.y, params.z])
        p0 = hand_track.samples[0].translation
        out = inflect_trajectory(hand_track, params)
        for before, after in zip(hand_track.samples, out.samples):
            expected = p0 + shift + rot.apply(scale @ (before.translation - p0))
            assert np.allclose(after.translation, expected, atol=1e-9)

    def test_rotation_corotates_orientation(self, hand_track):
        out = inflect_trajectory(hand_track, TrajectoryParams(ay=30.0))
        delta = quat.axis_rotation_deg("y", 30.0)
        for before, after in zip(hand_track.samples, out.samples):
            assert quat.angle_between(after.rotation, quat.mul(delta, before.rotation)) < 1e-9


class TestRelative:
    def test_no_deltas_bit_exact(self, hand_track):
        assert inflect_relative(hand_track, None, None) is hand_track
        assert (
            inflect_relative(hand_track, TranslationTriple(), RotationTriple()) is hand_track
        )

    def test_translation_delta_per_sample(self, skeleton, sign_clip):
        track = bake_controller(skeleton, sign_clip, "Bone_Spine2", "Bone_Pelvis")
        out = inflect_relative(track, TranslationTriple(0.0, 0.0, 0.05), None)
        for before, after in zip(track.samples, out.samples):
            assert np.allclose(
                after.translation, before.translation + [0.0, 0.0, 0.05], atol=1e-12
            )
            assert np.array_equal(after.rotation, before.rotation)

    def test_rotation_delta_per_sample(self, hand_track):
        out = inflect_relative(hand_track, None, RotationTriple(0.0, 15.0, 0.0))
        delta = quat.axis_rotation_deg("y", 15.0)
        for before, after in zip(hand_track.samples, out.samples):
            assert quat.angle_between(after.rotation, quat.mul(delta, before.rotation)) < 1e-9
            assert np.array_equal(after.translation, before.translation)


class TestLocalRotation:
    def test_zero_delta_is_noop(self, skeleton, sign_clip):
        assert (
            inflect_local_rotation(skeleton, sign_clip, "Bone_R_Hand", RotationTriple())
            is sign_clip
        )

    def test_single_axis_group_property(self, skeleton, sign_clip):
        once = inflect_local_rotation(
            skeleton, sign_clip, "Bone_R_Hand", RotationTriple(180.0, 0.0, 0.0)
        )
        twice = inflect_local_rotation(
            skeleton,
            inflect_local_rotation(skeleton, sign_clip, "Bone_R_Hand", RotationTriple(90.0, 0.0, 0.0)),
            "Bone_R_Hand",
            RotationTriple(90.0, 0.0, 0.0),
        )
        for a, b in zip(once.frames, twice.frames):
            j = skeleton.index("Bone_R_Hand")
            assert quat.angle_between(a.local_rotations[j], b.local_rotations[j]) < 1e-6

    def test_wrist_position_invariant_and_orientation_conjugated(self, skeleton, sign_clip):
        delta = RotationTriple(25.0, -10.0, 5.0)
        out = inflect_local_rotation(skeleton, sign_clip, "Bone_R_Hand", delta)
        dq = quat.from_euler_xyz_deg(delta.x, delta.y, delta.z)
        for before, after in zip(sign_clip.frames, out.frames):
            tb = anim.fk_global(skeleton, before, "Bone_R_Hand")
            ta = anim.fk_global(skeleton, after, "Bone_R_Hand")
            assert np.allclose(tb.translation, ta.translation, atol=1e-9)
            # Bone-local composition shows up in the world frame as q_world * dq.
            assert quat.angle_between(ta.rotation, quat.mul(tb.rotation, dq)) < 1e-7

    def test_other_channels_untouched(self, skeleton, sign_clip):
        out = inflect_local_rotation(skeleton, sign_clip, "Bone_R_Hand", RotationTriple(40, 0, 0))
        j = skeleton.index("Bone_R_Hand")
        for before, after in zip(sign_clip.frames, out.frames):
            for k in range(skeleton.num_bones):
                if k != j:
                    assert np.array_equal(before.local_rotations[k], after.local_rotations[k])


class TestRowBindings:
    def test_five_families_each_with_one_strategy(self, profile):
        bindings = row_bindings(profile)
        families = {}
        for b in bindings:
            families.setdefault(b.family, set()).add(b.strategy)
        assert set(families) == {"hand_reloc", "hand_rot", "shoulder_reloc", "torso_reloc", "head_rot"}
        assert all(len(v) == 1 for v in families.values())

    def test_strategies_and_bones_match_the_mapping(self, profile):
        by_key = {(b.family, b.side): b for b in row_bindings(profile)}
        assert by_key[("hand_reloc", "dominant")].strategy is TrajectoryTarget
        assert by_key[("hand_reloc", "dominant")].controlled_bone == "Bone_R_Hand"
        assert by_key[("hand_reloc", "dominant")].relative_bone == "Bone_Spine2"
        assert by_key[("hand_rot", "nondominant")].strategy is LocalRotationTarget
        assert by_key[("hand_rot", "nondominant")].chain is None
        assert by_key[("shoulder_reloc", "dominant")].strategy is RelativeLocTarget
        assert by_key[("shoulder_reloc", "dominant")].controlled_bone == "Bone_R_Clavicle"
        assert by_key[("torso_reloc", None)].strategy is RelativeLocRotTarget
        assert by_key[("torso_reloc", None)].relative_bone == "Bone_Pelvis"
        assert by_key[("head_rot", None)].strategy is RelativeRotTarget
        assert by_key[("head_rot", None)].relative_bone == "Bone_Spine2"


class TestApplyRowInflections:
    def test_identity_set_round_trips(self, skeleton, profile, sign_clip):
        out, residual = apply_row_inflections(skeleton, sign_clip, InflectionSet(), profile)
        assert residual == 0.0
        assert max_fk_position_error(skeleton, sign_clip, out) <= 1e-3

    def test_torso_rotation_carries_the_signing_space(self, skeleton, profile, sign_clip):
        infl = InflectionSet(torso_reloc=LocRotParams(ay=30.0))
        out, residual = apply_row_inflections(skeleton, sign_clip, infl, profile)
        assert residual <= 1e-3
        for before, after in zip(sign_clip.frames, out.frames):
            a = anim.relative_transform(skeleton, before, "Bone_R_Hand", "Bone_Spine2")
            b = anim.relative_transform(skeleton, after, "Bone_R_Hand", "Bone_Spine2")
            assert np.linalg.norm(a.translation - b.translation) <= 1e-3
            # And the torso really did rotate.
        spine_before = anim.fk_global(skeleton, sign_clip.frames[0], "Bone_Spine2")
        spine_after = anim.fk_global(skeleton, out.frames[0], "Bone_Spine2")
        assert abs(math.degrees(quat.angle_between(spine_before.rotation, spine_after.rotation)) - 30.0) < 0.5

    def test_hand_translation_in_torso_frame(self, skeleton, profile, sign_clip):
        infl = InflectionSet(dom_hand_reloc=TrajectoryParams(x=0.1))
        out, residual = apply_row_inflections(skeleton, sign_clip, infl, profile)
        assert residual <= 1e-3
        for before, after in zip(sign_clip.frames, out.frames):
            a = anim.relative_transform(skeleton, before, "Bone_R_Hand", "Bone_Spine2")
            b = anim.relative_transform(skeleton, after, "Bone_R_Hand", "Bone_Spine2")
            assert np.linalg.norm(b.translation - (a.translation + [0.1, 0.0, 0.0])) <= 1.5e-3

    def test_head_rotation_relative_to_torso(self, skeleton, profile, sign_clip):
        infl = InflectionSet(head_rot=RotationTriple(0.0, 15.0, 0.0))
        out, residual = apply_row_inflections(skeleton, sign_clip, infl, profile)
        delta = quat.axis_rotation_deg("y", 15.0)
        for before, after in zip(sign_clip.frames, out.frames):
            a = anim.relative_transform(skeleton, before, "Bone_Head", "Bone_Spine2")
            b = anim.relative_transform(skeleton, after, "Bone_Head", "Bone_Spine2")
            assert quat.angle_between(b.rotation, quat.mul(delta, a.rotation)) < math.radians(0.5)
            assert np.allclose(a.translation, b.translation, atol=1e-9)

    def test_shoulder_shift_matches_sphere_projection_oracle(self, skeleton, profile, sign_clip):
        # The clavicle end rides a sphere around the clavicle head, so the
        # attainable point is the radial projection of the shifted target.
        delta = np.array([0.0, 0.03, 0.01])
        infl = InflectionSet(dom_shoulder_reloc=TranslationTriple(*delta))
        out, _ = apply_row_inflections(skeleton, sign_clip, infl, profile)
        end_bone = profile.dominant_clavicle_chain.end_effector
        for before, after in zip(sign_clip.frames, out.frames):
            pivot = anim.relative_transform(
                skeleton, before, "Bone_R_Clavicle", "Bone_Spine2"
            ).translation
            orig = anim.relative_transform(skeleton, before, end_bone, "Bone_Spine2").translation
            got = anim.relative_transform(skeleton, after, end_bone, "Bone_Spine2").translation
            radius = np.linalg.norm(orig - pivot)
            target = orig + delta
            expected = pivot + radius * (target - pivot) / np.linalg.norm(target - pivot)
            assert np.linalg.norm(got - expected) <= 1e-3

    def test_hand_edits_leave_legs_and_head_alone(self, skeleton, profile, sign_clip):
        infl = InflectionSet(dom_hand_reloc=TrajectoryParams(x=0.08, ay=20.0))
        out, _ = apply_row_inflections(skeleton, sign_clip, infl, profile)
        untouched = [
            skeleton.index(n)
            for n in skeleton.names
            if "Thigh" in n or "Calf" in n or "Foot" in n or n in ("Bone_Head", "Bone_Neck")
        ]
        for before, after in zip(sign_clip.frames, out.frames):
            for j in untouched:
                assert np.array_equal(before.local_rotations[j], after.local_rotations[j])

    def test_head_edits_leave_arms_alone(self, skeleton, profile, sign_clip):
        infl = InflectionSet(head_rot=RotationTriple(10.0, 20.0, 0.0))
        out, _ = apply_row_inflections(skeleton, sign_clip, infl, profile)
        arms = [skeleton.index(b) for b in profile.arm_bones(True) + profile.arm_bones(False)]
        for before, after in zip(sign_clip.frames, out.frames):
            for j in arms:
                assert np.array_equal(before.local_rotations[j], after.local_rotations[j])

    def test_strategy_identities_are_noops_at_fk_level(self, skeleton, profile, sign_clip):
        cases = [
            InflectionSet(dom_hand_reloc=TrajectoryParams()),
            InflectionSet(torso_reloc=LocRotParams()),
            InflectionSet(head_rot=RotationTriple()),
            InflectionSet(dom_shoulder_reloc=TranslationTriple()),
        ]
        for infl in cases:
            out, _ = apply_row_inflections(skeleton, sign_clip, infl, profile)
            assert max_fk_position_error(skeleton, sign_clip, out) <= 1e-3
        out = inflect_local_rotation(skeleton, sign_clip, "Bone_R_Hand", RotationTriple())
        assert max_fk_position_error(skeleton, sign_clip, out) <= 1e-9

    def test_combined_torso_and_opposite_hand_rotation(self, skeleton, profile):
        # Torso one way, hand trajectory the other: both effects must coexist,
        # the hand params acting inside the rotated signing space.
        from mmsanim.demo import make_pointing_clip

        clip = make_pointing_clip(skeleton, duration=1.0)
        infl = InflectionSet(
            torso_reloc=LocRotParams(ay=20.0),
            dom_hand_reloc=TrajectoryParams(ay=-50.0),
        )
        out, residual = apply_row_inflections(skeleton, clip, infl, profile)
        assert residual <= 2e-3
        delta = quat.axis_rotation_deg("y", -50.0)
        p0 = anim.relative_transform(
            skeleton, clip.frames[0], "Bone_R_Hand", "Bone_Spine2"
        ).translation
        for before, after in zip(clip.frames, out.frames):
            a = anim.relative_transform(skeleton, before, "Bone_R_Hand", "Bone_Spine2").translation
            b = anim.relative_transform(skeleton, after, "Bone_R_Hand", "Bone_Spine2").translation
            expected = p0 + quat.apply(delta, a - p0)
            assert np.linalg.norm(b - expected) <= 2e-3
