import math

import numpy as np
import pytest

from conftest import max_fk_position_error, poses_bitequal
from mmsanim import anim, quat
from mmsanim.anim import AnimationClip, Pose, identity_pose, retime_clip
from mmsanim.compose import (
    RealizationError,
    RealizeOptions,
    make_transition,
    merge_parallel,
    realize,
    schedule,
)
from mmsanim.demo import make_sign_clip
from mmsanim.mms import parse_mms


def starts_ends(rows):
    return [(round(r.start, 6), round(r.end, 6)) for r in rows]


class TestSchedule:
    def test_absolute_placement(self, dictionary):
        doc = parse_mms(
            "maingloss,framestart,frameend\nNICHT,0.0,1.0\nINDEX,1.5,2.5\n"
        )
        rows = schedule(doc, dictionary)
        assert starts_ends(rows) == [(0.0, 1.0), (1.5, 2.5)]

    def test_speed_percent_scales_nominal(self, dictionary):
        # BALL is 2.0 s nominal; 50% speed doubles the placed length.
        doc = parse_mms("maingloss,duration\nBALL,50%\n")
        rows = schedule(doc, dictionary)
        assert starts_ends(rows) == [(0.0, 4.0)]

    def test_transition_delays_after_previous(self, dictionary):
        doc = parse_mms("maingloss,duration,transition\nNICHT,1.0,\nINDEX,1.0,0.3\n")
        assert starts_ends(schedule(doc, dictionary)) == [(0.0, 1.0), (1.3, 2.3)]

    def test_missing_duration_uses_nominal(self, dictionary):
        doc = parse_mms("maingloss\nBALL\n")
        assert starts_ends(schedule(doc, dictionary)) == [(0.0, 2.0)]

    def test_absolute_rows_reset_the_cursor(self, dictionary):
        doc = parse_mms(
            "maingloss,framestart,frameend,duration,transition\n"
            "NICHT,,,1.0,\n"
            "INDEX,5.0,6.0,,\n"
            "BALL,,,,0.5\n"
        )
        assert starts_ends(schedule(doc, dictionary)) == [(0.0, 1.0), (5.0, 6.0), (6.5, 8.5)]

    def test_overlap_rejected(self, dictionary):
        doc = parse_mms(
            "maingloss,framestart,frameend,duration\nNICHT,,,2.0\nINDEX,1.0,2.0,\n"
        )
        with pytest.raises(RealizationError, match="row 2.*overlaps"):
            schedule(doc, dictionary)

    def test_unknown_gloss(self, dictionary):
        doc = parse_mms("maingloss\nXYZZY\n")
        with pytest.raises(RealizationError, match="row 1.*XYZZY"):
            schedule(doc, dictionary)

    def test_hold_needs_duration(self, dictionary):
        doc = parse_mms("maingloss,transition\n<HOLD>,0.5\n")
        with pytest.raises(RealizationError, match="duration"):
            schedule(doc, dictionary)

    def test_inflections_do_not_affect_scheduling(self, dictionary):
        plain = parse_mms("maingloss,duration,transition\nNICHT,1.0,\nINDEX,1.5,0.2\n")
        inflected = parse_mms(
            "maingloss,duration,transition,torsorelocay,domhandrelocx,headrotz\n"
            "NICHT,1.0,,25,0.1,10\n"
            "INDEX,1.5,0.2,-10,,5\n"
        )
        assert starts_ends(schedule(plain, dictionary)) == starts_ends(
            schedule(inflected, dictionary)
        )


class TestMergeParallel:
    def test_no_overrides_returns_main_bit_exact(self, skeleton, profile, sign_clip):
        assert merge_parallel(skeleton, sign_clip, profile=profile) is sign_clip

    def test_dominant_override_partition(self, skeleton, profile):
        main = make_sign_clip(skeleton, duration=0.5)
        dom = make_sign_clip(skeleton, duration=0.5, swing=26.0, phase=1.2)
        merged = merge_parallel(skeleton, main, dom, None, profile=profile)
        dom_idx = {skeleton.index(b) for b in profile.arm_bones(True)}
        for i, pose in enumerate(merged.frames):
            for j in range(skeleton.num_bones):
                source = dom if j in dom_idx else main
                assert np.array_equal(pose.local_rotations[j], source.frames[i].local_rotations[j])
            assert np.array_equal(pose.root_translation, main.frames[i].root_translation)

    def test_ndom_hold_freezes_arm_channels(self, skeleton, profile):
        main = make_sign_clip(skeleton, duration=0.5)
        prev = make_sign_clip(skeleton, duration=0.4, swing=30.0).frames[-1]
        merged = merge_parallel(
            skeleton, main, None, None, profile=profile, prev_pose=prev, ndom_hold=True
        )
        ndom_idx = [skeleton.index(b) for b in profile.arm_bones(False)]
        for pose in merged.frames:
            for j in ndom_idx:
                assert np.array_equal(pose.local_rotations[j], prev.local_rotations[j])

    def test_frame_count_mismatch(self, skeleton, profile):
        main = make_sign_clip(skeleton, duration=0.5)
        dom = make_sign_clip(skeleton, duration=0.6)
        with pytest.raises(ValueError, match="frames"):
            merge_parallel(skeleton, main, dom, None, profile=profile)

    def test_initial_hold_without_prev_pose(self, skeleton, profile, sign_clip):
        with pytest.raises(ValueError, match="previous row"):
            merge_parallel(skeleton, sign_clip, None, None, profile=profile, dom_hold=True)


class TestMakeTransition:
    def test_equal_poses_stay_constant(self, skeleton):
        pose = identity_pose(skeleton)
        frames = make_transition(pose, pose, 0.5, 30.0)
        assert len(frames) == 14
        for f in frames:
            assert poses_bitequal(f, pose) or np.allclose(
                f.local_rotations, pose.local_rotations, atol=1e-12
            )

    def test_one_second_gap_has_29_frames_with_eased_midpoint(self, skeleton):
        a = identity_pose(skeleton)
        rots = a.local_rotations.copy()
        rots[3] = quat.axis_rotation_deg("y", 40.0)
        b = Pose(a.root_translation, rots)
        frames = make_transition(a, b, 1.0, 30.0)
        assert len(frames) == 29
        mid = frames[14]  # u = 15/30 = 0.5, smoothstep(0.5) = 0.5
        assert abs(math.degrees(quat.angle(mid.local_rotations[3])) - 20.0) < 1e-6

    def test_zero_gap_is_hard_cut(self, skeleton):
        pose = identity_pose(skeleton)
        assert make_transition(pose, pose, 0.0, 30.0) == ()

    def test_monotone_approach(self, skeleton):
        rng = np.random.default_rng(7)
        for _ in range(5):
            rots_a = np.array(
                [quat.normalize(rng.normal(size=4)) for _ in range(skeleton.num_bones)]
            )
            rots_b = np.array(
                [quat.normalize(rng.normal(size=4)) for _ in range(skeleton.num_bones)]
            )
            a = Pose(rng.normal(size=3), rots_a)
            b = Pose(rng.normal(size=3), rots_b)
            frames = make_transition(a, b, 0.8, 30.0)
            for j in range(skeleton.num_bones):
                dists = [quat.angle_between(f.local_rotations[j], b.local_rotations[j]) for f in frames]
                assert all(later <= earlier + 1e-9 for earlier, later in zip(dists, dists[1:]))


class TestRealize:
    def test_single_identity_row_matches_dictionary_clip(self, dictionary, skeleton):
        doc = parse_mms("maingloss\nNICHT\n")
        timeline = realize(doc, dictionary)
        source = dictionary.lookup("NICHT")
        assert timeline.clip.num_frames == source.num_frames
        assert max_fk_position_error(skeleton, timeline.clip, source) <= 1e-3

    def test_two_rows_with_gap_layout(self, dictionary):
        doc = parse_mms("maingloss,duration,transition\nNICHT,1.0,\nINDEX,1.0,0.5\n")
        timeline = realize(doc, dictionary)
        assert abs(timeline.clip.nominal_duration - 2.5) < 1e-9
        assert timeline.clip.num_frames == 76
        assert [(s.start, s.end) for s in timeline.segments] == [(0.0, 1.0), (1.5, 2.5)]
        assert [(t.start, t.end) for t in timeline.transitions] == [(1.0, 1.5)]

    def test_segment_channels_are_bit_exact_copies(self, dictionary, skeleton, profile):
        doc = parse_mms("maingloss,duration,transition\nNICHT,1.0,\nINDEX,1.0,0.4\n")
        timeline = realize(doc, dictionary)
        fps = timeline.clip.fps
        source = retime_clip(dictionary.lookup("INDEX"), 1.0, fps)
        start = int(round(1.4 * fps))
        for i, frame in enumerate(source.frames):
            assert poses_bitequal(timeline.clip.frames[start + i], frame)

    def test_hold_row_freezes_full_body(self, dictionary):
        doc = parse_mms("maingloss,duration\nNICHT,1.0\n<HOLD>,0.5\n")
        timeline = realize(doc, dictionary)
        fps = timeline.clip.fps
        start, end = int(round(1.0 * fps)), int(round(1.5 * fps))
        for i in range(start, end + 1):
            assert poses_bitequal(timeline.clip.frames[i], timeline.clip.frames[start])
        hold = [s for s in timeline.segments if s.kind == "hold"]
        assert len(hold) == 1

    def test_initial_hold_rejected(self, dictionary):
        doc = parse_mms("maingloss,duration\n<HOLD>,0.5\n")
        with pytest.raises(RealizationError, match="row 1"):
            realize(doc, dictionary)

    def test_lead_in_holds_first_pose(self, dictionary):
        doc = parse_mms("maingloss,framestart,frameend\nNICHT,1.0,2.0\n")
        timeline = realize(doc, dictionary)
        fps = timeline.clip.fps
        first_scheduled = int(round(1.0 * fps))
        for i in range(first_scheduled):
            assert poses_bitequal(timeline.clip.frames[i], timeline.clip.frames[first_scheduled])

    def test_empty_document_rejected(self, dictionary):
        doc = parse_mms("maingloss\n")
        with pytest.raises(RealizationError, match="no rows"):
            realize(doc, dictionary)

    def test_overspeed_warning(self, dictionary):
        # BALL is 2.0 s nominal; squeezing it into 0.4 s exceeds 400% speed.
        doc = parse_mms("maingloss,duration\nBALL,0.4\n")
        timeline = realize(doc, dictionary)
        assert any("400%" in w for w in timeline.warnings)

    def test_custom_fps(self, dictionary):
        doc = parse_mms("maingloss,duration\nNICHT,1.0\n")
        timeline = realize(doc, dictionary, options=RealizeOptions(fps=60.0))
        assert timeline.clip.fps == 60.0
        assert timeline.clip.num_frames == 61

    def test_dom_override_and_hold_combination(self, dictionary, skeleton, profile):
        doc = parse_mms(
            "maingloss,domgloss,ndomgloss,duration\nNICHT,,,1.0\nBALL,GUT,<HOLD>,1.0\n"
        )
        timeline = realize(doc, dictionary)
        fps = timeline.clip.fps
        ndom_idx = [skeleton.index(b) for b in profile.arm_bones(False)]
        start, end = int(round(1.0 * fps)), int(round(2.0 * fps))
        frozen = timeline.clip.frames[int(round(1.0 * fps))]
        for i in range(start, end + 1):
            for j in ndom_idx:
                assert np.array_equal(
                    timeline.clip.frames[i].local_rotations[j], frozen.local_rotations[j]
                )
