"""The realization cycle: schedule rows, retime, inflect, merge, and assemble.

Every scheduled row becomes a segment of the output timeline: its clips are
retimed to the scheduled length, inflected, merged across the parallel arm
streams, and copied into place without further resampling. Gaps between
segments are filled with smoothstep-eased interpolation; a zero gap is a hard
cut. ``<HOLD>`` freezes the full body (maingloss) or a single arm
(domgloss / ndomgloss) at the final pose of the previous row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .anim import AnimationClip, Pose, Skeleton, blend_poses, retime_clip
from .dictionary import DictionaryError, GlossDictionary
from .inflect import apply_row_inflections
from .mms import DurationKind, HOLD_TOKEN, MmsDocument, MmsRow, TimingMode
from .profile import SkeletonProfile


class RealizationError(RuntimeError):
    """Realization failure carrying the offending 1-based row index, if any."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        super().__init__(f"row {row}: {message}" if row is not None else message)


@dataclass(frozen=True, eq=False)
class ScheduledRow:
    index: int  # 1-based row number
    row: MmsRow
    start: float
    end: float
    main: AnimationClip | None  # None when maingloss is <HOLD>
    dom: AnimationClip | None
    ndom: AnimationClip | None


@dataclass(frozen=True)
class TimelineSegment:
    row_index: int
    maingloss: str
    start: float
    end: float
    kind: str  # "sign" | "hold"


@dataclass(frozen=True)
class TransitionWindow:
    start: float
    end: float


@dataclass(frozen=True, eq=False)
class Timeline:
    clip: AnimationClip
    segments: tuple[TimelineSegment, ...]
    transitions: tuple[TransitionWindow, ...]
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class RealizeOptions:
    fps: float = 30.0


def _resolve_clip(dictionary: GlossDictionary, gloss: str, row_index: int) -> AnimationClip:
    try:
        return dictionary.lookup(gloss)
    except (KeyError, DictionaryError) as exc:
        raise RealizationError(str(exc), row_index) from None


def schedule(doc: MmsDocument, dictionary: GlossDictionary) -> list[ScheduledRow]:
    """Place every row on the timeline; absolute rows reset the running cursor."""
    placed: list[ScheduledRow] = []
    cursor = 0.0
    for index, row in enumerate(doc.rows, start=1):
        main = None if row.maingloss == HOLD_TOKEN else _resolve_clip(dictionary, row.maingloss, index)
        dom = (
            _resolve_clip(dictionary, row.domgloss, index)
            if row.domgloss and row.domgloss != HOLD_TOKEN
            else None
        )
        ndom = (
            _resolve_clip(dictionary, row.ndomgloss, index)
            if row.ndomgloss and row.ndomgloss != HOLD_TOKEN
            else None
        )
        t = row.timing
        if t.mode is TimingMode.ABSOLUTE:
            start, end = t.frame_start, t.frame_end
        else:
            start = cursor + (t.transition or 0.0)
            if t.duration is None:
                if main is None:
                    raise RealizationError(f"{HOLD_TOKEN} row requires a duration", index)
                length = main.nominal_duration
            elif t.duration.kind is DurationKind.SECONDS:
                length = t.duration.value
            else:
                if main is None:
                    raise RealizationError(
                        f"{HOLD_TOKEN} row cannot use a speed percentage", index
                    )
                length = main.nominal_duration * (100.0 / t.duration.value)
            end = start + length
        if start < cursor - 1e-9:
            raise RealizationError("overlaps the previous row after resolution", index)
        if end <= start:
            raise RealizationError("resolved to a non-positive length", index)
        placed.append(ScheduledRow(index, row, start, end, main, dom, ndom))
        cursor = end
    return placed


def merge_parallel(
    skeleton: Skeleton,
    main_clip: AnimationClip,
    dom_clip: AnimationClip | None = None,
    ndom_clip: AnimationClip | None = None,
    *,
    profile: SkeletonProfile,
    prev_pose: Pose | None = None,
    dom_hold: bool = False,
    ndom_hold: bool = False,
) -> AnimationClip:
    """Overlay per-arm streams onto the main stream.

    Arm override clips replace the profile's arm bone channels frame by frame;
    a held arm is frozen at its channels from ``prev_pose`` (the final pose of
    the previous row). Everything else is taken from the main stream untouched.
    """
    if dom_clip is not None and dom_hold:
        raise ValueError("dominant arm cannot both play a gloss and hold")
    if ndom_clip is not None and ndom_hold:
        raise ValueError("non-dominant arm cannot both play a gloss and hold")
    if dom_clip is None and ndom_clip is None and not dom_hold and not ndom_hold:
        return main_clip
    for label, clip in (("domgloss", dom_clip), ("ndomgloss", ndom_clip)):
        if clip is not None and clip.num_frames != main_clip.num_frames:
            raise ValueError(
                f"{label} stream has {clip.num_frames} frames, main has {main_clip.num_frames}"
            )
    if (dom_hold or ndom_hold) and prev_pose is None:
        raise ValueError(f"{HOLD_TOKEN} needs the previous row's pose and none exists")

    dom_idx = [skeleton.index(b) for b in profile.arm_bones(True)]
    ndom_idx = [skeleton.index(b) for b in profile.arm_bones(False)]
    frames = []
    for i, pose in enumerate(main_clip.frames):
        rots = pose.local_rotations.copy()
        if dom_clip is not None:
            rots[dom_idx] = dom_clip.frames[i].local_rotations[dom_idx]
        elif dom_hold:
            rots[dom_idx] = prev_pose.local_rotations[dom_idx]
        if ndom_clip is not None:
            rots[ndom_idx] = ndom_clip.frames[i].local_rotations[ndom_idx]
        elif ndom_hold:
            rots[ndom_idx] = prev_pose.local_rotations[ndom_idx]
        frames.append(Pose(pose.root_translation, rots))
    return AnimationClip(main_clip.fps, tuple(frames))


def _smoothstep(u: float) -> float:
    return u * u * (3.0 - 2.0 * u)


def make_transition(pose_a: Pose, pose_b: Pose, gap: float, fps: float) -> tuple[Pose, ...]:
    """Ease-in-ease-out intermediate frames bridging a gap of ``gap`` seconds.

    Returns ``ceil(gap * fps) - 1`` frames; a zero gap yields none (hard cut).
    """
    if gap < 0:
        raise ValueError("gap must be non-negative")
    slots = math.ceil(gap * fps - 1e-9)
    if slots <= 1:
        return ()
    return tuple(
        blend_poses(pose_a, pose_b, _smoothstep(j / slots)) for j in range(1, slots)
    )


def _frame_of(t: float, fps: float) -> int:
    return int(math.floor(t * fps + 0.5))


def realize(
    doc: MmsDocument,
    dictionary: GlossDictionary,
    profile: SkeletonProfile | None = None,
    options: RealizeOptions | None = None,
) -> Timeline:
    """Run the full realization cycle on a validated document."""
    if not doc.rows:
        raise RealizationError("document has no rows")
    profile = profile or dictionary.profile
    options = options or RealizeOptions()
    fps = options.fps
    skeleton = dictionary.skeleton
    rows = schedule(doc, dictionary)

    warnings: list[str] = []
    total_frames = _frame_of(rows[-1].end, fps) + 1
    buffer: list[Pose | None] = [None] * total_frames
    segments: list[TimelineSegment] = []
    transitions: list[TransitionWindow] = []
    prev_pose: Pose | None = None
    prev_end_f: int | None = None

    for srow in rows:
        start_f = _frame_of(srow.start, fps)
        end_f = _frame_of(srow.end, fps)
        if end_f <= start_f:
            end_f = start_f + 1
        length = (end_f - start_f) / fps
        n_frames = end_f - start_f + 1
        row = srow.row
        try:
            if srow.main is None:
                if prev_pose is None:
                    raise ValueError(f"{HOLD_TOKEN} needs the previous row's pose and none exists")
                main_stream = AnimationClip(fps, (prev_pose,) * n_frames)
                kind = "hold"
            else:
                if srow.main.nominal_duration > 0 and srow.main.nominal_duration / length > 4.0:
                    warnings.append(
                        f"row {srow.index}: playback at "
                        f"{100.0 * srow.main.nominal_duration / length:.0f}% of nominal speed "
                        "exceeds 400%"
                    )
                retimed = retime_clip(srow.main, length, fps)
                main_stream, residual = apply_row_inflections(
                    skeleton, retimed, row.inflections, profile
                )
                kind = "sign"
            dom_stream = None
            if srow.dom is not None:
                dom_stream, _ = apply_row_inflections(
                    skeleton, retime_clip(srow.dom, length, fps), row.inflections, profile
                )
            ndom_stream = None
            if srow.ndom is not None:
                ndom_stream, _ = apply_row_inflections(
                    skeleton, retime_clip(srow.ndom, length, fps), row.inflections, profile
                )
            merged = merge_parallel(
                skeleton,
                main_stream,
                dom_stream,
                ndom_stream,
                profile=profile,
                prev_pose=prev_pose,
                dom_hold=row.domgloss == HOLD_TOKEN,
                ndom_hold=row.ndomgloss == HOLD_TOKEN,
            )
        except ValueError as exc:
            raise RealizationError(str(exc), srow.index) from None

        if prev_end_f is None:
            # Lead-in before the first scheduled row holds its opening pose.
            for f in range(0, start_f):
                buffer[f] = merged.frames[0]
        elif start_f > prev_end_f:
            inter = make_transition(prev_pose, merged.frames[0], (start_f - prev_end_f) / fps, fps)
            for offset, pose in enumerate(inter, start=1):
                buffer[prev_end_f + offset] = pose
            transitions.append(TransitionWindow(prev_end_f / fps, start_f / fps))
        buffer[start_f : end_f + 1] = merged.frames
        segments.append(TimelineSegment(srow.index, row.maingloss, start_f / fps, end_f / fps, kind))
        prev_pose = merged.frames[-1]
        prev_end_f = end_f

    assert all(p is not None for p in buffer)
    return Timeline(
        AnimationClip(fps, tuple(buffer)),
        tuple(segments),
        tuple(transitions),
        tuple(warnings),
    )


def export_timeline(skeleton: Skeleton, timeline: Timeline, output_format: str) -> bytes:
    """Serialize the composed clip; formats: ``bvh`` or ``json``."""
    if output_format == "bvh":
        from .bvh import save_bvh

        return save_bvh(skeleton, timeline.clip)
    if output_format == "json":
        from .animjson import save_animation_json

        return save_animation_json(skeleton, timeline.clip)
    raise ValueError(f"unsupported output format {output_format!r}")


def segments_sidecar(timeline: Timeline) -> bytes:
    """Segment index as a JSON sidecar for downstream tools."""
    import json

    doc = {
        "format": "mms-anim-segments/1",
        "fps": timeline.clip.fps,
        "segments": [
            {
                "row": s.row_index,
                "maingloss": s.maingloss,
                "start": s.start,
                "end": s.end,
                "kind": s.kind,
            }
            for s in timeline.segments
        ],
        "transitions": [{"start": t.start, "end": t.end} for t in timeline.transitions],
    }
    return json.dumps(doc).encode("utf-8")
