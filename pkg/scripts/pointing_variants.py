#!/usr/bin/env python3
"""Three pointing variants from one gloss, differing only in inflection cells.

Realizes INDEX in citation form, redirected fully to one side (torso + hand
trajectory together), and with the torso turned one way while the trajectory
points the other, then reports the measured torso yaw and hand direction.
"""

import argparse
import math
from pathlib import Path

import numpy as np

from mmsanim import anim, quat
from mmsanim.demo import write_demo_dictionary
from mmsanim.dictionary import dictionary_open
from mmsanim.interface import run_pipeline

VARIANTS = {
    "citation": "INDEX,1.5,,",
    "redirected_left": "INDEX,1.5,20,25",
    "torso_left_point_right": "INDEX,1.5,20,-55",
}
HEADER = "maingloss,duration,torsorelocay,domhandrelocay"


def measured_yaws(skeleton, timeline, segment):
    fps = timeline.clip.fps
    first = timeline.clip.frames[int(round(segment.start * fps))]
    last = timeline.clip.frames[int(round(segment.end * fps))]
    hand = skeleton.index("Bone_R_Hand")
    p0 = anim.fk_all(skeleton, first)[0][hand]
    p1 = anim.fk_all(skeleton, last)[0][hand]
    d = p1 - p0
    hand_yaw = math.degrees(math.atan2(d[0], d[2]))
    spine = anim.fk_global(skeleton, last, "Bone_Spine2")
    forward = quat.apply(spine.rotation, np.array([0.0, 0.0, 1.0]))
    torso_yaw = math.degrees(math.atan2(forward[0], forward[2]))
    return torso_yaw, hand_yaw


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", default="pointing_out")
    args = parser.parse_args()
    workdir = Path(args.workdir)
    dict_dir = workdir / "dictionary"
    write_demo_dictionary(dict_dir, glosses=["INDEX"])
    dictionary = dictionary_open(dict_dir)
    skeleton = dictionary.skeleton

    print(f"{'variant':26s} {'torso yaw':>10s} {'hand yaw':>10s}")
    for name, row in VARIANTS.items():
        result = run_pipeline(f"{HEADER}\n{row}\n", dictionary)
        (workdir / f"{name}.bvh").write_bytes(result.data)
        torso_yaw, hand_yaw = measured_yaws(skeleton, result.timeline, result.timeline.segments[0])
        print(f"{name:26s} {torso_yaw:9.1f}° {hand_yaw:9.1f}°")


if __name__ == "__main__":
    main()
