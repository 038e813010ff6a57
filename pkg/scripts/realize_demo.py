#!/usr/bin/env python3
"""End-to-end demo: build a dictionary, write a sample MMS table, realize it."""

import argparse
from pathlib import Path

from mmsanim.compose import segments_sidecar
from mmsanim.demo import write_demo_dictionary
from mmsanim.dictionary import dictionary_open
from mmsanim.interface import run_pipeline

SAMPLE_MMS = """\
maingloss,domgloss,ndomgloss,duration,transition,torsorelocay,domhandrelocsx,domhandrelocsy,domhandrelocsz
NICHT,,,1.5,,,,,
INDEX,,,,0.4,15,,,
<HOLD>,,,0.6,,,,,
BALL,,,,0.3,,1.3,1.3,1.3
HAUS,GUT,<HOLD>,,0.4,,,,
"""


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", default="demo_out")
    parser.add_argument("--fps", type=float, default=30.0)
    args = parser.parse_args()
    workdir = Path(args.workdir)
    dict_dir = workdir / "dictionary"
    write_demo_dictionary(dict_dir, fps=args.fps)
    (workdir / "sample.mms").write_text(SAMPLE_MMS, encoding="utf-8")

    dictionary = dictionary_open(dict_dir)
    for fmt in ("bvh", "json"):
        result = run_pipeline(SAMPLE_MMS, dictionary, fps=args.fps, output_format=fmt)
        out = workdir / f"sample.{fmt}"
        out.write_bytes(result.data)
        print(f"{out}: {len(result.data)} bytes")
    (workdir / "sample.segments.json").write_bytes(segments_sidecar(result.timeline))
    print(f"timeline: {result.timeline.clip.nominal_duration:.2f} s, "
          f"{result.timeline.clip.num_frames} frames, "
          f"{len(result.timeline.segments)} segments")
    for segment in result.timeline.segments:
        print(f"  row {segment.row_index}: {segment.maingloss:8s} "
              f"[{segment.start:5.2f}, {segment.end:5.2f}] {segment.kind}")


if __name__ == "__main__":
    main()
