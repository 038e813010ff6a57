#!/usr/bin/env python3
"""Write the bundled demo gloss dictionary as BVH files."""

import argparse

from mmsanim.demo import write_demo_dictionary


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_dictionary", help="target directory")
    parser.add_argument("--fps", type=float, default=30.0)
    args = parser.parse_args()
    written = write_demo_dictionary(args.out, fps=args.fps)
    print(f"wrote {len(written)} glosses to {args.out}: {', '.join(written)}")


if __name__ == "__main__":
    main()
