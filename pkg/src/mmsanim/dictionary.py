"""Gloss dictionary: one motion clip per sign, stored as ``<GLOSSID>.bvh`` files.

Gloss IDs are the file stems, case-sensitive. Entries load lazily and are
cached read-only; the first loaded entry fixes the reference skeleton, every
later entry must match it (same names, parents, and rest offsets within 1e-6)
and the profile's role names are bound against it. Concurrent lookups are safe
after opening; reloading requires exclusive access.
"""

from __future__ import annotations

import threading
from pathlib import Path

import numpy as np

from .anim import AnimationClip, Skeleton
from .bvh import load_bvh
from .mms import HOLD_TOKEN
from .profile import SkeletonProfile, default_profile, validate_profile


class DictionaryError(Exception):
    pass


class GlossNotFoundError(DictionaryError, KeyError):
    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def __str__(self) -> str:
        return self.message


class SkeletonMismatchError(DictionaryError):
    pass


def _skeletons_match(a: Skeleton, b: Skeleton) -> bool:
    return (
        a.names == b.names
        and a.parents == b.parents
        and np.allclose(a.rest_offsets, b.rest_offsets, atol=1e-6)
        and np.allclose(a.rest_rotations, b.rest_rotations, atol=1e-6)
    )


class GlossDictionary:
    def __init__(self, directory, profile: SkeletonProfile):
        directory = Path(directory)
        if not directory.is_dir():
            raise FileNotFoundError(f"dictionary directory {directory} does not exist")
        self._directory = directory
        self._profile = profile
        self._paths = {path.stem: path for path in sorted(directory.glob("*.bvh"))}
        self._cache: dict[str, AnimationClip] = {}
        self._skeleton: Skeleton | None = None
        self._lock = threading.Lock()

    @property
    def directory(self) -> Path:
        return self._directory

    @property
    def profile(self) -> SkeletonProfile:
        return self._profile

    def gloss_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._paths))

    def __contains__(self, gloss: str) -> bool:
        return gloss in self._paths

    def __len__(self) -> int:
        return len(self._paths)

    def lookup(self, gloss: str) -> AnimationClip:
        """Load (or fetch the cached) clip for a gloss ID."""
        if gloss == HOLD_TOKEN:
            raise GlossNotFoundError(f"{HOLD_TOKEN} is a reserved token, not a dictionary entry")
        if gloss not in self._paths:
            raise GlossNotFoundError(f"unknown gloss {gloss!r}")
        with self._lock:
            clip = self._cache.get(gloss)
            if clip is None:
                skeleton, clip = load_bvh(self._paths[gloss].read_bytes())
                if self._skeleton is None:
                    validate_profile(self._profile, skeleton)
                    self._skeleton = skeleton
                elif not _skeletons_match(self._skeleton, skeleton):
                    raise SkeletonMismatchError(
                        f"gloss {gloss!r} uses a different skeleton than the dictionary"
                    )
                self._cache[gloss] = clip
            return clip

    def nominal_duration(self, gloss: str) -> float:
        return self.lookup(gloss).nominal_duration

    @property
    def skeleton(self) -> Skeleton:
        if self._skeleton is None:
            ids = self.gloss_ids()
            if not ids:
                raise DictionaryError(f"dictionary {self._directory} has no .bvh entries")
            self.lookup(ids[0])
        return self._skeleton


def dictionary_open(directory, profile: SkeletonProfile | None = None) -> GlossDictionary:
    """Open a dictionary directory, binding it to a skeleton profile."""
    return GlossDictionary(directory, profile or default_profile())
