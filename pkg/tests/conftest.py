import numpy as np
import pytest

from mmsanim import anim, quat
from mmsanim.demo import demo_skeleton, make_sign_clip, write_demo_dictionary
from mmsanim.dictionary import dictionary_open
from mmsanim.profile import default_profile


@pytest.fixture(scope="session")
def skeleton():
    return demo_skeleton()


@pytest.fixture(scope="session")
def profile():
    return default_profile()


@pytest.fixture(scope="session")
def sign_clip(skeleton):
    return make_sign_clip(skeleton, duration=1.0)


@pytest.fixture(scope="session")
def dict_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("glosses")
    write_demo_dictionary(path)
    return path


@pytest.fixture(scope="session")
def dictionary(dict_dir, profile):
    return dictionary_open(dict_dir, profile)


def max_fk_position_error(skeleton, clip_a, clip_b):
    worst = 0.0
    for fa, fb in zip(clip_a.frames, clip_b.frames):
        pa, _ = anim.fk_all(skeleton, fa)
        pb, _ = anim.fk_all(skeleton, fb)
        worst = max(worst, float(np.max(np.linalg.norm(pa - pb, axis=1))))
    return worst


def max_fk_orientation_error_deg(skeleton, clip_a, clip_b):
    worst = 0.0
    for fa, fb in zip(clip_a.frames, clip_b.frames):
        _, ra = anim.fk_all(skeleton, fa)
        _, rb = anim.fk_all(skeleton, fb)
        for j in range(skeleton.num_bones):
            worst = max(
                worst,
                quat.angle_between(quat.normalize(ra[j]), quat.normalize(rb[j])),
            )
    return float(np.degrees(worst))


def poses_bitequal(a, b):
    return np.array_equal(a.root_translation, b.root_translation) and np.array_equal(
        a.local_rotations, b.local_rotations
    )
