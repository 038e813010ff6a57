"""mmsanim: realize MMS sign tables into composed skeletal animations."""

__version__ = "0.1.0"

from .anim import AnimationClip, Pose, RigidTransform, Skeleton  # noqa: F401
from .compose import (  # noqa: F401
    RealizationError,
    RealizeOptions,
    Timeline,
    merge_parallel,
    realize,
    schedule,
)
from .dictionary import GlossDictionary, dictionary_open  # noqa: F401
from .ik import ControllerTrack, IkChain, bake_back, bake_controller, solve_frame  # noqa: F401
from .inflect import apply_row_inflections  # noqa: F401
from .mms import (  # noqa: F401
    HOLD_TOKEN,
    InflectionSet,
    MmsDocument,
    MmsParseError,
    MmsRow,
    expand_column_name,
    parse_mms,
    serialize_mms,
    validate,
)
from .profile import SkeletonProfile, default_profile, load_profile  # noqa: F401
