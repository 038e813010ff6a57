"""Quaternion helpers on plain numpy arrays.

Quaternions are scalar-last ``[x, y, z, w]`` float64 arrays (same layout as
scipy) and compose left-to-right: ``apply(mul(a, b), v) == apply(a, apply(b, v))``.
"""

from __future__ import annotations

import math

import numpy as np

_EPS = 1e-12

_AXES = {
    "x": np.array([1.0, 0.0, 0.0]),
    "y": np.array([0.0, 1.0, 0.0]),
    "z": np.array([0.0, 0.0, 1.0]),
}


def identity() -> np.ndarray:
    return np.array([0.0, 0.0, 0.0, 1.0])


def normalize(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = math.sqrt(float(np.dot(q, q)))
    if n < _EPS:
        raise ValueError("cannot normalize a near-zero quaternion")
    return q / n


def is_unit(q, tol: float = 1e-6) -> bool:
    return abs(float(np.dot(q, q)) - 1.0) <= 2.0 * tol


def mul(a, b) -> np.ndarray:
    ax, ay, az, aw = a
    bx, by, bz, bw = b
    return np.array(
        [
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
            aw * bw - ax * bx - ay * by - az * bz,
        ]
    )


def conjugate(q) -> np.ndarray:
    return np.array([-q[0], -q[1], -q[2], q[3]])


def apply(q, v) -> np.ndarray:
    """Rotate vector ``v`` by quaternion ``q``."""
    v = np.asarray(v, dtype=float)
    u = np.asarray(q[:3], dtype=float)
    t = 2.0 * np.cross(u, v)
    return v + float(q[3]) * t + np.cross(u, t)


def from_axis_angle(axis, radians: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    n = math.sqrt(float(np.dot(axis, axis)))
    if n < _EPS:
        raise ValueError("rotation axis must be non-zero")
    half = 0.5 * radians
    s = math.sin(half) / n
    return np.array([axis[0] * s, axis[1] * s, axis[2] * s, math.cos(half)])


def axis_rotation_deg(axis_name: str, degrees: float) -> np.ndarray:
    return from_axis_angle(_AXES[axis_name], math.radians(degrees))


def from_euler_xyz_deg(x: float, y: float, z: float) -> np.ndarray:
    """Intrinsic X-then-Y-then-Z rotation from degrees."""
    return mul(axis_rotation_deg("x", x), mul(axis_rotation_deg("y", y), axis_rotation_deg("z", z)))


def from_euler_channels(order: str, angles_deg) -> np.ndarray:
    """Intrinsic rotation composed in channel order, e.g. ``("zxy", (az, ax, ay))``."""
    q = identity()
    for axis_name, value in zip(order.lower(), angles_deg):
        q = mul(q, axis_rotation_deg(axis_name, float(value)))
    return q


def slerp(a, b, u: float) -> np.ndarray:
    """Shortest-arc spherical interpolation between unit quaternions."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = float(np.dot(a, b))
    if d < 0.0:
        b = -b
        d = -d
    if d > 1.0 - 1e-10:
        # Nearly aligned: linear blend is accurate and avoids 0/0.
        return normalize(a + u * (b - a))
    theta = math.acos(min(d, 1.0))
    s = math.sin(theta)
    return normalize((math.sin((1.0 - u) * theta) / s) * a + (math.sin(u * theta) / s) * b)


def rotation_between(a, b) -> np.ndarray:
    """Shortest-arc rotation taking direction ``a`` onto direction ``b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na = math.sqrt(float(np.dot(a, a)))
    nb = math.sqrt(float(np.dot(b, b)))
    if na < _EPS or nb < _EPS:
        return identity()
    ua = a / na
    ub = b / nb
    d = float(np.dot(ua, ub))
    if d >= 1.0 - 1e-14:
        return identity()
    if d <= -1.0 + 1e-12:
        # Antiparallel: half turn about a deterministic perpendicular axis.
        helper = _AXES["x"] if abs(ua[0]) < 0.9 else _AXES["y"]
        return from_axis_angle(np.cross(ua, helper), math.pi)
    xyz = np.cross(ua, ub)
    return normalize(np.array([xyz[0], xyz[1], xyz[2], 1.0 + d]))


def angle(q) -> float:
    """Absolute rotation angle of ``q`` in radians."""
    v = math.sqrt(float(np.dot(q[:3], q[:3])))
    return 2.0 * math.atan2(v, abs(float(q[3])))


def angle_between(a, b) -> float:
    return angle(mul(conjugate(a), b))
