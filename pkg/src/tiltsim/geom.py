"""Small geometry kernel: rotations, unit vectors, saturations.

Conventions used throughout the package:

* Frames are right-handed with the third axis pointing down, so gravity is
  +g e3 and a hovering vehicle has its thrust direction u aligned with e3
  (the thrust force itself is -T u).
* Rotation matrices map body coordinates to inertial coordinates,
  v_inertial = R @ v_body, and evolve as dR/dt = R S(omega) with omega the
  body-frame angular velocity and S() the skew (cross-product) matrix.
* Attitude is kept as a plain 3x3 ndarray and advanced with the closed-form
  exponential map, never by integrating the nine matrix entries directly.

The helpers here are deliberately scalar-indexed instead of using np.cross /
np.linalg.norm: they sit in the per-step hot path of the simulator and the
fancy variants cost an order of magnitude more on length-3 arrays.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "cross",
    "norm",
    "unit",
    "unit_vector",
    "skew",
    "vee",
    "exp_so3",
    "rotvec_rate",
    "rotation_error_vector",
    "integrate_rotation",
    "orthonormalize",
    "sat_vec",
]


def cross(a, b):
    """Cross product of two 3-vectors (fast path for hot loops)."""
    return np.array(
        (
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        )
    )


def norm(v):
    """Euclidean norm of a 3-vector."""
    return math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])


def unit(v):
    """Normalize a 3-vector.

    Raises ValueError on (near-)zero input; callers that need a tolerance
    policy should guard the norm themselves first.
    """
    n = norm(v)
    if n < 1e-12:
        raise ValueError("cannot normalize a zero vector")
    return np.array((v[0] / n, v[1] / n, v[2] / n))


def unit_vector(v, tol: float = 1e-6):
    """Validate and return a unit 3-vector.

    Inputs within `tol` of unit length are renormalized silently (this keeps
    integrator round-off from propagating); anything further off is treated
    as a logic error and rejected.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {v.shape}")
    n = norm(v)
    if abs(n - 1.0) > tol:
        raise ValueError(f"|v| = {n:.9f} is not within {tol:g} of 1")
    return v / n


def skew(w):
    """Skew-symmetric matrix S(w) with S(w) @ v == w x v."""
    return np.array(
        (
            (0.0, -w[2], w[1]),
            (w[2], 0.0, -w[0]),
            (-w[1], w[0], 0.0),
        )
    )


def vee(m):
    """Inverse of skew(): extract w from the skew-symmetric part of m."""
    return np.array((m[2][1], m[0][2], m[1][0]))


def exp_so3(w):
    """Rodrigues formula: matrix exponential of skew(w).

    Exact for any rotation vector; switches to the quadratic series of the
    sinc-like coefficients below 1e-4 rad where the closed form loses digits.
    """
    wx, wy, wz = w[0], w[1], w[2]
    th2 = wx * wx + wy * wy + wz * wz
    th = math.sqrt(th2)
    if th < 1e-4:
        a = 1.0 - th2 / 6.0
        b = 0.5 - th2 / 24.0
    else:
        a = math.sin(th) / th
        b = (1.0 - math.cos(th)) / th2
    # I + a S(w) + b S(w)^2, written entrywise to skip two matmuls
    return np.array(
        (
            (
                1.0 - b * (wy * wy + wz * wz),
                -a * wz + b * wx * wy,
                a * wy + b * wx * wz,
            ),
            (
                a * wz + b * wx * wy,
                1.0 - b * (wx * wx + wz * wz),
                -a * wx + b * wy * wz,
            ),
            (
                -a * wy + b * wx * wz,
                a * wx + b * wy * wz,
                1.0 - b * (wx * wx + wy * wy),
            ),
        )
    )


def rotvec_rate(sigma, omega):
    """Rate of the local rotation vector sigma for body angular velocity omega.

    For R(t) = R0 @ exp_so3(sigma(t)) with dR/dt = R S(omega):

        dsigma/dt = omega + 1/2 sigma x omega + 1/12 sigma x (sigma x omega)

    truncated after the quadratic term, which preserves 4th-order accuracy of
    a Runge-Kutta step as long as |sigma| = O(dt). Used by the plant stepper;
    not meaningful for large |sigma|.
    """
    sxw = cross(sigma, omega)
    return omega + 0.5 * sxw + (1.0 / 12.0) * cross(sigma, sxw)


def rotation_error_vector(r):
    """Rotation vector theta*axis of a rotation matrix.

    The angle is recovered from the trace, the axis from the skew part. At
    theta = pi the skew part vanishes, so the axis comes from the diagonal of
    R = 2 n n^T - I instead, seeded at the largest diagonal entry with the
    remaining components signed by the corresponding off-diagonal sums. The
    returned vector is zero for the identity.
    """
    tr = r[0][0] + r[1][1] + r[2][2]
    c = max(-1.0, min(1.0, 0.5 * (tr - 1.0)))
    theta = math.acos(c)
    if theta < 1e-12:
        return np.zeros(3)
    if theta < math.pi - 1e-4:
        s = 2.0 * math.sin(theta)
        axis = np.array(
            (
                (r[2][1] - r[1][2]) / s,
                (r[0][2] - r[2][0]) / s,
                (r[1][0] - r[0][1]) / s,
            )
        )
        return theta * axis
    # near pi: diagonal branch
    d = np.array((r[0][0], r[1][1], r[2][2]))
    i = int(np.argmax(d))
    j, k = (i + 1) % 3, (i + 2) % 3
    ni = math.sqrt(max(0.0, (d[i] + 1.0) / 2.0))
    axis = np.zeros(3)
    axis[i] = ni
    axis[j] = (r[i][j] + r[j][i]) / (4.0 * ni)
    axis[k] = (r[i][k] + r[k][i]) / (4.0 * ni)
    n = norm(axis)
    axis = axis / n
    # keep continuity with the skew-part branch when it is not exactly pi
    w = (
        (r[2][1] - r[1][2]) * axis[0]
        + (r[0][2] - r[2][0]) * axis[1]
        + (r[1][0] - r[0][1]) * axis[2]
    )
    if w < 0.0:
        axis = -axis
    return theta * axis


def integrate_rotation(r, omega, dt):
    """Advance a rotation matrix by the exponential of omega*dt.

    Exact for constant body-frame angular velocity over the step. The result
    is re-orthonormalized with one polar-decomposition Newton step so that
    round-off never accumulates, no matter how many steps are composed.
    """
    return orthonormalize(r @ exp_so3(omega * dt))


def orthonormalize(r):
    """Project a near-orthonormal matrix back onto SO(3).

    Single Newton step toward the polar factor, R (3I - R^T R)/2: quadratic
    convergence, so 1-ulp drift per step stays at 1 ulp. Inputs far from
    orthonormal (where one step is not enough) are a logic error upstream.
    """
    return r @ (1.5 * np.identity(3) - 0.5 * (r.T @ r))


def sat_vec(x, bound):
    """Direction-preserving saturation: x scaled onto the ball |x| <= bound.

    Works for any vector length (the tilt law saturates 2-vectors). The
    scaled result is nudged down by an ulp when round-off leaves it a hair
    outside the ball, so saturating twice is exactly a no-op.
    """
    if bound <= 0.0:
        raise ValueError("saturation bound must be positive")
    b2 = bound * bound
    n2 = float(x @ x)
    if n2 <= b2:
        return np.asarray(x, dtype=float)
    s = x * (bound / math.sqrt(n2))
    while float(s @ s) > b2:
        s = s * (1.0 - 2.3e-16)
    return s
