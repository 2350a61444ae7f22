"""Rotor-speed allocation for a quadrotor with collectively tilting rotors.

The four rotors sit at h e3 +/- arm_length e1/e2 in the body frame, all
tilted to the common direction u, spinning alternately (odd rotors positive
about u). Rotor i contributes a thrust mu w_i^2 along u and a drag torque
+/- kappa w_i^2 u, so the map from squared rotor speeds to the wrench
(T, Gamma) is linear with a u-dependent 4x4 matrix whose determinant is
8 kappa arm^2 mu^3 u3: invertible on the whole operating envelope u3 > 0,
which is exactly what the tilt limit guarantees with margin.

Infeasible demands (negative or over-limit squared speeds) are clipped per
rotor and reported: the caller receives both the clipped speeds and the
wrench they actually produce, and feeds that achieved wrench to the plant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularTiltError
from .plant import VehicleParams

__all__ = ["RotorCommand", "build_allocation_matrix", "allocate"]


@dataclass
class RotorCommand:
    """Allocation result: squared rotor speeds and the post-clip wrench."""

    rotor_speed_sq: np.ndarray  # [rad^2/s^2], length 4
    feasible: bool  # True when no rotor had to be clipped
    thrust_achieved: float
    torque_achieved: np.ndarray


def build_allocation_matrix(u, params: VehicleParams) -> np.ndarray:
    """4x4 map from squared rotor speeds to (T, Gamma), body frame.

    Row 0 is total thrust magnitude; rows 1-3 the torque about the mass
    center including the pivot-offset moment of each tilted rotor thrust and
    the alternating drag torques.
    """
    mu = params.thrust_coeff
    ka = params.yaw_torque_coeff
    hm = params.pivot_offset * mu
    dm = params.arm_length * mu
    u1, u2, u3 = u[0], u[1], u[2]
    return np.array(
        (
            (mu, mu, mu, mu),
            (
                -hm * u2 + ka * u1,
                -hm * u2 - dm * u3 - ka * u1,
                -hm * u2 + ka * u1,
                -hm * u2 + dm * u3 - ka * u1,
            ),
            (
                hm * u1 - dm * u3 + ka * u2,
                hm * u1 - ka * u2,
                hm * u1 + dm * u3 + ka * u2,
                hm * u1 - ka * u2,
            ),
            (
                dm * u2 + ka * u3,
                dm * u1 - ka * u3,
                -dm * u2 + ka * u3,
                -dm * u1 - ka * u3,
            ),
        )
    )


def allocate(
    thrust: float,
    torque,
    u,
    params: VehicleParams,
    min_speed_sq: float = 0.0,
    max_speed_sq: float = math.inf,
) -> RotorCommand:
    """Solve for squared rotor speeds realizing (thrust, torque) at tilt u.

    Clips each rotor into [min_speed_sq, max_speed_sq], reports feasibility,
    and returns the wrench of the clipped speeds (the wrench the vehicle
    actually gets).
    """
    if u[2] <= 1e-9:
        raise SingularTiltError(f"allocation singular at u3 = {u[2]!r}")
    a = build_allocation_matrix(u, params)
    wrench = np.array((thrust, torque[0], torque[1], torque[2]))
    w2 = np.linalg.solve(a, wrench)
    clipped = np.clip(w2, min_speed_sq, max_speed_sq)
    feasible = bool(np.array_equal(w2, clipped))
    if feasible:
        achieved = wrench
    else:
        achieved = a @ clipped
    return RotorCommand(
        rotor_speed_sq=clipped,
        feasible=feasible,
        thrust_achieved=float(achieved[0]),
        torque_achieved=achieved[1:4],
    )
