"""Reference trajectories for the tracking loops.

A reference provider is any callable t -> ReferenceSample. The three stock
providers cover the use cases in the test scenarios: a figure-eight Lissajous
track (1:2 frequency ratio in the horizontal plane), straight constant
velocity flight, and a fixed hover point. All of them are analytic, so
velocity and acceleration are exact derivatives of position, not finite
differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["ReferenceSample", "lissajous", "constant_velocity", "hover"]


@dataclass
class ReferenceSample:
    """Kinematic reference at one instant, inertial frame.

    Position [m], velocity [m/s], acceleration [m/s2], and jerk [m/s3]; the
    jerk feeds the rate-of-feedforward terms of the controller (the known
    part of the force-setpoint derivative), so providing it analytically
    sharpens tracking. Zero is a safe default.
    """

    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray = field(default_factory=lambda: np.zeros(3))
    jerk: np.ndarray = field(default_factory=lambda: np.zeros(3))


def lissajous(t: float, rate: float, amp_x: float = 5.0, amp_y: float = 5.0) -> ReferenceSample:
    """Figure-eight in the horizontal plane.

        x_r(t) = amp_x sin(rate t) e1 + amp_y sin(2 rate t) e2

    `rate` [rad/s] sets the lap period 2 pi / rate; the second axis runs at
    twice the frequency, which is what produces the eight.
    """
    s1, c1 = math.sin(rate * t), math.cos(rate * t)
    s2, c2 = math.sin(2.0 * rate * t), math.cos(2.0 * rate * t)
    r2 = rate * rate
    return ReferenceSample(
        position=np.array((amp_x * s1, amp_y * s2, 0.0)),
        velocity=np.array((amp_x * rate * c1, 2.0 * amp_y * rate * c2, 0.0)),
        acceleration=np.array((-amp_x * r2 * s1, -4.0 * amp_y * r2 * s2, 0.0)),
        jerk=np.array((-amp_x * r2 * rate * c1, -8.0 * amp_y * r2 * rate * c2, 0.0)),
    )


def constant_velocity(t: float, velocity, start=(0.0, 0.0, 0.0)) -> ReferenceSample:
    """Straight line from `start` at fixed `velocity`."""
    v = np.asarray(velocity, dtype=float)
    return ReferenceSample(
        position=np.asarray(start, dtype=float) + v * t,
        velocity=v.copy(),
    )


def hover(t: float, point=(0.0, 0.0, 0.0)) -> ReferenceSample:
    """Fixed hover point (zero velocity and acceleration)."""
    return ReferenceSample(
        position=np.asarray(point, dtype=float),
        velocity=np.zeros(3),
    )
