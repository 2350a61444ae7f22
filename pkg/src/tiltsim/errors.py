"""Exception hierarchy.

Everything raised on purpose by this package derives from TiltSimError so
that callers (CLI, service) can catch one type and map it to an exit code or
HTTP status without masking genuine bugs.
"""

__all__ = [
    "TiltSimError",
    "IntegrationError",
    "SingularThrustError",
    "AntipodalDirectionError",
    "SingularTiltError",
    "SimulationError",
]


class TiltSimError(Exception):
    """Base class for expected failure modes."""


class IntegrationError(TiltSimError):
    """Plant state left its invariant envelope (non-finite, tilt bound, |u12| >= 1)."""


class SingularThrustError(TiltSimError):
    """Force setpoint magnitude below the guard threshold; thrust direction undefined."""


class AntipodalDirectionError(TiltSimError):
    """Thrust direction opposite the setpoint; the alignment law is singular there."""


class SingularTiltError(TiltSimError):
    """Rotor allocation matrix singular (thrust direction in the rotor plane)."""


class SimulationError(TiltSimError):
    """A run failed mid-rollout; message carries the simulation time."""
