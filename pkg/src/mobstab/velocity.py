"""Average-velocity process of a trajectory.

The average velocity at elapsed time tau is the cumulative length of
the sampled path divided by tau, where the path length counts the
great-circle segments between consecutive fixes recorded up to that
moment. No interpolation is applied: the process has one sample per
fix, starting at the second fix of the trajectory.

Because segments chord the true path, the estimate never exceeds the
true average speed of a constant-speed itinerary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TooFewFixes
from .geometry import ReferenceFrame, Trajectory, consecutive_distances_m, great_circle_distance


@dataclass(frozen=True)
class ScalarProcessSeries:
    """Sampled nonnegative scalar process over (0, horizon].

    samples: (tau, value) pairs with tau strictly increasing, measured
    in seconds since the frame start.
    """

    samples: tuple[tuple[float, float], ...]
    horizon: float

    def __post_init__(self) -> None:
        prev = 0.0
        for tau, value in self.samples:
            if tau <= prev:
                raise ValueError("sample times must be strictly increasing and positive")
            if tau > self.horizon + 1e-9:
                raise ValueError(f"sample at tau={tau} beyond horizon {self.horizon}")
            if value < 0.0:
                raise ValueError("process values must be nonnegative")
            prev = tau

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def terminal_value(self) -> float:
        if not self.samples:
            raise ValueError("empty series has no terminal value")
        return self.samples[-1][1]


def path_length(traj: Trajectory, up_to: float, formula: str = "haversine") -> float:
    """Summed segment length over consecutive fixes with end time <= up_to."""
    total = 0.0
    for a, b in zip(traj.fixes, traj.fixes[1:]):
        if b.t > up_to:
            break
        total += great_circle_distance(a, b, formula)
    return total


def average_velocity_series(
    traj: Trajectory, frame: ReferenceFrame, formula: str = "haversine"
) -> ScalarProcessSeries:
    """Average-velocity samples at each fix from the second one onward.

    The trajectory must already be clipped to the frame. Elapsed time is
    measured from the frame start, so a trajectory whose first fix comes
    late simply has a long first segmentless stretch.

    Raises:
        TooFewFixes: fewer than two fixes, so no segment exists.
    """
    if len(traj) < 2:
        raise TooFewFixes(f"{traj.participant_id}: velocity needs >= 2 fixes, got {len(traj)}")
    t, lon, lat = traj.time_arrays()
    if t[0] < frame.t_min - 1e-9 or t[-1] > frame.t_max + 1e-9:
        raise ValueError("trajectory extends outside the reference frame; clip first")
    seg = consecutive_distances_m(lon, lat, formula)
    cum = np.cumsum(seg)
    taus = t[1:] - frame.t_min
    samples = tuple((float(tau), float(d / tau)) for tau, d in zip(taus, cum))
    return ScalarProcessSeries(samples=samples, horizon=frame.horizon)
