"""Minimum-time mine-countermeasure survey planning under a residual-risk constraint.

The residual risk of a plan is the probability that a target placed
uniformly in the search domain survives the sonar's detection process. It
is estimated with Monte Carlo or quasi-Monte Carlo points (``lowdisc``),
planned against by a single-shooting optimizer (``optimizer``), and made
reliable by re-planning on slightly inflated domains (``relaxation``).
"""

from .dynamics import ControlSchedule, Trajectory, VehicleParams, VehicleState, integrate
from .geometry import ConvexQuad, DomainSpec, Rect, Triangle, inflate
from .optimizer import NlpSettings, Solution, gradient_check, initial_guess, solve
from .relaxation import MissionReport, MissionRequest, PointSpec, naive_mission, relaxed_mission
from .risk import RiskEstimate, post_risk_oracle, risk_estimate
from .sensor import SensorParams, detection_rate

__all__ = [
    "ControlSchedule", "ConvexQuad", "DomainSpec", "MissionReport", "MissionRequest",
    "NlpSettings", "PointSpec", "Rect", "RiskEstimate", "SensorParams", "Solution",
    "Trajectory", "Triangle", "VehicleParams", "VehicleState", "detection_rate",
    "gradient_check", "inflate", "initial_guess", "integrate", "naive_mission",
    "post_risk_oracle", "relaxed_mission", "risk_estimate", "solve",
]
