"""A look at the sonar model and the lawnmower sweep used as warm start.

Prints the detection rate along a line abeam of the vehicle, the swath
implied by the range band, and the residual risk left by the sweep as it
progresses across the benchmark square (2 km on a side).
"""

import numpy as np

from mcmsurvey import DomainSpec, Rect, SensorParams, VehicleParams, VehicleState
from mcmsurvey import detection_rate, initial_guess, integrate, risk_estimate
from mcmsurvey.lowdisc import make_point_set
from mcmsurvey.optimizer import swath_spacing

sensor, vehicle = SensorParams(), VehicleParams()

print("detection rate (1/s) for a target abeam-forward at 30 deg, by range")
for rho in (50, 100, 150, 200, 250, 300, 350, 400):
    b = np.radians(30.0)
    rate = detection_rate((0.0, 0.0, 0.0), (rho * np.cos(b), rho * np.sin(b)), sensor)
    print(f"  {rho:4d} m  {float(rate):7.3f}")

lo, hi = sensor.range_band()
print(f"\nvertical beam covers {lo:.0f}..{hi:.0f} m; leg spacing {swath_spacing(sensor):.0f} m")

domain = DomainSpec(Rect((500, 500), (2500, 2500)), (20, 20))
start = (500.0, 500.0)
guess = initial_guess(domain, start, sensor, vehicle)
traj = integrate(VehicleState(*start, 0.0, 0.0), guess, 4, vehicle)
print(f"lawnmower: t_f = {guess.t_f:.0f} s, path length = {vehicle.v * guess.t_f / 1000:.1f} km")

points = make_point_set("lattice", 10, 0)
print("\nresidual risk as the sweep progresses")
n = len(traj.times)
for frac in (0.25, 0.5, 0.75, 0.9, 1.0):
    part = traj.prefix(max(2, int(frac * n)))
    r = risk_estimate(part, points, domain, sensor).value
    print(f"  {part.t_f:6.0f} s  risk {r:.4f}")
