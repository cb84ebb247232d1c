"""
Geometry of a coordinate patch: the round sphere
================================================

Christoffel symbols, curvature, gradient and Laplacian of the unit sphere in
(theta, phi) coordinates, checked against the values everybody knows.
"""

import numpy as np

from warpcheck.expr import parse
from warpcheck.geometry import MetricPatch, christoffel, curvature, grad, laplace_beltrami

S2 = MetricPatch.diagonal(["th", "ph"], [(0.1, 3.0), (-3.0, 3.0)], ["1", "sin(th)^2"], name="S2")

# %% Gamma^th_phph = -sin cos, Gamma^ph_thph = cot
G = christoffel(S2, [np.pi / 4, 0.0]).symbols
print("Gamma^th_phph(pi/4) =", G[0, 1, 1], " expected", -0.5)
print("Gamma^ph_thph(pi/4) =", G[1, 0, 1], " expected", 1.0)

# %% Constant curvature one: R^th_phthph = sin^2, Ric = g
c = curvature(S2, [np.pi / 3, 0.0])
print("R^th_phthph(pi/3)   =", c.riemann[0, 1, 0, 1], " expected", 0.75)
print("Ric - g             =", np.abs(c.ricci - S2.metric_at([np.pi / 3, 0.0])).max())

# %% cos(theta) is a first eigenfunction: Delta cos = -2 cos
h = parse("cos(th)", S2.vars)
for th in (0.5, 1.2, 2.5):
    print(f"Delta cos at th={th}: {laplace_beltrami(S2, h, [th, 0.0]):+.12f}  expected {-2 * np.cos(th):+.12f}")
print("grad cos at equator :", grad(S2, h, [np.pi / 2, 0.0]))
