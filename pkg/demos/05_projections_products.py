"""
Projections and product maps
============================

The projection onto the base and the product map I x phi out of a doubly
warped product, with phi harmonic on the fiber.  Their bitension fields in
closed form are set against the oracle.
"""

import numpy as np

from warpcheck import forms as Fm
from warpcheck.config import load_config
from warpcheck.maps import SmoothMap

S = load_config("CFG-C").space  # base: sphere patch with b = 2 + cos(theta)
p = np.array([1.1, 0.4, 0.3])

# %% Projection onto the base (phi = identity on F)
_, o = Fm.product_oracle(S, SmoothMap.identity(S.fiber), "F")(p)
for v in Fm.VARIANTS["proj-first"]:
    print(f"tau2(proj_B) {v:>16}: {Fm.projection_first_bitension(S, p, v)}")
print(f"tau2(proj_B) {'oracle':>16}: {o.vector[:S.m]}")

# %% A harmonic map of the fiber: phi(y) = 2y
A = load_config("CFG-A").space
phi = SmoothMap.from_strings(A.fiber, A.fiber, ["2*y1"])
q = [0.3, -0.4]
pf = Fm.product_domain_warped(A, phi, q)
_, o = Fm.product_oracle(A, phi, "F")(q)
print("tau2(I x phi) closed:", pf.tau2.vector, " oracle:", o.vector)
for note in pf.notes:
    print(f"   {note.equation} {note.term}: {note.printed} -> {note.corrected}")

# %% Non-harmonic maps are refused rather than silently accepted
try:
    Fm.product_domain_warped(A, SmoothMap.from_strings(A.fiber, A.fiber, ["y1^2"]), q)
except Fm.PreconditionError as exc:
    print("refused:", exc)
