"""
Product maps into a doubly warped product
=========================================

I x phi from the plain product into the warped one.  The typeset conditions
contain ill-typed terms, so two readings are evaluated and both are tested for
equivalence with tau2 = 0 from the oracle.  A sweep over b = e^{ax} with
f^2 = 2 + sin y and phi constant looks for biharmonic members of the family.
"""

import numpy as np

from warpcheck import forms as Fm
from warpcheck.geometry import MetricPatch
from warpcheck.maps import SmoothMap
from warpcheck.verify import sample_points
from warpcheck.warped import DwpSpace

I = [(-1.0, 1.0)]
pts = sample_points([(-1, 1), (-1, 1)], 10, 42)


def family(a):
    S = DwpSpace(MetricPatch.euclidean(["x1"], I), MetricPatch.euclidean(["y1"], I),
                 f"exp({a}*x1)", "2+sin(y1)", f_squared=True)
    return S, SmoothMap.from_strings(S.fiber, S.fiber, ["0"])


# %% Sweep
for a in np.linspace(0, 2, 11):
    S, phi = family(round(float(a), 2))
    conds = [Fm.codomain_warped_conditions(S, phi, p) for p in pts]
    worst = max(np.abs(c.oracle_tau2).max() for c in conds)
    agree = {r: all(c.holds(r, 1e-8) == c.oracle_zero(1e-8) for c in conds) for r in Fm.READINGS}
    print(f"a={a:.1f}: max |tau2| {worst:.2e}   readings agree with oracle: {agree}")
