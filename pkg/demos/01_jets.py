"""
Truncated Taylor jets
=====================

Every derivative in the package comes from jet arithmetic: an expression is
evaluated on jets instead of floats and all partials up to order 4 come out
exactly (up to rounding), with no step size to tune.
"""

import numpy as np

from warpcheck import jets as J
from warpcheck.expr import eval_jet, parse

# %% Parse an expression over two coordinates and evaluate it as a jet
f = parse("exp(x*y)+sin(x)^2", ["x", "y"])
jet = eval_jet(f, [0.3, -0.5], 4)
print("value        ", float(jet.value))
print("d/dx         ", jet.partial((1, 0)))
print("d2/dxdy      ", jet.partial((1, 1)))
print("d4/dx2dy2    ", jet.partial((2, 2)))

# %% Coefficients are normalized Taylor coefficients: partial / alpha!
print("coefficient  ", jet.coefficient((2, 2)), "=", jet.partial((2, 2)) / 4)

# %% Compare a first partial with a central difference
h = 1e-5
fd = (f.evaluate([0.3 + h, -0.5]) - f.evaluate([0.3 - h, -0.5])) / (2 * h)
print("finite diff  ", fd, " jet - fd:", jet.partial((1, 0)) - fd)

# %% Differentiating a jet lowers its order; products keep the smaller order
s = J.jet_space(2, 4)
x, y = s.variables([0.3, -0.5])
g = x * J.cos(y)
print("orders       ", g.order, g.d(0).order, (g.d(0) * g).order)

# %% Jets of arrays: the inverse of a metric matrix, still a jet in every entry
m = J.stack([J.stack([1 + x * x, x * y]), J.stack([x * y, 2 + y])])
inv = J.inverse(m)
print("g^-1 at point\n", np.asarray(inv.value))
