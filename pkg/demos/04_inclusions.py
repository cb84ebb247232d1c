"""
Biharmonic inclusions of a factor
=================================

With b = 1 and f^2 = 2 + sin y the inclusion x -> (x, y0) of the base has
nonzero tension for every y0, but its bitension vanishes exactly where
|grad f^2|^2 is critical, for instance y0 = 0.  Everything below is computed
twice: from the closed forms and from the map alone.
"""

import numpy as np

from warpcheck import forms as Fm
from warpcheck.config import load_config
from warpcheck.maps import rough_laplacian, tension_section

S = load_config("CFG-B").space

# %% Closed forms against the first-principles oracle
for y0 in (0.0, 0.5):
    tau, tau2 = Fm.inclusion_B_fields(S, [y0])
    o_tau, o_tau2 = Fm.inclusion_oracle(S, "B", [y0])([0.2])
    print(f"y0={y0}: tau {tau([0.2]).vector} (oracle {o_tau.vector}),"
          f" tau2 {tau2([0.2]).vector} (oracle {o_tau2.vector})")

# %% Classification, with the corollary conditions alongside
for y0 in (0.0, 0.5, np.pi):
    c = Fm.classify_inclusion(S, "B", [y0], at=[0.2])
    print(f"y0={y0:.3f}: {c.kind.value:<18} |tau|={c.tau_norm:.3f} |tau2|={c.tau2_norm:.2e}"
          f"  corollary predicts proper: {c.corollary.prediction}")

# %% When both warping functions vary, nothing is proper biharmonic
A = load_config("CFG-A").space
print({Fm.classify_inclusion(A, "B", [y0], at=[0.3]).kind.value for y0 in np.linspace(-0.9, 0.9, 10)})

# %% The rough Laplacian of the tension field, term by term on CFG-A
# (the vertical part of the intermediate expression agrees with warped
# gradients; the horizontal part needs a factor of -3)
phi = Fm.inclusion_map(A, "B", [0.2])
x = 0.3
lap = rough_laplacian(tension_section(phi), [x])
beta, psi = np.exp(2 * x), np.exp(0.4)
dbeta, G = 2 * beta, 2 * psi
n2 = G * G / beta
typeset_h = (1 / 4) * (1 / (2 * beta * psi)) * dbeta * n2
print("Delta tau (oracle)     ", lap)
print("horizontal as typeset  ", typeset_h, " ratio", lap[0] / typeset_h)
