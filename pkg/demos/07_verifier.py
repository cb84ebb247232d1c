"""
The sampling verifier
=====================

run_suite drives every case of a configuration: closed forms against oracles
at seeded sample points, with a ledger of every correction applied to a
printed formula.  This is what ``warpcheck verify`` runs.
"""

from warpcheck.config import load_config
from warpcheck.verify import render, run_suite

# %% Adopted forms: every case should match
cfg = load_config("CFG-C").with_overrides(samples=20)
print(render(run_suite(cfg), "text"))

# %% Starting from the printed formulas: the catalog walk turns typos into ledger entries
cfg = load_config("CFG-A").with_overrides(cases=["connection", "curvature", "inclusion-f"], samples=20)
print(render(run_suite(cfg, printed_forms=True), "text"))
