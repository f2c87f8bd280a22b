"""
Can a SQUID talk to an atomic cloud?
====================================

A SQUID loop acts as a small magnetic dipole. A Bose-Einstein condensate
held some tens of microns above it feels the dipole field on its hyperfine
transition, and the N atoms couple collectively, enhanced by sqrt(N).
The question is whether the resulting swap is faster than the SQUID's own
T1.
"""

import numpy as np

from qramsim import SquidBecParams, coupling_gain, feasibility_report

params = SquidBecParams()
report = feasibility_report(params)
print(report.to_text())

# The rate |g.mu| / h can be read as a cyclic frequency or as an angular one.
# The two readings differ by 2 pi, which is why both are carried along.

# The field falls off as r^-3, so moving the cloud closer pays off quickly.
print(f"\ncoupling gain from 50 um to 10 um: {coupling_gain(params, 10e-6):.1f}")
for d in (50e-6, 30e-6, 20e-6, 10e-6):
    rep = feasibility_report(params.with_(separation=d))
    row = "  ".join(f"{e.convention}: T1/T_R/2={e.t1_ratio:7.3f}" for e in rep.estimates)
    print(f"d = {d * 1e6:4.0f} um  {row}")

# A wider cloud along the axis samples the steep near side of the field, so
# the average coupling goes up. A wider cloud across the axis goes the other
# way.
for widths in ((1e-6,) * 3, (1e-6, 1e-6, 4e-6), (4e-6, 4e-6, 1e-6)):
    rep = feasibility_report(params.with_(cloud_widths=widths))
    print(f"cloud widths {np.array(widths) * 1e6} um: |g| = {rep.coupling_magnitude:.4e} T")
