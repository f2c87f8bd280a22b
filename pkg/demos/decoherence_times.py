"""
Decoherence of the parent qubit
===============================

The parent qubit sits in an ohmic bath and starts in an equal superposition
of its two levels. We read off the relaxation time T1 from the excited
population and the dephasing time T2 from the decay of the coherence, for a
handful of bath strengths eta, and compare T1 with the weak-coupling
estimate.
"""

import numpy as np

from qramsim import decoherence_experiment

etas = [1e-4, 2e-4, 5e-4, 1e-3]

# Times are in units of the half Rabi period pi / (2 |Omega|) with the default
# Omega = 0.01 omega_m, which is the time scale of the state transfer itself.
print(f"{'eta':>8} {'T1/T_R/2':>10} {'eta*T1':>10} {'T2/T_R/2':>10} {'T2/T1':>7} {'T1 fit/analytic':>16}")
for eta in etas:
    res = decoherence_experiment(eta)
    print(f"{eta:8.0e} {res.t1_over_half_rabi:10.4f} {eta * res.t1_over_half_rabi:10.3e} "
          f"{res.t2_over_half_rabi:10.4f} {res.t2 / res.t1:7.3f} {res.t1 / res.t1_analytic:16.4f}")

# eta * T1 is flat: T1 scales as 1/eta, with a coefficient close to 5.1e-4.
# T2 stays near 2 T1, so relaxation dominates and pure dephasing is weak.
