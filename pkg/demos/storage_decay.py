"""
Leakage out of the memory
=========================

After the transfer the parent is detuned again, but the coupling stays on.
The stored excitation slowly hybridises with the parent and leaks into the
bath through it. Second-order perturbation theory says the storage lifetime
is about (detuning / |Omega|)^2 times the parent T1.

At the default Omega that factor is 10^4, far too long to integrate with a
memory kernel on a laptop. We therefore enlarge the coupling to
|Omega| = 0.2 omega_m, where the factor is 25.
"""

from qramsim import storage_decay_experiment

for w_off in (1.5, 2.0):
    res = storage_decay_experiment(w_off=w_off)
    detuning = abs(1 - w_off)
    print(f"w_off={w_off}: storage time / T1 = {res.ratio:6.2f}  "
          f"(perturbative {(detuning / res.rabi) ** 2:5.1f}, min eigenvalue {res.min_eigenvalue:.1e})")

# Without a bath nothing leaks: the population only ripples at the detuned
# exchange frequency and the fit reports no resolved decay.
res = storage_decay_experiment(eta=0.0)
print("eta=0 resolved:", res.fit.resolved, " decay time:", res.decay_time)
