"""Open-system simulation of a parent-to-memory qubit state transfer."""

__version__ = "0.1.0"

from .analysis import (FidelitySeries, FitResult, analytic_t1, fidelity, fit_damped_cosine,
                       fit_exponential, target_evolve)
from .bath import (BathKernels, QuadratureError, dissipation_kernel, noise_kernel,
                   noise_kernel_series, precompute_kernels, spectral_density)
from .experiments import (DecoherenceResult, StorageResult, SweepFailure, TransferResult,
                          decoherence_experiment, eta_sweep, storage_decay_experiment,
                          transfer_experiment)
from .model import SimulationConfig, WindowSpec, build_hqq, half_rabi_time, squid_params_to_model
from .redfield import EvolutionRecord, PhysicalityError, master_rhs, rk4_step, run_evolution
from .squid import (SquidBecParams, coupling_gain, coupling_integral, dipole_field,
                    feasibility_report, rabi_from_coupling)
