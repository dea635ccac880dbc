"""Measurement-based cooling of oscillator networks with a qudit regulator."""

from .errors import (CheckFailedError, ConfigError, ConservationError,
                     ConstructionError, QcoolError, SearchFailureError,
                     TruncationError)
from .hilbert import (BlockedOperator, ExcitationBlock, Oscillator, Qudit,
                      SpaceSpec, annihilation, block_decompose,
                      excitation_levels, excitation_number, partial_trace,
                      qudit_transition)
from .states import (DSTParams, depolarized_qudit, displaced_squeezed_thermal,
                     displacement_op, dst_mean_energy, mean_energy,
                     squeezing_op, thermal_state)
from .hamiltonians import (CouplingParams, Topology, free_hamiltonian,
                           hamiltonian_hybrid, interaction_linear,
                           interaction_star, total_hamiltonian)
from .protocol import (EffectiveOperator, ProtocolConfig, ProtocolTrace,
                       SweepRecord, EnergyRecord, default_cycle_time,
                       effective_lambdas, effective_operator, evolve_unitary,
                       max_coolable_nbar, qubit_asymptotic_fidelity,
                       report_cycles, run_hybrid, run_protocol,
                       sweep_dimension, sweep_energy)
from .opttime import (OptTimeResult, analytic_topt, hermite_structure_check,
                      local_optima, solve_topt, vacuum_lambda)
from .gaussian import (GaussianState, OneShotResult, condition_on_vacuum,
                       evolve, gaussian_dst, moments_from_density,
                       oneshot_probability_formula, product,
                       symplectic_from_hamiltonian, theorem3_oneshot, vacuum,
                       vacuum_projection_probability)
from .stateprep import (PrepResult, conditional_displacement, hadamard_qudit,
                        make_cat, make_hybrid_entangled, make_noon,
                        make_odd_cat, parity_expectation, subspace_rotation)

__version__ = "0.1.0"
