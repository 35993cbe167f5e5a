"""dotharvest: simulation and analysis toolkit for a two-quantum-dot,
three-terminal thermoelectric engine.

Ensemble (master-equation) dynamics, stochastic jump trajectories with cycle
statistics and fluctuation-theorem checks, full counting statistics with the
large-deviation surface of the two output currents, and the semi-stochastic
telegraph-piston reduction.
"""

__version__ = "0.1.0"

from .model import (EngineParams, ParameterError, TransitionRates, asymmetry,
                    build_generator, carnot, coupling, fermi, generator, rates)
from .master import (SteadyObservables, evolve, observables, stall_bias,
                     steady_state)
from .oscillation import (CubicPoly, OscCoefficients, characteristic_cubic,
                          cubic_discriminant, minimize_discriminant,
                          reduced_coefficients)
from .correlations import g_hl, g_ll, spectrum_is_real
from .trajectory import (Trajectory, segment_at_00, simulate,
                         simulate_ensemble, stochastic_intensity)
from .cycles import (CycleRecord, CycleStats, c4_duration_analytic,
                     classify_segment, cycle_stats, dft_check,
                     hill_cycle_rates, ift_check, intercycle_gap_stats,
                     stall_bias_cycle_estimate)
from .counting import cgf, counting_generator, ldf_surface
from .semistoch import (max_qin, semi_cycles, telegraph_trace,
                        work_dot_response)

__all__ = [
    "EngineParams", "ParameterError", "TransitionRates", "SteadyObservables",
    "Trajectory", "CycleRecord", "CycleStats", "CubicPoly", "OscCoefficients",
    "asymmetry", "build_generator", "carnot", "coupling", "fermi", "generator",
    "rates", "evolve", "observables", "stall_bias", "steady_state",
    "characteristic_cubic", "cubic_discriminant", "minimize_discriminant",
    "reduced_coefficients", "g_hl", "g_ll", "spectrum_is_real", "segment_at_00",
    "simulate", "simulate_ensemble", "stochastic_intensity",
    "c4_duration_analytic", "classify_segment", "cycle_stats", "dft_check",
    "hill_cycle_rates", "ift_check", "intercycle_gap_stats",
    "stall_bias_cycle_estimate", "cgf", "counting_generator", "ldf_surface",
    "max_qin", "semi_cycles", "telegraph_trace", "work_dot_response",
]
