"""Numerical toolkit for the Z4-symmetric cubic normal form of a triple
instability: vector fields, integration, Lyapunov sweeps, the
Shimizu-Morioka reduction, heteroclinic shooting, model Poincare maps and
attractor classification."""

from .classify import (ClassLabel, ClassifyConfig, Evidence, classify, symmetry_distance,
                       visit_sequence)
from .config import RunConfig, parse_config
from .errors import (BracketError, ConfigError, DegenerateCoefficientsError, DiscontinuityError,
                     IntegrationError, InvalidRegimeError, MuTooLargeError, OutsideWindowError,
                     PreconditionError, SingularDerivativeError, StepLimitError,
                     StepUnderflowError, WrongCaseError, Z4Error)
from .formats import write_heatmap
from .heteroclinic import (arrival_angle, energy_E, find_het_rho, fundamental_solution_residual,
                           planar_separatrix, separatrix_split)
from .integrator import (EventSpec, IntegratorConfig, Trajectory, integrate, integrate_to_event,
                         integrate_with_tangent)
from .lyapunov import LyapunovConfig, SweepGrid, lyapunov_spectrum, run_sweep
from .model_map import (ModelMapParams, RegionSpec, henon_analysis, itinerary, map_T,
                        map_derivative, region_predicate, sigma_sign, verify_cones)
from .normal_form import (derived_constants, het_curve_coeffs, phys_to_rescaled,
                          rescaled_to_phys, sm_point_to_phys, sm_reduction, sm_residual)
from .systems import (SYMMETRY, PhysParams, RescaledParams, SMParams, SystemCoefficients,
                      general_field, numeric_field, rescaled_field, sm_field, spectrum_report)

__version__ = "0.1.0"
