"""hetwave: heteroclinic traveling waves for gradient reaction-diffusion
systems by constrained minimization of exponentially weighted actions."""

from .analysis import (RateFit, exact_bistable_reference, fit_exponential_rate,
                       h1_convergence_audit, uniform_convergence_check)
from .constants import (AssumptionReport, ConstantsLedger, check_assumptions,
                        check_gl_competitor, compute_d0, compute_ledger,
                        compute_ledger_curves, estimate_e_r, estimate_nu,
                        estimate_rho0, gl_circle_competitor)
from .energy import (WeightedEnergyParams, energy_1d, energy_1d_gradient,
                     profile_residual, weighted_energy_1d,
                     weighted_energy_1d_gradient, weighted_energy_2d,
                     weighted_energy_2d_gradient)
from .evolve import (EvolutionResult, IMEXStepper1D, IMEXStepper2D,
                     free_energy_1d, measure_front_speed,
                     measure_front_speed_2d, step_semi_implicit)
from .grids import (Curve1D, Grid1D, Profile2D, central_difference,
                    translate_curve, trapezoid_integral)
from .heteroclinic import (HeteroclinicResult, SpectralReport,
                           assemble_spectral_operator, clip_to_ball, fix_phase,
                           minimize_heteroclinic, minimize_local_heteroclinic,
                           project_nearest_translate, spectral_report)
from .landscape import CurveFamilyLandscape, PointLandscape
from .potentials import (PotentialSpec, WellPair, make_bump_perturbation,
                         make_ginzburg_landau, make_perturbed_gl,
                         make_scalar_allen_cahn, make_unbalanced_bistable,
                         make_zuniga_sternberg, potential_from_config)
from .tw import (ConstraintSpec, ConstrainedMinimum, SpeedSearchResult,
                 TravelingWaveProblem, classify_speed, competitor_moves,
                 entry_times, equipartition_residual, find_speed,
                 minimize_constrained, no_oscillation_check, t_star_bound,
                 uniqueness_audit)

__version__ = "0.1.0"
