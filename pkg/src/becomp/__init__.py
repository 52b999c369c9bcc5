"""Comparison geometry on weighted rotationally symmetric manifolds.

The package computes every ingredient of a weighted Sobolev inequality
under an asymptotically nonnegative modified-Ricci lower bound - decay
profiles and their moments, the comparison ODE, curvature of model
manifolds, monotone volume quotients and their limit, both sides of the
inequality, and the radial transport pipeline behind its proof - and
verifies the comparison statements numerically on those models.
"""

from .errors import (AdmissibilityError, CompatibilityError, HypothesisError,
                     PoleSmoothnessError)
from .profiles import (DecayProfile, ExponentialProfile, LinearBumpProfile,
                       Moments, PowerLawProfile, SampledProfile, ZeroProfile,
                       eval_lambda, moments, profile_from_json, shifted_profile)
from .odecmp import (ComparisonSolution, ScalarCurve, psi1_growth_check,
                     psi_ratio_bound_check, riccati_compare, solve_h,
                     solve_psi_pair, wronskian_drift)
from .manifold import (BEData, ConstantDensity, EuclideanWarp, LogPolyDensity,
                       LogTanhExpDensity, ModelManifold, SmoothedConeWarp,
                       admissibility_check, be_ricci, be_ricci_grid,
                       log_density_derivs, manifold_from_json,
                       required_envelope, warp_derivs)
from .volume import (AvrResult, RatioCurve, avr, ball_measure, bg_ratio_curve,
                     mean_curvature_check, sphere_measure)
from .sobolev import (Annulus, Ball, ConstantFunction, PolyFunction, PowerBump,
                      SobolevReport, domain_from_json, function_from_json,
                      lhs_terms, rhs_value, sobolev_constant, verify_isoperimetric,
                      verify_sobolev)
from .abp import (NeumannSolution, TransportDiagnostics, divergence_bound_check,
                  first_integral_residual, normalize_f, solve_neumann_radial,
                  transport_diagnostics, transport_report)
from .reports import FAIL, INFO, PASS, VACUOUS, VerificationReport

__version__ = "0.1.0"
