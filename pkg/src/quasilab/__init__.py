"""Quasilinear maps, twisted sums and finite-n accessibility checks on l_p^n."""
from .kernels import BACKEND
from .spaces import PNormedSpace, aoki_rolewicz_exponent, hom_map_norm_estimate, p_quasinorm
from .maps import (HomogeneousMap, LipschitzProfile, clamp_profile, homogenize,
                   identity_profile, kalton_peck, kalton_peck_map, kalton_peck_nonhom,
                   omega, omega_theta, quasilinearity_defect, ribe, ribe_map, theta_n)
from .estimation import QEstimate, certified_Q_upper, estimate_Q, k0_lower_bound
from .distance import (best_dist_lower_bound, best_linear_heuristic, dist_lb_symmetric,
                       symmetrize_linear, unit_sum_certificate,
                       witness_certificate)
from .twisted import TwistedSumElement, TwistedSumSpace, quasinorm_modulus_report, splitting_gap
from .asymptotics import (MapFamily, accessibility_report, kp_derivation, kp_derivation0,
                          kp_family, leibniz_defect, ribe_family, truncation_family)

__version__ = "0.1.0"
