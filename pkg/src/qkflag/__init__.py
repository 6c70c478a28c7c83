"""Exact symbolic engine for K-theoretic J-functions of partial flag
varieties and their abelian quotients: Novikov-truncated series of factored
q-rational functions, fixed-point residue recursions, broken-orbit vanishing,
twists and level structures, and global consistency checks."""

from .core import (FactoredTerm, IllDefinedTermError, Monomial, POLE, Q, QSum,
                   RootNotRationalError, Specialization, UnboundVariableError,
                   eval_qsum, local_expand, qsum_equal, qsum_equal_exact,
                   residue_dq_over_q)
from .flags import (DegreeVector, FixedPointX, FixedPointY, FlagShape,
                    GeometryError, L, P, U, enumerate_degrees, fixed_points_X,
                    fixed_points_Y, point_A_X, point_A_Y, subs_X, subs_Y,
                    tangent_chars_X, tangent_chars_Y)
from .series import (DifferenceOp, HBAR_VAR, JSeries, MU_VAR,
                     TW_Y, UNTWISTED_Y, Variant, X_SMALL, Y_VAR, apply_op,
                     build, coefficient_term, descend, gamma_inv_all,
                     series_from_json, series_to_json, weyl_check)
from .recursion import (BrokenOrbit, OrbitDatum, RecursionEngineError,
                        RecursionReport, VanishingReport, check_vanishing,
                        coeff_broken, complete_flag_shape, edge_coeff,
                        enumerate_broken, gamma_edge_pair, make_broken,
                        make_orbit_x, make_orbit_y, root_substitution,
                        verify_recursion)
from .checks import (ChecksError, DegreeGapResult, LevelDualityReport,
                     cotangent_balance, degree_gap, degree_gap_factor_count,
                     dual_shape, level_duality_report, pairing,
                     pairing_residue_p1, small_j_property)

__all__ = [name for name in dir() if not name.startswith("_")]
