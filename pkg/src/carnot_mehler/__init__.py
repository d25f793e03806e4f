"""Exact Hermite and Mehler calculus on stratified (Carnot) groups."""

from .algebra import (GroupPoint, StratifiedAlgebra, dilate, get_group, group_product,
                      homogeneous_dimension, identity, inverse, load_algebra, registered_groups,
                      symbolic_product, validate_algebra)
from .diffops import (apply_dilation_generator, apply_N, apply_sublaplacian, gradient_squared,
                      left_invariant_field)
from .errors import *  # noqa: F401,F403
from .hermite import (generating_hermite, membership_check, schrodinger_coefficient,
                      special_hermite, step2_generating_hermite, step2_rep_data)
from .poly import GaussianRational, I, Polynomial, PolyRing, parse_polynomial
from .spectral import (asymmetry_witness, check_energy_identities, check_intertwining,
                       check_rotation_identity, heat_op, hermite_basis, mehler_poly, moment,
                       monomial_basis, poincare_gap, rayleigh_quotient)

__version__ = "0.1.0"
