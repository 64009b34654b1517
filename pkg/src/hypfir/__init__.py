"""Euclidean-style reductions in group rings of free groups acting on hyperbolic spaces."""

from .ring import RingElement, format_element, format_vector, parse_element, parse_vector
from .scalars import GF, QQ, ZZ, parse_domain
from .spaces import CayleyBallOracle, TreeOracle, parse_oracle
from .reduction import TransformationLog, ge_factor, ideal_basis, reduce_step, submodule_basis
from .bass import ZModuleSpec, bass_descent, check_star

__version__ = "0.1.0"
