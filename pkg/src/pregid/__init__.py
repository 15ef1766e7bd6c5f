"""Identification of path coefficients in recursive linear SEMs via accessory sets."""

from .equations import Undecided, build_equation, build_np_system, coefficient_formula
from .expr import Beta, Const, SymExpr, evaluate, is_probably_zero
from .flow import AccessorySet, build_flow_network, find_accessory_set
from .graph import alpha_nonzero, beta_structurally_nonzero, classify, exists_active_path, s_set
from .model import CausalDiagram, CovarianceMatrix, Parameterization, build_diagram, validate_parameterization
from .solver import IDENTIFIED, UNDECIDED, IdentificationResult, identify, identify_all

__version__ = "0.1.0"
