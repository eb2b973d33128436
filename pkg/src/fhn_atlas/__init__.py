"""Numerical atlas of the three-parameter FitzHugh-Nagumo system."""

from .core import (Params, State, apply_kappa, divergence, eval_field,
                   jacobian, to_polynomial)
from .equilibria import (Equilibrium, classify_equilibrium,
                         closed_form_eigenvalues, find_equilibria)
from .atlas import (CurveId, classify_region, curve_ordering_check, eval_curve,
                    first_lyapunov, pitchfork_reduction)
from .dynamics import find_limit_cycle, integrate, return_map, separatrix_gap
from .slowfast import canard_coefficients, canard_curve, verify_canard
from .compactification import compactify, fhn_blowdown_chain, infinite_equilibria
from .portrait import PortraitSpec, render_portrait
from .errors import AtlasError, DomainError

__version__ = "0.1.0"
