"""Equivalence and nonequivalence of microcanonical, canonical and mixed ensembles.

Models expose a rate function ``I`` on a finite hidden space and
representation functions ``H``; the package computes entropies, free
energies, their Legendre-Fenchel relations, equilibrium macrostate sets, and
classifies every energy value as fully, partially or not equivalent.
"""

from .classify import (
    ClassificationReport,
    FixedBeta1,
    FixedU2,
    classify_curve,
    classify_mixed,
    classify_point,
    decompose_canonical,
    differentiability_check,
    hull_context,
    verify_mixed_equality,
    verify_point,
)
from .equilibria import (
    EquilibriumSet,
    brute_force_set,
    canonical_set,
    microcanonical_set,
    mixed_set,
    set_distance,
)
from .lft import SampledCurve, concave_hull, legendre_transform, support_tests
from .model import Model, coarse_grain, microstate_energy, rate_value, repr_value, validate_model
from .models import build_builtin, load_model, save_model
from .optimize import SolverOptions
from .thermo import entropy_curve, entropy_point, free_energy, free_energy_curve, repr_range

__version__ = "0.1.0"
