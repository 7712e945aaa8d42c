"""Exact computations for motivic integration over quotient stacks.

The main entry points are re-exported here; see the submodules for details.
"""

from .crepant import (
    DivisorSum,
    SNCResolutionInput,
    StackDescriptor,
    build_crepant_stack,
    canonical_Mr,
    canonical_root,
    check_crepancy,
    decompose_discrepancy,
    k_calculus,
)
from .errors import MotivicError
from .grothendieck import L, MotivicElement, class_of, evaluate_at, exact_div, solve_L_shift
from .heights import (
    ArcOnCover,
    ComplexPresentation,
    HeightProfile,
    build_presentation,
    check_key_identity,
    height_profile,
    infer_multiplicity,
    ord_along_arc,
)
from .jets import (
    GroupoidCount,
    JetMatrix,
    JetRing,
    group_order,
    groupoid_count,
    measure_from_level,
    stabilizer_order,
    verify_change_of_variables,
)
from .series import AtLeast, Exact, SeriesMatrix, TruncatedSeries, Valuation
from .smith import euler_valuation, fitting_order, lemma33_check, smith_normal_form

__version__ = "0.1.0"
