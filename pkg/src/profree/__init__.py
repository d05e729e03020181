"""Exact computations for free groups, tubular groups and their finite quotients."""

from .errors import BudgetExceeded, InputError, MalnormalityError, ProfreeError
from .finquot import (
    FiniteGroup,
    Presentation,
    WordMeasure,
    bprime_test,
    count_epis,
    count_extensions,
    count_homs,
    make_group,
    measures_equal,
    profinite_equiv_test,
    rigidity_experiment,
    subgroup_lattice,
    word_measure,
)
from .foxcalc import (
    FiniteAlgebraElement,
    GroupRingElement,
    evaluate,
    fox_derivative,
    inner_derivation_conjugation_check,
    tau_row,
    trace_element,
    verify_fundamental_identity,
    verify_resolution_shadow,
)
from .smallcancel import check_metric, enumerate_pieces, find_exponents, symmetrize
from .tubular import (
    GammaGraph,
    GraphOfGroups,
    HnnPresentation,
    analyze_components,
    baumslag_solitar,
    britton_reduce,
    build_gamma,
    cohomology_report,
    collapse_to_single_vertex,
    decide,
    edge_closure_descriptor,
    loop_product,
)
from .wordcore import (
    CyclicWord,
    FreeAutomorphism,
    MalnormalityReport,
    Word,
    algebraic_closure,
    apply_automorphism,
    aut_orbit_equal,
    conjugate_equal,
    cyclic_reduce,
    is_malnormal_family,
    is_primitive,
    reduce_word,
    root,
    whitehead_minimize,
)

__version__ = "0.1.0"
