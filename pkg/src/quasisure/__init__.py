"""Coherent sublinear expectations on finite sample spaces, in exact rational arithmetic."""

from .exceptions import (
    InconsistentFamilyError,
    InputError,
    NotAbsolutelyContinuousError,
    NotIntegrableError,
    PreconditionError,
)
from .expectation import (
    ConditionalResult,
    SublinearExpectation,
    aggregate,
    check_axioms,
    check_conditional_axioms,
    check_consistency,
    check_dominance,
    classical_esssup,
    cond_exp_qs,
    cond_sublinear,
    membership,
    qs_difference,
    qs_equal,
    qs_esssup,
    sublinear_expectation,
)
from .filtration import (
    AdaptedProcess,
    Filtration,
    MartingaleClass,
    check_recursivity,
    classify_martingale,
    conditional_chain,
    lpb_membership,
    uniform_integrability_profile,
)
from .hahn import (
    DominatingPartition,
    Part,
    build_dominating_partition,
    check_countable_cover,
    minimal_support,
    verify_hahn,
)
from .measures import NEG_INF, Measure, MeasureFamily, RandomVariable, radon_nikodym, restrict
from .pasting import Closure, StabilizeResult, is_stable, paste, stabilize
from .report import CheckResult, Report, Verdict
from .space import SampleSpace, SigmaAlgebra, complete, is_measurable, is_polar, universal_complete

__version__ = "0.1.0"
