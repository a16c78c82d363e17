"""Quantitative equational logic over generalized metric spaces.

Deduction by saturation over a bounded term universe, finite model checking,
free quantitative algebras, and the induced quotiented-term monad, all over
an exact rational grid.
"""

from .errors import (
    BudgetExceeded,
    EMLawViolation,
    GridMismatch,
    NotAModel,
    NotNonexpansive,
    OutOfUniverse,
    PreconditionViolation,
    QeqlogError,
    SpecViolation,
    TrivialPair,
    UnknownFact,
    UnknownVariable,
    UnsupportedPreset,
)
from .terms import (
    App,
    Signature,
    Term,
    Var,
    apply_subst,
    canonical_cmp,
    check_nontrivial,
    enumerate_universe,
    parse_term,
    term_to_str,
)
from .gmet import (
    EpsGrid,
    FREL,
    FuzzySpace,
    GMetSpec,
    HornClause,
    MET,
    PMET,
    check_space,
    discrete_lift,
    enumerate_nonexpansive,
    is_nonexpansive,
)
from .qalg import (
    Judgment,
    QuantAlgebra,
    Theory,
    entails_catalog,
    eval_term,
    is_homomorphism,
    is_model,
    satisfies,
)
from .deduce import (
    DerivationDB,
    derives,
    distance,
    gen_nonexpansive_axioms,
    saturate,
    trace,
)
from .free import (
    FreeAlgebra,
    OVERFLOW,
    build_free,
    check_free_is_model,
    check_ump,
    extend_hom,
    free_eval,
)
from .monad import (
    EMCandidate,
    MonadInstance,
    check_em_laws,
    check_hom_image_model,
    check_monad_laws,
    em_from_model,
    m_map,
    m_mult,
    m_object,
    m_unit,
    model_from_em,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
