"""Exact computation with grid-based transseries over a transbasis.

The package provides lazy generalized power series with exact rational
exponents and coefficients, the tower of effective differential fields over
a transbasis, distinguished solutions of linear and quasi-linear asymptotic
differential equations, exp/log with automatic basis extension, and a
zero-equivalence decision procedure for differential-polynomial expressions
in the adjoined solutions.  A small expression language (``transseries.cli``,
installed as ``tscalc``) drives the library in batch or REPL mode.

Typical use::

    from fractions import Fraction as F
    from transseries import Transbasis, DiffPolynomial, extend

    basis = Transbasis.initial(0)                       # (x)
    basis, _, _ = basis.extended_with_exp({(F(-1),): F(1)}, name="exp(x)",
                                          phi_str="x")  # (x, e^x)
    node = basis.top_node()
    x = node.from_monomial((F(-1), F(0)))

    P = DiffPolynomial(node, {(1,): 1, (0, 1): x.inverse(),
                              (): -node.from_monomial((F(0), F(2)))})
    unode = extend(node, P, name="U")                   # adjoin the solution
    U = unode.generator()                               # zero-testable element
"""

from .errors import (
    BasisExtensionRequired,
    ConstantFieldExtensionNeeded,
    CrystallizationOverflow,
    DivisionByZero,
    EnumerationUnbounded,
    LinearResonance,
    NotInfinitesimal,
    NotQuasiLinear,
    StructuralError,
    TransbasisViolation,
    TransseriesError,
)
from .order_core import (
    BIG_O,
    EQ,
    GT,
    GridCertificate,
    INFINITY,
    LITTLE_O,
    LT,
    NEITHER,
    cert_combine,
    compare_antilex,
    enumerate_below,
    flat_compare,
    real_root_upper_bound,
    vec,
)
from .lazy_series import (
    ALL_ZERO_UP_TO_BOUND,
    END,
    FiniteSeries,
    LazySeries,
    RATIONALS,
    Term,
    add,
    canonical_decompose,
    cmp_asymptotic,
    const_series,
    inverse,
    invert_one_minus,
    monomial_scale,
    mul,
    neg,
    normalize,
    sub,
    valuation,
    valuation_below,
    valuation_of_nonzero,
    zero_series,
)
from .field_tower import (
    BaseElement,
    BaseNode,
    TowerDomain,
    compare_elements,
    is_purely_large,
    render_element,
    split_canonical,
)
from .transbasis import (
    BasisMap,
    Transbasis,
    decompose_for_exp,
    exp_element,
    log_element,
    validate,
)
from .linear_ode import (
    LinearOperator,
    ZERO_OPERATOR,
    crystallize,
    dsolve_linear,
    indicial_eval,
    render_indicial,
)
from .diffpoly import (
    DiffPolynomial,
    QuasiSolution,
    dsolve_quasilinear,
    dsolve_with_log_retries,
)
from .zerotest import (
    DsolElement,
    DsolNode,
    ExtensionContext,
    ReductionResult,
    Trace,
    extend,
    initial,
    leader_index,
    rebase_tower,
    ritt_rank,
    ritt_reduce,
    separant,
    sigma,
    zero_test,
)

__all__ = [n for n in dir() if not n.startswith("_")]
__version__ = "0.1.0"
