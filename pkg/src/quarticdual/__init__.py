"""Primal/dual certificates for quartic-quadratic functionals on R^n."""
__version__ = "0.1.0"

from ._linalg import PD_TOL, PreconditionError
from .instance import (
    ProblemInstance,
    ValidationReport,
    generate_random,
    inst_a,
    inst_b,
    load_instance,
    make_instance,
    save_instance,
    validate,
)
from .primal import (
    PrimalPoint,
    classify_hessian,
    eval_J,
    find_critical_point,
    grad_J,
    hess_J,
)
from .dual import (
    ConeMembership,
    DualPoint,
    cone_membership,
    eval_J1,
    eval_J2,
    eval_Jstar,
    grad_Jstar,
    hat_v,
    hat_v0,
    hess_Jstar_v0,
    select_K,
)
from .certify import (
    Certificate,
    CertifyConfig,
    certify,
    check_dual_stationarity,
    check_legendre_identities,
    check_zero_gap,
    save_certificate,
    verify_case1,
    verify_case2,
    verify_case3,
)
