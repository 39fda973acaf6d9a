"""Kernels, sampling and checks for polynomial ensembles of random matrix products."""

from ._core import (
    ConvergenceError,
    DegenerateInputError,
    DomainError,
    Error,
    GeometryError,
    NumericalError,
    PoleError,
    RouteDisagreementError,
    SingularFactorError,
    SingularityError,
    SpecError,
    StripError,
    TruncationError,
    __version__,
    kernel_borodin,
    kernel_finite,
    kernel_hard_edge,
    log_gamma,
    meijer_g,
    pk,
    qk,
    rgamma,
    run_verify_suite,
    sample_chain,
    verify_suite_names,
    wright_bessel,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
