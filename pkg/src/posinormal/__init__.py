"""Numerical laboratory for posinormal operators and powers with closed range."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DegenerateInputError,
    InputError,
    InternalConsistencyError,
    PosinormalError,
    PreconditionError,
)
from .numkernel import DEFAULT_TOL, Subspace, ToleranceConfig  # noqa: E402

__all__ = [
    "DEFAULT_TOL",
    "DegenerateInputError",
    "InputError",
    "InternalConsistencyError",
    "PosinormalError",
    "PreconditionError",
    "Subspace",
    "ToleranceConfig",
]
