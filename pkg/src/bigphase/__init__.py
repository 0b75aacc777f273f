"""Exact big-phase-space calculus for Gromov-Witten generating functions.

Modules:

* series    - truncated multivariate power series over Fractions
* model     - manifold data, the intersection-number oracle, generating
              functions, GW table import/export
* fields    - vector fields, correlators, the quantum product and the
              operator calculus (tau+/-, T, bar, R, ...)
* virasoro  - Virasoro vector fields, rho right-hand sides, residuals
* trr       - topological recursion relations, the A1/A2/B tensors and
              the named identity catalog
* solver    - genus-2 reconstruction from genus-0/1 data
* cli       - command line front end (verify / solve-f2 / export)
"""

from .series import (  # noqa: F401
    ORDER_EXACT,
    CapacityError,
    TruncSeries,
    UntrustedCoefficientError,
    VarWindow,
    WindowMismatchError,
)

__all__ = [
    "ORDER_EXACT",
    "CapacityError",
    "TruncSeries",
    "UntrustedCoefficientError",
    "VarWindow",
    "WindowMismatchError",
]

__version__ = "0.1.0"
