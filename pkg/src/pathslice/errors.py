"""Exception hierarchy.

Every error carries a short ``category`` string and the process exit code the
command-line driver maps it to.
"""


class PathSliceError(Exception):
    category = "error"
    exit_code = 1


class ConfigurationError(PathSliceError, ValueError):
    category = "configuration"
    exit_code = 3


class ShapeError(PathSliceError, ValueError):
    category = "shape"
    exit_code = 3


class DerivativeBudgetError(PathSliceError, ValueError):
    """Requested derivative exceeds what Assumption (A) grants the model."""

    category = "derivative-budget"
    exit_code = 3


class TimeOrderError(PathSliceError, ValueError):
    category = "time-order"
    exit_code = 3


class WindowError(PathSliceError, ValueError):
    """Step width outside the admissible window 0 < t - s <= T*hbar."""

    category = "window"
    exit_code = 3


class SupportError(PathSliceError, ValueError):
    category = "support"
    exit_code = 3


class SingularityError(PathSliceError, ValueError):
    category = "singularity"
    exit_code = 3


class LatticeError(PathSliceError, ValueError):
    category = "lattice"
    exit_code = 3


class DegenerateFitError(PathSliceError, ArithmeticError):
    """Errors sit at the rounding floor, so no slope can be fitted."""

    category = "degenerate-fit"
    exit_code = 4


class OracleResolutionError(PathSliceError, ArithmeticError):
    """The reference solver is not accurate enough for the requested study."""

    category = "oracle-resolution"
    exit_code = 5
