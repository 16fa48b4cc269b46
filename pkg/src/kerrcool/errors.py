"""Exception types shared across the package."""


class KerrcoolError(Exception):
    """Base class for all package errors."""


class ConfigError(KerrcoolError):
    """Invalid or incomplete configuration input."""


class LinearCavityError(KerrcoolError):
    """Operation requires a nonzero effective Kerr constant."""


class BranchPolicyError(KerrcoolError):
    """Branch selection policy cannot be satisfied (e.g. bistable point
    under a monostable-only policy)."""


class InstabilityError(KerrcoolError):
    """Operating point is dynamically unstable (parametric instability of
    the cavity, or net mechanical anti-damping)."""


class ConvergenceError(KerrcoolError):
    """Iterative routine (quadrature, bisection) failed to converge."""
