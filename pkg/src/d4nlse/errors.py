"""Exception hierarchy.

Every exception carries a short ``category`` string that the command line
front end prints so failures can be parsed by scripts.
"""


class D4Error(Exception):
    category = "error"


class PreconditionError(D4Error, ValueError):
    category = "precondition"


class UnsupportedBoundaryError(D4Error, ValueError):
    category = "unsupported-boundary"


class IntegratorDivergedError(D4Error, RuntimeError):
    category = "integrator-diverged"

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ConvergenceError(D4Error, RuntimeError):
    category = "not-converged"

    def __init__(self, message, results=()):
        super().__init__(message)
        self.results = list(results)


class ConstructionError(D4Error, ValueError):
    category = "construction-impossible"


class RootSelectionError(D4Error, ArithmeticError):
    category = "root-selection"

    def __init__(self, message, site=None):
        super().__init__(message)
        self.site = site


class BracketError(D4Error, ValueError):
    category = "bracket"


class OutputError(D4Error, OSError):
    category = "io"
