"""Exception taxonomy.

DomainError      -- an input outside a function's contract (bad rho, q <= 0, ...)
DegenerateCase   -- a structurally degenerate configuration that has no finite
                    answer (f0 = 0 quartic, boundary asymptote f^2 = crit, ...)
ToleranceUnmet   -- a numeric routine could not certify the requested accuracy
ConstructionError-- an iterative construction (critical-value curve, solver
                    certification) failed to converge or to verify

All inherit from TfivError so callers can catch the package in one clause.
"""


class TfivError(Exception):
    pass


class DomainError(TfivError, ValueError):
    pass


class DegenerateCase(TfivError, ValueError):
    pass


class ToleranceUnmet(TfivError, RuntimeError):
    pass


class ConstructionError(TfivError, RuntimeError):
    pass
