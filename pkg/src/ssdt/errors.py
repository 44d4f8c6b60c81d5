"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: model/input problems -> 2, solver or
simulation failures -> 3, domain violations (below the detection edge,
undetectable signal) -> 4.
"""

from __future__ import annotations


class SsdtError(Exception):
    """Base class for all errors raised by this package."""


# --- model construction / parsing ------------------------------------------

class ModelError(SsdtError):
    """Invalid noise-model input."""


class EmptyMeasure(ModelError):
    pass


class NonPositiveAtom(ModelError):
    pass


class NonPositiveWeight(ModelError):
    pass


class WeightSumError(ModelError):
    pass


class BadGamma(ModelError):
    pass


class ModelSyntaxError(ModelError):
    """Model file is not syntactically valid (bad JSON, missing fields)."""


class DimensionTooSmall(ModelError):
    """Requested matrix dimension cannot host every atom of the measure."""


class EmptyInput(ModelError):
    pass


class TooFewPoints(ModelError):
    pass


# --- numerical kernels / solvers --------------------------------------------

class SingularPoint(SsdtError):
    """A kernel denominator collapsed; indicates a caller logic error."""


class SolverError(SsdtError):
    """Base class for root-finding failures."""


class MaxIterationsExceeded(SolverError):
    pass


class NonFiniteValue(SolverError):
    pass


class GuardViolated(SolverError):
    """An iterate crossed the guard; a shape assumption failed."""


class InitializationFailed(SolverError):
    """Could not bracket the root during the bisection phase."""


class ConvergenceFailure(SolverError):
    """The eigenvalue iteration produced a non-finite estimate."""


# --- domain violations -------------------------------------------------------

class EdgeViolation(SsdtError):
    """Evaluation requested at or below the spectral detection threshold."""


class UndetectableSignal(SsdtError):
    """Signal strength lies at or below the detectability threshold."""
