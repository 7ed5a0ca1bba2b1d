"""Exception types raised by the library."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DegenerateDenominatorError(ArithmeticError):
    """A decoy-bound denominator is not strictly positive.

    This means the photon-number intervals do not satisfy the ordering the
    estimator relies on, so any bound computed from them would be unsound.
    """


class UndefinedQBERError(ArithmeticError):
    """QBER requested for a source whose gain is zero."""


class ValidationError(ValueError):
    """A source ensemble failed the decoy-condition checks."""

    def __init__(self, report):
        super().__init__(report.first_violation or "decoy conditions violated")
        self.report = report


class InadmissiblePatternError(ValueError):
    """An error pattern realizes intensities outside the admissible region."""


class NoFeasiblePointError(RuntimeError):
    """The intensity search found no admissible ensemble."""


class ConfigError(ValueError):
    """A run configuration could not be parsed or is inconsistent."""
