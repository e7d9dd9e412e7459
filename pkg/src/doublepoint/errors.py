"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so the CLI can map
it onto an exit status without string matching.
"""


class DoublePointError(Exception):
    code = "error"


# linalg
class SingularForm(DoublePointError):
    code = "singular-form"


class NoConvergence(DoublePointError):
    code = "no-convergence"


# ingest
class ParseError(DoublePointError):
    code = "parse"

    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = tuple(sorted(set(expected)))
        detail = f"{message} at byte offset {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


class EvaluationError(DoublePointError):
    code = "evaluation"


class ValidationError(DoublePointError):
    code = "validation"


# invariants
class PointNotOnStratum(DoublePointError):
    code = "point-not-on-stratum"


class GenericityViolation(DoublePointError):
    code = "genericity"


class DegenerateSplitting(DoublePointError):
    code = "degenerate-splitting"


class SingularC(DoublePointError):
    code = "singular-c"


class RouteMismatch(DoublePointError):
    code = "route-mismatch"


class UnpairedEigenvalue(DoublePointError):
    code = "unpaired-eigenvalue"


class DegenerateSpectrum(DoublePointError):
    code = "degenerate-spectrum"


class DimensionMismatch(DoublePointError):
    code = "dimension-mismatch"


class OutOfRange(DoublePointError):
    code = "out-of-range"


# hamiltonians
class NewtonDivergence(DoublePointError):
    code = "newton-divergence"


class WrongRegime(DoublePointError):
    code = "wrong-regime"


class DegenerateRestriction(DoublePointError):
    code = "degenerate-restriction"


# normal forms
class InvalidSpec(DoublePointError):
    code = "invalid-spec"


class RoundtripFailure(DoublePointError):
    code = "roundtrip"
